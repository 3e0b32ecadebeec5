#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "desip/debias.hpp"

// Declarative run configuration. Every dataset a metric needs must be
// named here; nothing falls back to a hidden default path.

namespace desip {

struct EvalOptions {
  bool projection_bias = true;
  bool sembias = true;
  bool clustering = true;
  bool neighbor_correlation = true;
  bool profession_correlation = true;
  bool classification = true;
  bool weat = true;
  bool similarity = true;
  bool semantic_preservation = true;
  bool pca_payload = true;

  std::size_t projection_top = 50000;   // words averaged by projection bias
  std::size_t top_biased = 500;         // per gender, clustering/neighbors
  std::size_t classify_pool = 2500;     // per gender
  std::size_t classify_train = 500;     // per gender
  std::size_t neighbor_k = 100;
  std::uint64_t weat_max_permutations = 100000;
  std::size_t preservation_n = 200;
  std::vector<std::string> preservation_anchors;
};

struct RunConfig {
  std::string embedding_path;
  std::size_t limit = 0;  // vocabulary prefix, 0 = everything
  std::uint64_t seed = 42;

  debias::DebiasConfig debias;
  std::size_t y_top = 50000;

  // word lists
  std::string d_pairs_path;
  std::string p_pairs_path;   // flattened into the P word list
  std::string p_words_path;   // alternative plain list for P
  std::string z_lexicon_path;
  std::string professions_path;

  // datasets
  std::string sembias_path;
  std::size_t sembias_subset_tail = 40;
  std::string weat_sets_path;
  std::map<std::string, std::string> similarity_paths;  // name -> file

  EvalOptions eval;

  // outputs
  std::string out_embedding;
  std::string out_diagnostics;
  std::string out_report;
};

// Parse the JSON config document. Unknown keys are rejected so typos
// cannot silently disable a metric.
RunConfig load_config(const std::string& path);

// Existence checks for every referenced input path, scoped to what the
// requested command actually needs. Throws ValidationError.
void validate_for_debias(const RunConfig& cfg);
void validate_for_eval(const RunConfig& cfg);

struct WeatTask {
  std::string name;
  std::vector<std::string> targets_x;
  std::vector<std::string> targets_y;
  std::vector<std::string> attrs_a;
  std::vector<std::string> attrs_b;
};

// Named WEAT word sets from their own JSON document.
std::vector<WeatTask> load_weat_sets(const std::string& path);

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace desip
