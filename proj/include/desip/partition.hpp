#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "desip/embedding.hpp"

// Construction of the five role matrices from word lists and the embedding
// table, plus the marginal screening step that cuts the remainder matrix
// down before regression. Role matrices store one word per column (rows =
// embedding dimension).

namespace desip::partition {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct WordPairList {
  std::vector<std::pair<std::string, std::string>> pairs;  // (male, female)
};

// One token per line; `#` lines and blanks skipped.
std::vector<std::string> load_token_list(const std::string& path);

// `male<TAB>female` per line; `#` lines and blanks skipped. Duplicate pairs
// are rejected.
WordPairList load_pair_list(const std::string& path);

struct BuildStats {
  std::size_t skipped_oov = 0;
};

struct TokenMatrix {
  Matrix m;                         // dim x tokens.size()
  std::vector<std::string> tokens;  // column j holds vector of tokens[j]
};

// Column j = vec(male_j) - vec(female_j), raw differences. Pairs with an
// out-of-vocabulary member are skipped and counted; zero surviving pairs is
// an error.
Matrix build_d(const EmbeddingTable& table, const WordPairList& pairs,
               BuildStats* stats = nullptr);

// One column per in-vocabulary token (individual vectors, not differences).
TokenMatrix build_p(const EmbeddingTable& table,
                    const std::vector<std::string>& gendered_words,
                    BuildStats* stats = nullptr);

// First n_top frequency-ranked tokens not in `exclusions`.
TokenMatrix build_y(const EmbeddingTable& table, std::size_t n_top,
                    const std::unordered_set<std::string>& exclusions);

// Scores every candidate by the mean absolute cosine to the columns of D
// and keeps the m best; ties broken by frequency rank. Output order is by
// descending score.
struct ZSelection {
  TokenMatrix selected;
  Vector scores;  // aligned with selected.tokens, non-increasing
};
ZSelection build_z(const EmbeddingTable& table, const Matrix& d,
                   const std::vector<std::string>& candidate_lexicon,
                   std::size_t m);

// Every vocabulary token not in `used`, frequency order.
TokenMatrix build_x(const EmbeddingTable& table,
                    const std::unordered_set<std::string>& used);

struct ScreenResult {
  Matrix reduced;                    // kept columns of the raw input
  std::vector<std::string> tokens;   // kept tokens, original order
  std::vector<std::size_t> kept;     // kept column indices, ascending
  Vector tau;                        // screening utility for every column
};

// Marginal screening: standardize X and Y column-wise (on copies), compute
// tau_k = max_j |x_k . y_j| / rows and keep columns with tau_k >= gamma.
ScreenResult screen(const Matrix& x, const std::vector<std::string>& tokens,
                    const Matrix& y, double gamma);

// The assembled partition for one debiasing run. Matrices not used by the
// chosen method stay empty.
struct RolePartition {
  Matrix d;
  std::vector<std::string> d_tokens;  // all pair members used to build d
  TokenMatrix p;
  TokenMatrix z;
  TokenMatrix y;
  TokenMatrix x;
  BuildStats stats;

  // Throws unless the P/Z/Y/X token sets are pairwise disjoint and none
  // contains a token used to build D.
  void validate() const;
};

struct PartitionOptions {
  std::size_t y_top = 50000;
  std::size_t z_size = 500;  // m
  bool want_p = false;
  bool want_z = false;
};

RolePartition build_partition(const EmbeddingTable& table,
                              const WordPairList& d_pairs,
                              const std::vector<std::string>& p_words,
                              const std::vector<std::string>& z_lexicon,
                              const PartitionOptions& opts);

}  // namespace desip::partition
