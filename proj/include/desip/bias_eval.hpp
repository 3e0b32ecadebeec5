#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "desip/embedding.hpp"

// Gender-bias metrics: projection bias, the SemBias analogy benchmark,
// biased-word clustering, neighborhood-bias correlations, profession bias,
// classifier leakage, and the word embedding association test (WEAT).

namespace desip::bias_eval {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// vec(he) - vec(she). Throws when either token is missing. A zero
// difference is legal but reported through `degenerate` when requested.
Vector gender_direction(const EmbeddingTable& table,
                        bool* degenerate = nullptr);

// Rank `pool` by dot product with the original table's gender direction;
// the n most positive are male-biased, the n most negative female-biased.
// Ties broken by frequency rank; the two lists never overlap.
struct BiasedWords {
  std::vector<std::string> male;
  std::vector<std::string> female;
};
BiasedWords top_biased_words(const EmbeddingTable& original,
                             std::size_t n_per_side,
                             const std::vector<std::string>& pool);

// Mean |vec(w) . (he - she)| over in-vocabulary words, direction taken
// from the evaluated table itself. `skipped` counts OOV words.
double bias_by_projection(const EmbeddingTable& table,
                          const std::vector<std::string>& words,
                          std::size_t* skipped = nullptr);

// One analogy instance: four candidate pairs, one marked definitional.
struct SemBiasInstance {
  std::array<std::pair<std::string, std::string>, 4> candidates;
  int definitional = 0;   // index of the gender-definitional pair
  bool subset = false;    // member of the held-out subset
};

// TSV: `a:b<TAB>c:d<TAB>e:f<TAB>g:h<TAB>index` per line; the last
// `subset_tail` lines form the subset.
std::vector<SemBiasInstance> load_sembias(const std::string& path,
                                          std::size_t subset_tail = 40);

struct SemBiasAccuracy {
  double full = 0.0;
  double subset = 0.0;
  std::size_t used_full = 0;
  std::size_t used_subset = 0;
  std::size_t skipped = 0;  // instances with an OOV token
};
// Select argmax over candidates of cosine(vec(a) - vec(b), he - she);
// accuracy = fraction where the selection is the definitional pair.
SemBiasAccuracy sembias(const EmbeddingTable& table,
                        const std::vector<SemBiasInstance>& instances);

// Lloyd K-means (K=2, k-means++ init, 10 restarts, best inertia) over the
// two lists' vectors; returns the best label/cluster agreement, in
// [0.5, 1].
double cluster_accuracy(const EmbeddingTable& table,
                        const std::vector<std::string>& male,
                        const std::vector<std::string>& female,
                        std::uint64_t seed);

// Fraction of male-labeled words among the K nearest labeled neighbors of
// `word` (cosine in `table`, self excluded).
double neighborhood_bias(
    const EmbeddingTable& table, const std::string& word,
    const std::unordered_map<std::string, bool>& male_labels, std::size_t k);

// Bulk form of the same metric for many targets (identical values, one
// GEMM pass). Targets missing from the table get NaN.
std::vector<double> neighborhood_bias_bulk(
    const EmbeddingTable& table, const std::vector<std::string>& targets,
    const std::vector<std::string>& pool, const std::vector<bool>& pool_male,
    std::size_t k);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Pearson r between original-table projection bias (signed dot with the
// original he - she) and neighborhood bias in the evaluated table, over
// `words`. Neighbor labels come from the sign of the original projection
// over the `labeled_pool`.
double bias_correlation(const EmbeddingTable& original,
                        const EmbeddingTable& evaluated,
                        const std::vector<std::string>& words,
                        const BiasedWords& labeled_pool, std::size_t k);

// Pearson r between neighborhood bias computed in the original table and
// in the evaluated table, restricted to the profession list.
double profession_correlation(const EmbeddingTable& original,
                              const EmbeddingTable& evaluated,
                              const std::vector<std::string>& professions,
                              const BiasedWords& labeled_pool, std::size_t k);

// Train a linear hinge-loss classifier (L2-regularized primal subgradient
// descent, fixed epoch budget) on n_train_per_side sampled words per
// gender; returns held-out accuracy over the remaining words.
double classify_bias(const EmbeddingTable& table,
                     const std::vector<std::string>& male,
                     const std::vector<std::string>& female,
                     std::size_t n_train_per_side, std::uint64_t seed);

struct WeatResult {
  double effect_size = 0.0;       // Cohen's d over differential association
  double p_value = 1.0;           // one-sided, greater
  std::uint64_t n_permutations = 0;
  bool exact = false;             // full enumeration vs sampled
  bool degenerate = false;        // zero-variance association
  std::size_t skipped_oov = 0;
  std::size_t truncated = 0;      // targets dropped to equalize |X| and |Y|
};

// Permutation test of differential cosine association between target sets
// X/Y and attribute sets A/B. Exact enumeration when C(|X|+|Y|, |X|) fits
// in max_permutations, otherwise that many sampled partitions. After OOV
// filtering the longer target set is truncated to the shorter one's size.
WeatResult weat(const EmbeddingTable& table,
                const std::vector<std::string>& targets_x,
                const std::vector<std::string>& targets_y,
                const std::vector<std::string>& attrs_a,
                const std::vector<std::string>& attrs_b,
                std::uint64_t max_permutations, std::uint64_t seed);

// Centered 2-D principal-component coordinates of the given words in
// `table` (the visualization payload for biased-word clouds).
struct Pca2d {
  std::vector<std::string> words;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<int> label;  // 1 = male list, 0 = female list
};
Pca2d pca_payload(const EmbeddingTable& table, const BiasedWords& pool);

}  // namespace desip::bias_eval
