#pragma once

#include <string>
#include <vector>

#include "desip/embedding.hpp"

// Word-similarity benchmarking and the semantic-preservation probe that
// checks how much of a word's original meaning survives debiasing.

namespace desip::semantic_eval {

struct SimilarityDataset {
  std::string name;
  struct Entry {
    std::string word1;
    std::string word2;
    double score;
  };
  std::vector<Entry> entries;
};

// `word1<sep>word2<sep>score` per line, sep in {tab, comma, spaces}. A
// header line (non-numeric score field) is skipped automatically.
SimilarityDataset load_similarity_dataset(const std::string& path,
                                          const std::string& name);

// Spearman's rank correlation: Pearson over mid-ranks (ties averaged).
// Throws on constant input.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct SimilarityScore {
  double rho = 0.0;
  double coverage = 0.0;  // used / total entries
  std::size_t used = 0;
};

// Spearman between model cosine similarities and human scores over the
// entries whose words are both in vocabulary.
SimilarityScore evaluate_similarity(const EmbeddingTable& table,
                                    const SimilarityDataset& ds);

struct PreservationResult {
  double mean = 0.0;
  double standard_error = 0.0;  // sample std / sqrt(n)
  std::vector<std::string> words;
  std::vector<double> values;  // |vec_orig(anchor) . vec_eval(word)|
};

// Take the n_related words most cosine-similar to `anchor` in the original
// table (anchor itself excluded); report statistics of the absolute dot
// product between the anchor's original vector and each word's vector in
// the evaluated table. Evaluating the original table itself gives the
// oracle ceiling.
PreservationResult semantic_preservation(const EmbeddingTable& original,
                                         const EmbeddingTable& evaluated,
                                         const std::string& anchor,
                                         std::size_t n_related);

}  // namespace desip::semantic_eval
