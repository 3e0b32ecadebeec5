#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

// Loading, querying and saving word embeddings in the plain text format:
// one `token v1 ... vN` line per word, whitespace separated, most frequent
// word first. Tokens are matched byte-exactly; no case folding.

namespace desip {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // `vectors` holds one word per column (dim x vocab), aligned with `words`.
  EmbeddingTable(std::vector<std::string> words, Eigen::MatrixXd vectors,
                 std::size_t duplicate_count = 0);

  std::size_t size() const { return words_.size(); }
  Eigen::Index dim() const { return vectors_.rows(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(std::size_t i) const { return words_[i]; }

  // Column i is the vector of words()[i]; row order = file order
  // (frequency rank).
  const Eigen::MatrixXd& matrix() const { return vectors_; }
  Eigen::MatrixXd::ConstColXpr vector(std::size_t i) const {
    return vectors_.col(static_cast<Eigen::Index>(i));
  }

  bool contains(const std::string& w) const { return index_.count(w) > 0; }
  std::optional<std::size_t> index_of(const std::string& w) const;
  std::optional<Eigen::VectorXd> lookup(const std::string& w) const;

  // Duplicate tokens dropped while loading (first occurrence kept).
  std::size_t duplicate_count() const { return duplicate_count_; }

 private:
  std::vector<std::string> words_;
  Eigen::MatrixXd vectors_;  // dim x vocab
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicate_count_ = 0;
};

// Parse up to `limit` lines (0 = all). The dimension is inferred from the
// first line; a line with a different field count, a non-finite value or an
// unparsable number raises std::runtime_error naming the line. Duplicate
// tokens keep their first row and bump duplicate_count().
EmbeddingTable load_embeddings(const std::string& path, std::size_t limit = 0);

// Writes LF-terminated lines with enough digits that a reload agrees to
// 1e-6 absolute.
void save_embeddings(const EmbeddingTable& table, const std::string& path);

}  // namespace desip
