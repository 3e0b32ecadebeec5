#include "desip/embedding.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace desip {

namespace {

// Split a line into whitespace-separated fields (space or tab; a trailing
// '\r' from CRLF files is stripped beforehand).
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_value(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto* begin = field.data();
  const auto* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("embedding parse error at line " +
                             std::to_string(line_no) + ": bad number '" +
                             std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw std::runtime_error("embedding parse error at line " +
                             std::to_string(line_no) + ": non-finite value");
  }
  return v;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> words,
                               Eigen::MatrixXd vectors,
                               std::size_t duplicate_count)
    : words_(std::move(words)),
      vectors_(std::move(vectors)),
      duplicate_count_(duplicate_count) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.cols()) {
    throw std::invalid_argument("EmbeddingTable: word/vector count mismatch");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) {
      throw std::invalid_argument("EmbeddingTable: empty token at row " +
                                  std::to_string(i));
    }
    if (!index_.emplace(words_[i], i).second) {
      throw std::invalid_argument("EmbeddingTable: duplicate token '" +
                                  words_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingTable::index_of(
    const std::string& w) const {
  const auto it = index_.find(w);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Eigen::VectorXd> EmbeddingTable::lookup(
    const std::string& w) const {
  const auto idx = index_of(w);
  if (!idx) return std::nullopt;
  return Eigen::VectorXd(vectors_.col(static_cast<Eigen::Index>(*idx)));
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open embedding file: " + path);
  }

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t duplicates = 0;
  Eigen::Index dim = -1;

  std::string line;
  std::size_t line_no = 0;
  while ((limit == 0 || words.size() < limit) && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;  // blank line tolerated
    if (fields.size() < 2) {
      throw std::runtime_error("embedding parse error at line " +
                               std::to_string(line_no) +
                               ": token without coordinates");
    }
    if (dim < 0) {
      dim = static_cast<Eigen::Index>(fields.size()) - 1;
    } else if (static_cast<Eigen::Index>(fields.size()) - 1 != dim) {
      throw std::runtime_error(
          "embedding parse error at line " + std::to_string(line_no) +
          ": expected " + std::to_string(dim) + " coordinates, got " +
          std::to_string(fields.size() - 1));
    }
    std::string token(fields[0]);
    if (seen.count(token)) {
      ++duplicates;  // keep the earlier (more frequent) row
      continue;
    }
    seen.emplace(token, words.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      values.push_back(parse_value(fields[i], line_no));
    }
    words.push_back(std::move(token));
  }
  if (dim < 0) dim = 0;

  Eigen::MatrixXd mat(dim, static_cast<Eigen::Index>(words.size()));
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      mat(r, static_cast<Eigen::Index>(w)) = values[w * dim + r];
    }
  }
  return EmbeddingTable(std::move(words), std::move(mat), duplicates);
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write embedding file: " + path);
  }
  std::string line;
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    line.clear();
    line += table.word(i);
    const auto col = table.vector(i);
    for (Eigen::Index r = 0; r < table.dim(); ++r) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), col(r),
                                     std::chars_format::general, 9);
      line += ' ';
      line.append(buf, res.ptr);
    }
    line += '\n';
    out << line;
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

}  // namespace desip
