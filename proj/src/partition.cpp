#include "desip/partition.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "desip/linalg.hpp"

namespace desip::partition {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word list: " + path);
  return in;
}

}  // namespace

std::vector<std::string> load_token_list(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    tokens.push_back(t);
  }
  return tokens;
}

WordPairList load_pair_list(const std::string& path) {
  auto in = open_or_throw(path);
  WordPairList out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected male<TAB>female");
    }
    std::pair<std::string, std::string> pair{trim(t.substr(0, tab)),
                                             trim(t.substr(tab + 1))};
    if (pair.first.empty() || pair.second.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": empty token in pair");
    }
    if (!seen.insert(pair).second) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate pair");
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

Matrix build_d(const EmbeddingTable& table, const WordPairList& pairs,
               BuildStats* stats) {
  std::vector<Eigen::Index> male, female;
  for (const auto& [m, f] : pairs.pairs) {
    const auto mi = table.index_of(m);
    const auto fi = table.index_of(f);
    if (!mi || !fi) {
      if (stats) ++stats->skipped_oov;
      continue;
    }
    male.push_back(static_cast<Eigen::Index>(*mi));
    female.push_back(static_cast<Eigen::Index>(*fi));
  }
  if (male.empty()) {
    throw std::runtime_error("build_d: no pair survived vocabulary lookup");
  }
  Matrix d(table.dim(), static_cast<Eigen::Index>(male.size()));
  for (std::size_t j = 0; j < male.size(); ++j) {
    d.col(static_cast<Eigen::Index>(j)) =
        table.matrix().col(male[j]) - table.matrix().col(female[j]);
  }
  return d;
}

TokenMatrix build_p(const EmbeddingTable& table,
                    const std::vector<std::string>& gendered_words,
                    BuildStats* stats) {
  if (gendered_words.empty()) {
    throw std::runtime_error("build_p: empty word list");
  }
  TokenMatrix out;
  std::vector<Eigen::Index> idx;
  std::unordered_set<std::string> dedup;
  for (const auto& w : gendered_words) {
    if (!dedup.insert(w).second) continue;
    const auto i = table.index_of(w);
    if (!i) {
      if (stats) ++stats->skipped_oov;
      continue;
    }
    idx.push_back(static_cast<Eigen::Index>(*i));
    out.tokens.push_back(w);
  }
  if (idx.empty()) {
    throw std::runtime_error("build_p: every token is out of vocabulary");
  }
  out.m.resize(table.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.m.col(static_cast<Eigen::Index>(j)) = table.matrix().col(idx[j]);
  }
  return out;
}

TokenMatrix build_y(const EmbeddingTable& table, std::size_t n_top,
                    const std::unordered_set<std::string>& exclusions) {
  if (n_top > table.size()) {
    throw std::runtime_error("build_y: n_top exceeds vocabulary size");
  }
  TokenMatrix out;
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < table.size() && idx.size() < n_top; ++i) {
    if (exclusions.count(table.word(i))) continue;
    idx.push_back(static_cast<Eigen::Index>(i));
    out.tokens.push_back(table.word(i));
  }
  out.m.resize(table.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.m.col(static_cast<Eigen::Index>(j)) = table.matrix().col(idx[j]);
  }
  return out;
}

ZSelection build_z(const EmbeddingTable& table, const Matrix& d,
                   const std::vector<std::string>& candidate_lexicon,
                   std::size_t m) {
  if (d.cols() == 0) throw std::runtime_error("build_z: empty D");
  std::vector<std::size_t> candidates;
  std::unordered_set<std::string> dedup;
  for (const auto& w : candidate_lexicon) {
    if (!dedup.insert(w).second) continue;
    if (const auto i = table.index_of(w)) candidates.push_back(*i);
  }
  if (candidates.empty()) {
    throw std::runtime_error(
        "build_z: candidate lexicon has no vocabulary overlap");
  }
  if (m > candidates.size()) {
    throw std::runtime_error("build_z: m exceeds usable candidate count");
  }

  // Unit-normalize D's columns once; zero columns contribute 0 to a score.
  Matrix dn = d;
  for (Eigen::Index j = 0; j < dn.cols(); ++j) {
    const double n = dn.col(j).norm();
    if (n > 0.0) dn.col(j) /= n;
  }

  struct Scored {
    double score;
    std::size_t row;  // frequency rank, tie-break
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto row : candidates) {
    const auto v = table.vector(row);
    const double vn = v.norm();
    double score = 0.0;
    if (vn > 0.0) {
      score = (dn.transpose() * (v / vn)).array().abs().mean();
    }
    scored.push_back({score, row});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.row < b.row;
                   });

  ZSelection out;
  out.selected.m.resize(table.dim(), static_cast<Eigen::Index>(m));
  out.scores.resize(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    out.selected.tokens.push_back(table.word(scored[j].row));
    out.selected.m.col(static_cast<Eigen::Index>(j)) =
        table.vector(scored[j].row);
    out.scores(static_cast<Eigen::Index>(j)) = scored[j].score;
  }
  return out;
}

TokenMatrix build_x(const EmbeddingTable& table,
                    const std::unordered_set<std::string>& used) {
  TokenMatrix out;
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (used.count(table.word(i))) continue;
    idx.push_back(static_cast<Eigen::Index>(i));
    out.tokens.push_back(table.word(i));
  }
  if (idx.empty()) {
    throw std::runtime_error("build_x: no vocabulary remainder");
  }
  out.m.resize(table.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.m.col(static_cast<Eigen::Index>(j)) = table.matrix().col(idx[j]);
  }
  return out;
}

ScreenResult screen(const Matrix& x, const std::vector<std::string>& tokens,
                    const Matrix& y, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::runtime_error("screen: gamma must lie in [0, 1]");
  }
  if (x.rows() != y.rows()) {
    throw std::runtime_error("screen: row counts differ");
  }
  if (tokens.size() != static_cast<std::size_t>(x.cols())) {
    throw std::runtime_error("screen: token list does not match matrix");
  }
  const double n = double(x.rows());
  const auto ys = linalg::standardize_columns(y);

  // Blocked so the p x d product is never materialized whole.
  const Eigen::Index x_block = 2048;
  const Eigen::Index y_block = 4096;
  ScreenResult out;
  out.tau = Vector::Zero(x.cols());
  for (Eigen::Index x0 = 0; x0 < x.cols(); x0 += x_block) {
    const Eigen::Index xn = std::min(x_block, x.cols() - x0);
    const auto xs = linalg::standardize_columns(x.middleCols(x0, xn));
    Vector tau_block = Vector::Zero(xn);
    for (Eigen::Index y0 = 0; y0 < y.cols(); y0 += y_block) {
      const Eigen::Index yn = std::min(y_block, y.cols() - y0);
      const Matrix prod =
          xs.data.transpose() * ys.data.middleCols(y0, yn);  // xn x yn
      tau_block =
          tau_block.cwiseMax(prod.array().abs().rowwise().maxCoeff().matrix());
    }
    out.tau.segment(x0, xn) = tau_block / n;
  }

  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    if (out.tau(k) >= gamma) out.kept.push_back(static_cast<std::size_t>(k));
  }
  if (out.kept.empty()) {
    throw std::runtime_error(
        "screen: no column passed gamma=" + std::to_string(gamma) +
        "; lower the screening threshold");
  }
  out.reduced.resize(x.rows(), static_cast<Eigen::Index>(out.kept.size()));
  out.tokens.reserve(out.kept.size());
  for (std::size_t j = 0; j < out.kept.size(); ++j) {
    out.reduced.col(static_cast<Eigen::Index>(j)) =
        x.col(static_cast<Eigen::Index>(out.kept[j]));
    out.tokens.push_back(tokens[out.kept[j]]);
  }
  return out;
}

void RolePartition::validate() const {
  const std::vector<const std::vector<std::string>*> lists = {
      &p.tokens, &z.tokens, &y.tokens, &x.tokens};
  const std::vector<std::string> names = {"P", "Z", "Y", "X"};
  std::unordered_set<std::string> d_set(d_tokens.begin(), d_tokens.end());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (const auto& t : *lists[i]) {
      if (d_set.count(t)) {
        throw std::runtime_error("partition: token '" + t + "' in " +
                                 names[i] + " also builds D");
      }
      if (!seen.insert(t).second) {
        throw std::runtime_error("partition: token '" + t +
                                 "' appears in two role matrices");
      }
    }
  }
}

RolePartition build_partition(const EmbeddingTable& table,
                              const WordPairList& d_pairs,
                              const std::vector<std::string>& p_words,
                              const std::vector<std::string>& z_lexicon,
                              const PartitionOptions& opts) {
  RolePartition part;
  part.d = build_d(table, d_pairs, &part.stats);
  std::unordered_set<std::string> used;
  for (const auto& [m, f] : d_pairs.pairs) {
    if (table.contains(m) && table.contains(f)) {
      part.d_tokens.push_back(m);
      part.d_tokens.push_back(f);
      used.insert(m);
      used.insert(f);
    }
  }

  if (opts.want_p) {
    std::vector<std::string> filtered;
    for (const auto& w : p_words) {
      if (!used.count(w)) filtered.push_back(w);
    }
    part.p = build_p(table, filtered, &part.stats);
    for (const auto& t : part.p.tokens) used.insert(t);
  }

  if (opts.want_z) {
    std::vector<std::string> filtered;
    for (const auto& w : z_lexicon) {
      if (!used.count(w)) filtered.push_back(w);
    }
    const auto sel = build_z(table, part.d, filtered, opts.z_size);
    part.z = sel.selected;
    for (const auto& t : part.z.tokens) used.insert(t);
  }

  const std::size_t y_top = std::min(opts.y_top, table.size());
  part.y = build_y(table, y_top, used);
  for (const auto& t : part.y.tokens) used.insert(t);

  part.x = build_x(table, used);
  part.validate();
  return part;
}

}  // namespace desip::partition
