#include "desip/semantic_eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "desip/linalg.hpp"

namespace desip::semantic_eval {

namespace {

std::vector<std::string> split_any(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == '\t' || c == ',' || c == ' ') {
      if (!cur.empty()) fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) fields.push_back(std::move(cur));
  return fields;
}

bool parse_score(const std::string& s, double* out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() &&
         std::isfinite(*out);
}

}  // namespace

SimilarityDataset load_similarity_dataset(const std::string& path,
                                          const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open similarity file: " + path);
  SimilarityDataset ds;
  ds.name = name;
  std::string line;
  bool first_content = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_any(line);
    if (fields.size() < 3) {
      if (first_content) {  // tolerate a short header line
        first_content = false;
        continue;
      }
      throw std::runtime_error(path + ": malformed line '" + line + "'");
    }
    double score = 0.0;
    if (!parse_score(fields[2], &score)) {
      if (first_content) {  // header with non-numeric score field
        first_content = false;
        continue;
      }
      throw std::runtime_error(path + ": non-numeric score in '" + line + "'");
    }
    first_content = false;
    ds.entries.push_back({fields[0], fields[1], score});
  }
  if (ds.entries.empty()) {
    throw std::runtime_error(path + ": no parseable entries");
  }
  return ds;
}

namespace {

// Mid-ranks (1-based, ties get the average of their positions).
std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson_of(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw std::runtime_error("spearman: constant series, undefined");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::runtime_error("spearman: need equal lengths >= 2");
  }
  return pearson_of(midranks(a), midranks(b));
}

SimilarityScore evaluate_similarity(const EmbeddingTable& table,
                                    const SimilarityDataset& ds) {
  std::vector<double> model, human;
  for (const auto& e : ds.entries) {
    const auto v1 = table.lookup(e.word1);
    const auto v2 = table.lookup(e.word2);
    if (!v1 || !v2 || v1->norm() == 0.0 || v2->norm() == 0.0) continue;
    model.push_back(linalg::cosine(*v1, *v2));
    human.push_back(e.score);
  }
  if (model.size() < 2) {
    throw std::runtime_error("evaluate_similarity: fewer than 2 usable entries in " +
                             ds.name);
  }
  SimilarityScore out;
  out.used = model.size();
  out.coverage = double(model.size()) / double(ds.entries.size());
  out.rho = spearman(model, human);
  return out;
}

PreservationResult semantic_preservation(const EmbeddingTable& original,
                                         const EmbeddingTable& evaluated,
                                         const std::string& anchor,
                                         std::size_t n_related) {
  const auto anchor_vec = original.lookup(anchor);
  if (!anchor_vec) {
    throw std::runtime_error("semantic_preservation: anchor '" + anchor +
                             "' not in vocabulary");
  }
  if (anchor_vec->norm() == 0.0) {
    throw std::runtime_error("semantic_preservation: anchor has zero vector");
  }
  std::unordered_set<std::string> exclude{anchor};
  const auto related = linalg::knn(original.matrix(), original.words(),
                                   *anchor_vec, n_related, &exclude);

  PreservationResult out;
  for (const auto& w : related) {
    const auto v = evaluated.lookup(w);
    if (!v) continue;  // evaluated table may trail the original vocabulary
    out.words.push_back(w);
    out.values.push_back(std::abs(anchor_vec->dot(*v)));
  }
  if (out.values.empty()) {
    throw std::runtime_error(
        "semantic_preservation: no related word in evaluated table");
  }
  double sum = 0.0;
  for (const double v : out.values) sum += v;
  out.mean = sum / double(out.values.size());
  double ss = 0.0;
  for (const double v : out.values) ss += (v - out.mean) * (v - out.mean);
  const double n = double(out.values.size());
  out.standard_error =
      out.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return out;
}

}  // namespace desip::semantic_eval
