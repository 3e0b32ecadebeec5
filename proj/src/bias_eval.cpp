#include "desip/bias_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "desip/linalg.hpp"
#include "desip/rng.hpp"

namespace desip::bias_eval {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Vector require_vector(const EmbeddingTable& table, const std::string& word,
                      const char* who) {
  const auto v = table.lookup(word);
  if (!v) {
    throw std::runtime_error(std::string(who) + ": '" + word +
                             "' not in vocabulary");
  }
  return *v;
}

// Candidate pool for neighborhood ranking: in-vocabulary, deduplicated,
// ordered by frequency rank so score ties resolve deterministically.
struct NeighborPool {
  Matrix normalized;             // unit columns
  std::vector<std::size_t> rows;  // table row per column
  std::vector<bool> male;
};

NeighborPool make_pool(const EmbeddingTable& table,
                       const std::vector<std::string>& pool,
                       const std::vector<bool>& pool_male) {
  struct Entry {
    std::size_t row;
    bool male;
  };
  std::vector<Entry> entries;
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto idx = table.index_of(pool[i]);
    if (!idx || !seen.insert(*idx).second) continue;
    entries.push_back({*idx, pool_male[i]});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.row < b.row; });

  NeighborPool out;
  out.normalized.resize(table.dim(), static_cast<Eigen::Index>(entries.size()));
  Eigen::Index j = 0;
  for (const auto& e : entries) {
    Vector v = table.vector(e.row);
    const double n = v.norm();
    if (n == 0.0) continue;  // zero vectors can never be ranked by cosine
    out.normalized.col(j++) = v / n;
    out.rows.push_back(e.row);
    out.male.push_back(e.male);
  }
  out.normalized.conservativeResize(Eigen::NoChange, j);
  return out;
}

// Fraction of male columns among the k best scores; ties by pool position
// (= frequency rank). skip < 0 means no column is excluded.
double male_fraction_from_scores(const Vector& scores,
                                 const std::vector<bool>& male, std::size_t k,
                                 long skip) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (skip >= 0) order.erase(order.begin() + skip);
  if (k > order.size()) {
    throw std::runtime_error("neighborhood_bias: labeled pool smaller than K");
  }
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores(a) != scores(b)) return scores(a) > scores(b);
                      return a < b;
                    });
  std::size_t males = 0;
  for (std::size_t i = 0; i < k; ++i) males += male[order[i]] ? 1 : 0;
  return double(males) / double(k);
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k,
                              std::uint64_t cap) {
  // C(n, k) clamped to cap+1; callers only ever compare against <= cap.
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t factor = n - i + 1;
    if (result > UINT64_MAX / factor) return cap + 1;  // would overflow
    result = result * factor / i;  // exact: product of i consecutive terms
    if (result > cap) return cap + 1;
  }
  return result;
}

}  // namespace

Vector gender_direction(const EmbeddingTable& table, bool* degenerate) {
  const Vector he = require_vector(table, "he", "gender_direction");
  const Vector she = require_vector(table, "she", "gender_direction");
  Vector dir = he - she;
  if (degenerate) *degenerate = (dir.norm() == 0.0);
  return dir;
}

BiasedWords top_biased_words(const EmbeddingTable& original,
                             std::size_t n_per_side,
                             const std::vector<std::string>& pool) {
  const Vector dir = gender_direction(original);
  struct Entry {
    double dot;
    std::size_t row;
  };
  std::vector<Entry> entries;
  std::unordered_set<std::size_t> seen;
  for (const auto& w : pool) {
    const auto idx = original.index_of(w);
    if (!idx || !seen.insert(*idx).second) continue;
    entries.push_back({original.vector(*idx).dot(dir), *idx});
  }
  if (entries.size() < 2 * n_per_side) {
    throw std::runtime_error("top_biased_words: pool smaller than 2n");
  }

  std::vector<std::size_t> by_desc(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) by_desc[i] = i;
  std::sort(by_desc.begin(), by_desc.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].dot != entries[b].dot) return entries[a].dot > entries[b].dot;
    return entries[a].row < entries[b].row;
  });

  BiasedWords out;
  std::unordered_set<std::size_t> taken;
  for (std::size_t i = 0; i < n_per_side; ++i) {
    out.male.push_back(original.word(entries[by_desc[i]].row));
    taken.insert(by_desc[i]);
  }
  std::vector<std::size_t> by_asc(by_desc);
  std::sort(by_asc.begin(), by_asc.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].dot != entries[b].dot) return entries[a].dot < entries[b].dot;
    return entries[a].row < entries[b].row;
  });
  for (std::size_t i = 0; out.female.size() < n_per_side; ++i) {
    if (taken.count(by_asc[i])) continue;
    out.female.push_back(original.word(entries[by_asc[i]].row));
  }
  return out;
}

double bias_by_projection(const EmbeddingTable& table,
                          const std::vector<std::string>& words,
                          std::size_t* skipped) {
  const Vector dir = gender_direction(table);
  double sum = 0.0;
  std::size_t used = 0, oov = 0;
  for (const auto& w : words) {
    const auto idx = table.index_of(w);
    if (!idx) {
      ++oov;
      continue;
    }
    sum += std::abs(table.vector(*idx).dot(dir));
    ++used;
  }
  if (skipped) *skipped = oov;
  if (used == 0) {
    throw std::runtime_error("bias_by_projection: no usable word");
  }
  return sum / double(used);
}

std::vector<SemBiasInstance> load_sembias(const std::string& path,
                                          std::size_t subset_tail) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open SemBias file: " + path);
  std::vector<SemBiasInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 5) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 pairs and an index");
    }
    SemBiasInstance inst;
    for (int i = 0; i < 4; ++i) {
      const auto colon = fields[i].find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == fields[i].size()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": candidate must be word1:word2");
      }
      inst.candidates[i] = {fields[i].substr(0, colon),
                            fields[i].substr(colon + 1)};
    }
    try {
      inst.definitional = std::stoi(fields[4]);
    } catch (const std::exception&) {
      inst.definitional = -1;
    }
    if (inst.definitional < 0 || inst.definitional > 3) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": definitional index out of range");
    }
    out.push_back(inst);
  }
  const std::size_t n = out.size();
  for (std::size_t i = n > subset_tail ? n - subset_tail : 0; i < n; ++i) {
    out[i].subset = true;
  }
  return out;
}

SemBiasAccuracy sembias(const EmbeddingTable& table,
                        const std::vector<SemBiasInstance>& instances) {
  bool degenerate = false;
  const Vector dir = gender_direction(table, &degenerate);
  if (degenerate) {
    throw std::runtime_error("sembias: degenerate he-she direction");
  }
  SemBiasAccuracy acc;
  std::size_t correct_full = 0, correct_subset = 0;
  for (const auto& inst : instances) {
    std::array<Vector, 4> diffs;
    bool oov = false;
    for (int i = 0; i < 4 && !oov; ++i) {
      const auto a = table.lookup(inst.candidates[i].first);
      const auto b = table.lookup(inst.candidates[i].second);
      if (!a || !b) {
        oov = true;
        break;
      }
      diffs[i] = *a - *b;
    }
    if (oov) {
      ++acc.skipped;
      continue;
    }
    int best = 0;
    double best_score = -2.0;
    for (int i = 0; i < 4; ++i) {
      // A zero difference cannot be in analogy to anything; score below
      // any reachable cosine.
      const double score =
          diffs[i].norm() == 0.0 ? -2.0 : linalg::cosine(diffs[i], dir);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    const bool hit = (best == inst.definitional);
    ++acc.used_full;
    correct_full += hit ? 1 : 0;
    if (inst.subset) {
      ++acc.used_subset;
      correct_subset += hit ? 1 : 0;
    }
  }
  if (acc.used_full == 0) {
    throw std::runtime_error("sembias: every instance skipped");
  }
  acc.full = double(correct_full) / double(acc.used_full);
  acc.subset = acc.used_subset > 0
                   ? double(correct_subset) / double(acc.used_subset)
                   : 0.0;
  return acc;
}

namespace {

struct KMeansRun {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun lloyd_two_means(const Matrix& points, RngEngine& rng) {
  const Eigen::Index n = points.cols();
  // k-means++ seeding for K=2: uniform first center, then squared-distance
  // weighted second.
  const Eigen::Index c0 = static_cast<Eigen::Index>(
      uniform_index(rng, static_cast<std::uint64_t>(n)));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i) = (points.col(i) - points.col(c0)).squaredNorm();
  }
  const double total = d2.sum();
  Eigen::Index c1 = c0;
  if (total > 0.0) {
    const double r = uniform_unit(rng) * total;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cum += d2(i);
      if (cum >= r) {
        c1 = i;
        break;
      }
    }
    if (c1 == c0) {  // numerical edge of the cumulative scan
      c1 = (c0 + 1) % n;
    }
  } else {
    c1 = (c0 + 1) % n;
  }

  Matrix centers(points.rows(), 2);
  centers.col(0) = points.col(c0);
  centers.col(1) = points.col(c1);
  KMeansRun run;
  run.assignment.assign(static_cast<std::size_t>(n), 0);

  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double da = (points.col(i) - centers.col(0)).squaredNorm();
      const double db = (points.col(i) - centers.col(1)).squaredNorm();
      const int a = db < da ? 1 : 0;
      if (a != run.assignment[static_cast<std::size_t>(i)]) {
        run.assignment[static_cast<std::size_t>(i)] = a;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(points.rows(), 2);
    Eigen::Index counts[2] = {0, 0};
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = run.assignment[static_cast<std::size_t>(i)];
      sums.col(a) += points.col(i);
      ++counts[a];
    }
    for (int c = 0; c < 2; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster with the point farthest from the other
        // center.
        Eigen::Index far = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
              (points.col(i) - centers.col(1 - c)).squaredNorm();
          if (d > best) {
            best = d;
            far = i;
          }
        }
        centers.col(c) = points.col(far);
        changed = true;
      } else {
        centers.col(c) = sums.col(c) / double(counts[c]);
      }
    }
    if (!changed && iter > 0) break;
  }

  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia +=
        (points.col(i) -
         centers.col(run.assignment[static_cast<std::size_t>(i)]))
            .squaredNorm();
  }
  return run;
}

}  // namespace

double cluster_accuracy(const EmbeddingTable& table,
                        const std::vector<std::string>& male,
                        const std::vector<std::string>& female,
                        std::uint64_t seed) {
  if (male.empty() || female.empty()) {
    throw std::runtime_error("cluster_accuracy: empty label list");
  }
  const std::size_t n = male.size() + female.size();
  Matrix points(table.dim(), static_cast<Eigen::Index>(n));
  std::vector<bool> is_male(n);
  Eigen::Index j = 0;
  for (const auto& w : male) {
    points.col(j) = require_vector(table, w, "cluster_accuracy");
    is_male[static_cast<std::size_t>(j++)] = true;
  }
  for (const auto& w : female) {
    points.col(j) = require_vector(table, w, "cluster_accuracy");
    is_male[static_cast<std::size_t>(j++)] = false;
  }

  bool found_distinct = false;
  for (Eigen::Index i = 1; i < points.cols() && !found_distinct; ++i) {
    found_distinct = (points.col(i) != points.col(0));
  }
  if (!found_distinct) {
    throw std::runtime_error("cluster_accuracy: fewer than 2 distinct vectors");
  }

  KMeansRun best;
  for (std::uint64_t restart = 0; restart < 10; ++restart) {
    auto rng = make_rng(derive_seed(seed, restart + 1));
    KMeansRun run = lloyd_two_means(points, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool cluster_male = best.assignment[i] == 0;
    agree += (cluster_male == is_male[i]) ? 1 : 0;
  }
  const double frac = double(agree) / double(n);
  return std::max(frac, 1.0 - frac);
}

double neighborhood_bias(
    const EmbeddingTable& table, const std::string& word,
    const std::unordered_map<std::string, bool>& male_labels, std::size_t k) {
  std::vector<std::string> pool;
  std::vector<bool> male;
  pool.reserve(male_labels.size());
  for (const auto& [token, m] : male_labels) {
    pool.push_back(token);
    male.push_back(m);
  }
  const auto values = neighborhood_bias_bulk(table, {word}, pool, male, k);
  if (std::isnan(values[0])) {
    throw std::runtime_error("neighborhood_bias: '" + word +
                             "' not rankable (missing or zero vector)");
  }
  return values[0];
}

std::vector<double> neighborhood_bias_bulk(
    const EmbeddingTable& table, const std::vector<std::string>& targets,
    const std::vector<std::string>& pool, const std::vector<bool>& pool_male,
    std::size_t k) {
  if (pool.size() != pool_male.size()) {
    throw std::runtime_error("neighborhood_bias: pool/label size mismatch");
  }
  const NeighborPool np = make_pool(table, pool, pool_male);
  if (np.rows.empty()) {
    throw std::runtime_error("neighborhood_bias: empty labeled pool");
  }

  std::unordered_map<std::size_t, long> row_to_col;
  for (std::size_t c = 0; c < np.rows.size(); ++c) {
    row_to_col.emplace(np.rows[c], static_cast<long>(c));
  }

  std::vector<double> out(targets.size(), kNan);
  const Eigen::Index block = 4096;
  std::vector<std::size_t> live;       // positions into `targets`
  std::vector<long> skip_col;
  Matrix queries(table.dim(), block);
  for (std::size_t start = 0; start < targets.size();
       start += static_cast<std::size_t>(block)) {
    const std::size_t stop =
        std::min(targets.size(), start + static_cast<std::size_t>(block));
    live.clear();
    skip_col.clear();
    Eigen::Index q = 0;
    for (std::size_t i = start; i < stop; ++i) {
      const auto idx = table.index_of(targets[i]);
      if (!idx) continue;
      Vector v = table.vector(*idx);
      const double n = v.norm();
      if (n == 0.0) continue;
      queries.col(q++) = v / n;
      live.push_back(i);
      const auto it = row_to_col.find(*idx);
      skip_col.push_back(it == row_to_col.end() ? -1 : it->second);
    }
    if (q == 0) continue;
    const Matrix scores = np.normalized.transpose() * queries.leftCols(q);
    for (Eigen::Index c = 0; c < q; ++c) {
      out[live[static_cast<std::size_t>(c)]] = male_fraction_from_scores(
          scores.col(c), np.male, k, skip_col[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::runtime_error("pearson: need two series of equal length >= 2");
  }
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
    throw std::runtime_error("pearson: constant series, correlation undefined");
  }
  return sab / std::sqrt(saa * sbb);
}

namespace {

struct LabeledSeries {
  std::vector<double> a;
  std::vector<double> b;
};

std::vector<double> signed_projection(const EmbeddingTable& table,
                                      const std::vector<std::string>& words) {
  const Vector dir = gender_direction(table);
  std::vector<double> out(words.size(), kNan);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (const auto idx = table.index_of(words[i])) {
      out[i] = table.vector(*idx).dot(dir);
    }
  }
  return out;
}

void pool_with_labels(const BiasedWords& pool, std::vector<std::string>* out,
                      std::vector<bool>* male) {
  out->reserve(pool.male.size() + pool.female.size());
  for (const auto& w : pool.male) {
    out->push_back(w);
    male->push_back(true);
  }
  for (const auto& w : pool.female) {
    out->push_back(w);
    male->push_back(false);
  }
}

}  // namespace

double bias_correlation(const EmbeddingTable& original,
                        const EmbeddingTable& evaluated,
                        const std::vector<std::string>& words,
                        const BiasedWords& labeled_pool, std::size_t k) {
  std::vector<std::string> pool;
  std::vector<bool> male;
  pool_with_labels(labeled_pool, &pool, &male);

  const auto proj = signed_projection(original, words);
  const auto nb = neighborhood_bias_bulk(evaluated, words, pool, male, k);
  LabeledSeries s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (std::isnan(proj[i]) || std::isnan(nb[i])) continue;
    s.a.push_back(proj[i]);
    s.b.push_back(nb[i]);
  }
  return pearson(s.a, s.b);
}

double profession_correlation(const EmbeddingTable& original,
                              const EmbeddingTable& evaluated,
                              const std::vector<std::string>& professions,
                              const BiasedWords& labeled_pool, std::size_t k) {
  std::vector<std::string> pool;
  std::vector<bool> male;
  pool_with_labels(labeled_pool, &pool, &male);

  const auto before =
      neighborhood_bias_bulk(original, professions, pool, male, k);
  const auto after =
      neighborhood_bias_bulk(evaluated, professions, pool, male, k);
  LabeledSeries s;
  for (std::size_t i = 0; i < professions.size(); ++i) {
    if (std::isnan(before[i]) || std::isnan(after[i])) continue;
    s.a.push_back(before[i]);
    s.b.push_back(after[i]);
  }
  return pearson(s.a, s.b);
}

double classify_bias(const EmbeddingTable& table,
                     const std::vector<std::string>& male,
                     const std::vector<std::string>& female,
                     std::size_t n_train_per_side, std::uint64_t seed) {
  if (n_train_per_side == 0 || male.size() <= n_train_per_side ||
      female.size() <= n_train_per_side) {
    throw std::runtime_error(
        "classify_bias: need more words per side than the train sample");
  }

  auto gather = [&](const std::vector<std::string>& words) {
    Matrix m(table.dim(), static_cast<Eigen::Index>(words.size()));
    for (std::size_t i = 0; i < words.size(); ++i) {
      m.col(static_cast<Eigen::Index>(i)) =
          require_vector(table, words[i], "classify_bias");
    }
    return m;
  };
  const Matrix xm = gather(male);
  const Matrix xf = gather(female);

  auto rng = make_rng(derive_seed(seed, 0x5u));
  std::vector<std::size_t> im(male.size()), iff(female.size());
  for (std::size_t i = 0; i < im.size(); ++i) im[i] = i;
  for (std::size_t i = 0; i < iff.size(); ++i) iff[i] = i;
  shuffle(im, rng);
  shuffle(iff, rng);

  std::vector<std::pair<const Matrix*, std::size_t>> train, test;
  std::vector<double> train_y, test_y;
  for (std::size_t i = 0; i < im.size(); ++i) {
    auto& dst = i < n_train_per_side ? train : test;
    auto& dy = i < n_train_per_side ? train_y : test_y;
    dst.emplace_back(&xm, im[i]);
    dy.push_back(1.0);
  }
  for (std::size_t i = 0; i < iff.size(); ++i) {
    auto& dst = i < n_train_per_side ? train : test;
    auto& dy = i < n_train_per_side ? train_y : test_y;
    dst.emplace_back(&xf, iff[i]);
    dy.push_back(-1.0);
  }

  // Pegasos-style primal subgradient descent for the L2-regularized hinge
  // loss. The bias rides along as a constant augmented feature. Epoch
  // budget and lambda are fixed.
  const double lambda = 1e-4;
  const int epochs = 100;
  Vector w = Vector::Zero(table.dim() + 1);
  auto score = [&](const Matrix& m, std::size_t col) {
    return w.head(table.dim()).dot(m.col(static_cast<Eigen::Index>(col))) +
           w(table.dim());
  };
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t t = 1;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, rng);
    for (const auto oi : order) {
      const double y = train_y[oi];
      const double eta = 1.0 / (lambda * double(t));
      const double margin = y * score(*train[oi].first, train[oi].second);
      w *= (1.0 - eta * lambda);
      if (margin < 1.0) {
        w.head(table.dim()) +=
            eta * y *
            train[oi].first->col(static_cast<Eigen::Index>(train[oi].second));
        w(table.dim()) += eta * y;
      }
      ++t;
    }
  }

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double pred = score(*test[i].first, test[i].second) >= 0.0 ? 1.0 : -1.0;
    correct += (pred == test_y[i]) ? 1 : 0;
  }
  return double(correct) / double(test.size());
}

namespace {

struct WeatData {
  std::vector<double> s;  // association per target, X block then Y block
  std::size_t nx = 0;
  std::size_t ny = 0;
};

// Union statistics in an order determined only by the value multiset, so
// swapping target sets or negating every value cannot move a single ulp.
void canonical_mean_std(std::vector<double> values, double* mean,
                        double* std_out) {
  std::sort(values.begin(), values.end(), [](double a, double b) {
    const double aa = std::abs(a), ab = std::abs(b);
    if (aa != ab) return aa < ab;
    return a < b;
  });
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double m = sum / double(values.size());
  double ss = 0.0;
  for (const double v : values) {
    const double d = v - m;
    ss += d * d;
  }
  *mean = m;
  *std_out = values.size() > 1 ? std::sqrt(ss / double(values.size() - 1)) : 0.0;
}

double block_sum(const std::vector<double>& s, const std::size_t* idx,
                 std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += s[idx[i]];
  return sum;
}

}  // namespace

WeatResult weat(const EmbeddingTable& table,
                const std::vector<std::string>& targets_x,
                const std::vector<std::string>& targets_y,
                const std::vector<std::string>& attrs_a,
                const std::vector<std::string>& attrs_b,
                std::uint64_t max_permutations, std::uint64_t seed) {
  WeatResult result;

  auto collect = [&](const std::vector<std::string>& words) {
    std::vector<Vector> out;
    for (const auto& w : words) {
      const auto v = table.lookup(w);
      if (!v || v->norm() == 0.0) {
        ++result.skipped_oov;
        continue;
      }
      out.push_back(*v / v->norm());
    }
    return out;
  };
  auto xs = collect(targets_x);
  auto ys = collect(targets_y);
  const auto as = collect(attrs_a);
  const auto bs = collect(attrs_b);
  if (as.empty() || bs.empty()) {
    throw std::runtime_error("weat: empty attribute set after filtering");
  }
  if (xs.empty() || ys.empty()) {
    throw std::runtime_error("weat: empty target set after filtering");
  }
  // Equal-size target sets are required by the partition test.
  const std::size_t n = std::min(xs.size(), ys.size());
  result.truncated = (xs.size() - n) + (ys.size() - n);
  xs.resize(n);
  ys.resize(n);

  WeatData data;
  data.nx = data.ny = n;
  auto association = [&](const Vector& w) {
    double ma = 0.0, mb = 0.0;
    for (const auto& a : as) ma += w.dot(a);
    for (const auto& b : bs) mb += w.dot(b);
    return ma / double(as.size()) - mb / double(bs.size());
  };
  for (const auto& v : xs) data.s.push_back(association(v));
  for (const auto& v : ys) data.s.push_back(association(v));

  double mean_union, std_union;
  canonical_mean_std(data.s, &mean_union, &std_union);
  if (std_union == 0.0 || !std::isfinite(std_union)) {
    result.degenerate = true;
    result.effect_size = 0.0;
    result.p_value = 1.0;
    return result;
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_x += data.s[i];
  for (std::size_t i = 0; i < n; ++i) mean_y += data.s[n + i];
  mean_x /= double(n);
  mean_y /= double(n);
  result.effect_size = (mean_x - mean_y) / std_union;

  std::vector<std::size_t> observed_x(n), observed_y(n);
  for (std::size_t i = 0; i < n; ++i) {
    observed_x[i] = i;
    observed_y[i] = n + i;
  }
  const double observed = block_sum(data.s, observed_x.data(), n) -
                          block_sum(data.s, observed_y.data(), n);

  const std::size_t total = 2 * n;
  const std::uint64_t n_partitions =
      binomial_capped(total, n, max_permutations);

  std::uint64_t greater = 0, count = 0;
  if (n_partitions <= max_permutations) {
    result.exact = true;
    // Lexicographic walk over all size-n index subsets.
    std::vector<std::size_t> comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = i;
    std::vector<std::size_t> rest(n);
    while (true) {
      std::size_t r = 0;
      std::size_t c = 0;
      for (std::size_t i = 0; i < total; ++i) {
        if (c < n && comb[c] == i) {
          ++c;
        } else {
          rest[r++] = i;
        }
      }
      const double stat = block_sum(data.s, comb.data(), n) -
                          block_sum(data.s, rest.data(), n);
      if (stat > observed) ++greater;
      ++count;
      // advance combination
      std::size_t i = n;
      while (i > 0 && comb[i - 1] == total - n + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < n; ++j) comb[j] = comb[j - 1] + 1;
    }
  } else {
    result.exact = false;
    auto rng = make_rng(derive_seed(seed, 0x7u));
    std::vector<std::size_t> perm(total);
    for (std::size_t i = 0; i < total; ++i) perm[i] = i;
    for (std::uint64_t it = 0; it < max_permutations; ++it) {
      shuffle(perm, rng);
      const double stat = block_sum(data.s, perm.data(), n) -
                          block_sum(data.s, perm.data() + n, n);
      if (stat > observed) ++greater;
      ++count;
    }
  }
  result.n_permutations = count;
  result.p_value = double(greater) / double(count);
  return result;
}

Pca2d pca_payload(const EmbeddingTable& table, const BiasedWords& pool) {
  Pca2d out;
  std::vector<Vector> vecs;
  auto add = [&](const std::vector<std::string>& words, int label) {
    for (const auto& w : words) {
      const auto v = table.lookup(w);
      if (!v) continue;
      out.words.push_back(w);
      out.label.push_back(label);
      vecs.push_back(*v);
    }
  };
  add(pool.male, 1);
  add(pool.female, 0);
  if (vecs.size() < 3 || table.dim() < 2) {
    throw std::runtime_error("pca_payload: need >= 3 words of dimension >= 2");
  }

  Vector mean = Vector::Zero(table.dim());
  for (const auto& v : vecs) mean += v;
  mean /= double(vecs.size());
  Matrix cov = Matrix::Zero(table.dim(), table.dim());
  for (const auto& v : vecs) {
    const Vector d = v - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= double(vecs.size());

  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  Vector pc1 = es.eigenvectors().col(table.dim() - 1);
  Vector pc2 = es.eigenvectors().col(table.dim() - 2);
  // Canonical sign: the largest-magnitude loading points positive.
  auto fix_sign = [](Vector& v) {
    Eigen::Index arg = 0;
    v.array().abs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
  };
  fix_sign(pc1);
  fix_sign(pc2);

  out.x.reserve(vecs.size());
  out.y.reserve(vecs.size());
  for (const auto& v : vecs) {
    const Vector d = v - mean;
    out.x.push_back(d.dot(pc1));
    out.y.push_back(d.dot(pc2));
  }
  return out;
}

}  // namespace desip::bias_eval
