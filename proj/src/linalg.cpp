#include "desip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace desip::linalg {

Standardized standardize_columns(const Matrix& m) {
  if (m.rows() < 2) {
    throw std::invalid_argument(
        "standardize_columns: need at least 2 rows, got " +
        std::to_string(m.rows()));
  }
  const auto n = m.rows();
  Standardized out;
  out.data.resize(m.rows(), m.cols());
  out.means.resize(m.cols());
  out.stds.resize(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto col = m.col(j);
    // Exactly-constant columns are degenerate by contract, independent of
    // how the mean rounds.
    if (col.maxCoeff() == col.minCoeff()) {
      out.data.col(j).setZero();
      out.means(j) = col(0);
      out.stds(j) = 0.0;
      continue;
    }
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / double(n);
    const double std = std::sqrt(var);
    out.means(j) = mean;
    out.stds(j) = std;
    out.data.col(j) = (col.array() - mean) / std;
  }
  return out;
}

Matrix pinv(const Matrix& m, double rel_tol) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

Matrix ols_fit(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw std::invalid_argument("ols_fit: row counts differ");
  }
  if (x.rows() < 1 || x.cols() < 1) {
    throw std::invalid_argument("ols_fit: empty design matrix");
  }
  return pinv(x) * y;
}

PLSModel pls_fit(const Matrix& x, const Matrix& y, int n_components,
                 bool scale) {
  if (x.rows() != y.rows()) {
    throw std::invalid_argument("pls_fit: row counts differ");
  }
  if (x.rows() < 2) {
    throw std::invalid_argument("pls_fit: need at least 2 rows");
  }
  if (n_components < 1 ||
      n_components > std::min<Eigen::Index>(x.cols(), x.rows() - 1)) {
    throw std::invalid_argument("pls_fit: n_components out of range");
  }

  PLSModel model;
  model.x_means = x.colwise().mean();
  model.y_means = y.colwise().mean();

  Matrix xw = x.rowwise() - model.x_means.transpose();
  Matrix yw = y.rowwise() - model.y_means.transpose();

  Vector x_scale = Vector::Ones(x.cols());
  Vector y_scale = Vector::Ones(y.cols());
  if (scale) {
    const double n = double(x.rows());
    for (Eigen::Index j = 0; j < xw.cols(); ++j) {
      const double s = std::sqrt(xw.col(j).squaredNorm() / n);
      if (s > 0.0) {
        x_scale(j) = s;
        xw.col(j) /= s;
      }
    }
    for (Eigen::Index j = 0; j < yw.cols(); ++j) {
      const double s = std::sqrt(yw.col(j).squaredNorm() / n);
      if (s > 0.0) {
        y_scale(j) = s;
        yw.col(j) /= s;
      }
    }
  }

  model.coefficients = Matrix::Zero(x.cols(), y.cols());
  const double y_norm0 = yw.norm();
  if (y_norm0 == 0.0) {
    model.degenerate_y = true;
    return model;
  }
  const double x_tol = 1e-12 * std::max(1.0, xw.norm());
  const double y_tol = 1e-12 * std::max(1.0, y_norm0);

  Matrix weights(x.cols(), n_components);     // W
  Matrix x_loadings(x.cols(), n_components);  // P
  Matrix y_loadings(y.cols(), n_components);  // Q
  int extracted = 0;

  for (int a = 0; a < n_components; ++a) {
    // Start the inner power iteration from the largest remaining response.
    Eigen::Index u_col = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < yw.cols(); ++j) {
      const double nrm = yw.col(j).squaredNorm();
      if (nrm > best) {
        best = nrm;
        u_col = j;
      }
    }
    if (std::sqrt(best) <= y_tol) break;  // responses fully explained

    Vector u = yw.col(u_col);
    Vector w = Vector::Zero(x.cols());
    Vector t, q;
    bool rank_exhausted = false;
    for (int it = 0; it < 500; ++it) {
      Vector w_new = xw.transpose() * u;
      const double wn = w_new.norm();
      if (wn <= x_tol) {
        rank_exhausted = true;
        break;
      }
      w_new /= wn;
      t = xw * w_new;
      const double tt = t.squaredNorm();
      if (tt <= x_tol * x_tol) {
        rank_exhausted = true;
        break;
      }
      q = yw.transpose() * t / tt;
      const double delta = (w_new - w).norm();
      w = w_new;
      const double qq = q.squaredNorm();
      if (qq > 0.0) u = yw * q / qq;
      if (delta < 1e-10) break;
    }
    if (rank_exhausted || t.size() == 0) break;

    const double tt = t.squaredNorm();
    const Vector p = xw.transpose() * t / tt;
    weights.col(a) = w;
    x_loadings.col(a) = p;
    y_loadings.col(a) = q;
    xw.noalias() -= t * p.transpose();
    yw.noalias() -= t * q.transpose();
    ++extracted;
  }

  model.n_components = extracted;
  if (extracted > 0) {
    const Matrix w_used = weights.leftCols(extracted);
    const Matrix p_used = x_loadings.leftCols(extracted);
    const Matrix q_used = y_loadings.leftCols(extracted);
    // B = W (P^T W)^-1 Q^T on the (centered, possibly scaled) data.
    const Matrix ptw = p_used.transpose() * w_used;
    Matrix b = w_used * ptw.partialPivLu().solve(q_used.transpose());
    if (scale) {
      b = x_scale.cwiseInverse().asDiagonal() * b * y_scale.asDiagonal();
    }
    model.coefficients = b;
  }
  return model;
}

Matrix pls_predict(const PLSModel& model, const Matrix& x) {
  if (x.cols() != model.coefficients.rows()) {
    throw std::invalid_argument("pls_predict: column count mismatch");
  }
  Matrix out = (x.rowwise() - model.x_means.transpose()) * model.coefficients;
  out.rowwise() += model.y_means.transpose();
  return out;
}

ProjectionSplit project_onto_span(const Matrix& y, const Matrix& basis) {
  if (y.rows() != basis.rows()) {
    throw std::invalid_argument("project_onto_span: row counts differ");
  }
  Eigen::BDCSVD<Matrix> svd(basis, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? kPinvRelTol * sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  }
  ProjectionSplit split;
  if (rank == 0) {
    split.onto = Matrix::Zero(y.rows(), y.cols());
    split.residual = y;
    return split;
  }
  const Matrix u = svd.matrixU().leftCols(rank);
  split.onto.noalias() = u * (u.transpose() * y);
  split.residual = y - split.onto;
  return split;
}

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("cosine: zero-norm input");
  }
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<std::size_t> top_k_by_cosine(const Matrix& columns,
                                         const Vector& query, std::size_t k) {
  const double qn = query.norm();
  if (qn == 0.0) {
    throw std::invalid_argument("top_k_by_cosine: zero-norm query");
  }
  if (k > static_cast<std::size_t>(columns.cols())) {
    throw std::invalid_argument("top_k_by_cosine: k exceeds candidate count");
  }
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(columns.cols());
  const Vector qhat = query / qn;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const double cn = columns.col(j).norm();
    if (cn == 0.0) continue;
    scored.emplace_back(columns.col(j).dot(qhat) / cn, j);
  }
  if (k > scored.size()) {
    throw std::invalid_argument(
        "top_k_by_cosine: k exceeds nonzero candidate count");
  }
  const auto better = [](const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
  return out;
}

std::vector<std::string> knn(const Matrix& columns,
                             const std::vector<std::string>& words,
                             const Vector& query, std::size_t k,
                             const std::unordered_set<std::string>* exclude) {
  if (words.size() != static_cast<std::size_t>(columns.cols())) {
    throw std::invalid_argument("knn: word list does not match matrix");
  }
  std::vector<std::size_t> candidates;
  candidates.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (exclude && exclude->count(words[i])) continue;
    candidates.push_back(i);
  }
  if (k > candidates.size()) {
    throw std::invalid_argument("knn: k exceeds candidate count");
  }
  Matrix sub(columns.rows(), candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    sub.col(i) = columns.col(candidates[i]);
  }
  const auto picked = top_k_by_cosine(sub, query, k);
  std::vector<std::string> out;
  out.reserve(k);
  for (const auto idx : picked) out.push_back(words[candidates[idx]]);
  return out;
}

}  // namespace desip::linalg
