#pragma once

#include <Eigen/Dense>
#include <string>
#include <unordered_set>
#include <vector>

// Numerical core: column standardization, multivariate least squares,
// NIPALS PLS2 regression, orthogonal projection onto a column span,
// cosine similarity and exhaustive nearest-neighbor search.
//
// Convention: throughout the toolkit a "role matrix" stores one word per
// column, so the row count is the embedding dimension and plays the role
// of the sample axis in every regression.

namespace desip::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Singular values below kPinvRelTol * sigma_max are treated as zero.
inline constexpr double kPinvRelTol = 1e-10;

struct Standardized {
  Matrix data;   // each column: mean 0, population std 1 (or all zero)
  Vector means;
  Vector stds;   // 0 recorded for constant columns
};

// Column-wise z-scoring with the population standard deviation (divisor =
// row count). Constant columns map to all-zero columns with std recorded 0.
Standardized standardize_columns(const Matrix& m);

// Moore-Penrose pseudo-inverse via SVD.
Matrix pinv(const Matrix& m, double rel_tol = kPinvRelTol);

// Minimum-norm least-squares solution of X * B = Y. X may be rank-deficient.
Matrix ols_fit(const Matrix& x, const Matrix& y);

struct PLSModel {
  Matrix coefficients;     // p_in x p_out, applies to column-centered input
  int n_components = 0;    // components actually extracted
  Vector x_means;
  Vector y_means;
  bool degenerate_y = false;  // all response columns constant
};

// NIPALS PLS2 on column-centered data (unit-variance scaling optional and
// off by default; when on, coefficients are mapped back to the raw scale).
// The per-component inner iteration stops when the weight vector moves by
// less than 1e-10 in norm or after 500 rounds. Extraction stops early if
// the predictor residual is exhausted, so n_components in the returned
// model may be smaller than requested.
PLSModel pls_fit(const Matrix& x, const Matrix& y, int n_components,
                 bool scale = false);

// (X - x_means) * coefficients + y_means.
Matrix pls_predict(const PLSModel& model, const Matrix& x);

struct ProjectionSplit {
  Matrix onto;      // component inside span(basis)
  Matrix residual;  // orthogonal complement; onto + residual == input
};

// Split every column of y into its components inside and orthogonal to the
// column span of `basis`. Rank-deficient bases are legal (pseudo-inverse).
ProjectionSplit project_onto_span(const Matrix& y, const Matrix& basis);

// Cosine similarity, clamped to [-1, 1]. Throws on zero-norm input.
double cosine(const Vector& u, const Vector& v);

// Indices of the k columns of `columns` with the highest cosine similarity
// to `query`, descending; ties broken by ascending column index. Zero-norm
// candidate columns are never selected.
std::vector<std::size_t> top_k_by_cosine(const Matrix& columns,
                                         const Vector& query, std::size_t k);

// k nearest words by cosine; `exclude` removes tokens from the candidate
// pool before ranking. `columns` holds one word vector per column, aligned
// with `words` (column order = frequency rank, used as the tie-break).
std::vector<std::string> knn(
    const Matrix& columns, const std::vector<std::string>& words,
    const Vector& query, std::size_t k,
    const std::unordered_set<std::string>* exclude = nullptr);

}  // namespace desip::linalg
