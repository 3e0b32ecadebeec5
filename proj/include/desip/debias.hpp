#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "desip/embedding.hpp"
#include "desip/linalg.hpp"

// The two causal-intervention debiasing algorithms. Both run the marginal
// screening step on X, estimate the structural-equation coefficients with
// PLS, apply the intervention formula, and restore the component of Y that
// is orthogonal to span(D).

namespace desip::debias {

using Matrix = Eigen::MatrixXd;

enum class Method { PDesip, UDesip };

std::string method_name(Method m);
Method parse_method(const std::string& name);  // "p-desip" / "u-desip"

struct DebiasConfig {
  Method method = Method::PDesip;
  int n_components = 20;
  double gamma = 0.92;         // screening threshold in [0, 1]
  std::size_t z_size = 500;    // m, U-DeSIP only (used by partitioning)
  std::uint64_t rng_seed = 42;
  bool apply_screening = true;
  bool pls_scale = false;      // unit-variance scaling inside PLS
};

struct DebiasDiagnostics {
  std::size_t x_columns_in = 0;
  std::size_t x_columns_kept = 0;
  // Relative Frobenius fit residuals of the PLS steps.
  double step1_residual = 0.0;  // X on [D|P] (P-DeSIP only)
  double step2_residual = 0.0;  // Y on [P|X] or [Z|X]
  // max |D^T residual| over all entries, the self-check of the restoration
  // step.
  double orthogonality_residual = 0.0;
};

struct DebiasResult {
  Matrix debiased_y;                // N x d, = y_hat + y_perp
  std::vector<std::string> tokens;  // the Y word list

  // Stored intermediates: the intervention term and the restored
  // orthogonal component, plus the coefficient blocks that produced them.
  Matrix y_hat;
  Matrix y_perp;
  Matrix alpha2;  // P-DeSIP: P-block of step 1 (s2 x p_kept)
  Matrix beta2;   // P-DeSIP: X-block of step 2 (p_kept x d)
  Matrix theta1;  // U-DeSIP: Z-block of step 1 (m x d)

  DebiasDiagnostics diagnostics;
};

// Removing potential proxy bias:
//   1. screen X against Y
//   2. fit X = D a1 + P a2 (PLS on predictors [D|P])
//   3. fit Y = P b1 + X b2 (PLS on predictors [P|X])
//   4. y_hat = (X - P a2) b2
//   5. y_perp = Y - D (D^T D)^-1 D^T Y
//   6. output y_hat + y_perp
DebiasResult p_desip(const Matrix& d, const Matrix& p, const Matrix& x,
                     const Matrix& y, std::vector<std::string> y_tokens,
                     const DebiasConfig& cfg);

// Removing unresolved bias:
//   1. screen X against Y
//   2. fit Y = Z t1 + X t2 (PLS on predictors [Z|X])
//   3. y_hat = Z t1
//   4. y_perp as above; output y_hat + y_perp
DebiasResult u_desip(const Matrix& d, const Matrix& z, const Matrix& x,
                     const Matrix& y, std::vector<std::string> y_tokens,
                     const DebiasConfig& cfg);

// New table where every result token carries its debiased vector and every
// other word keeps its original one; original order preserved.
EmbeddingTable assemble_table(const DebiasResult& result,
                              const EmbeddingTable& original);

}  // namespace desip::debias
