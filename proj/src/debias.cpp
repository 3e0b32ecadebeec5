#include "desip/debias.hpp"

#include <stdexcept>

#include "desip/partition.hpp"

namespace desip::debias {

namespace {

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

double relative_fit_residual(const linalg::PLSModel& model,
                             const Matrix& predictors,
                             const Matrix& responses) {
  const Matrix fitted = linalg::pls_predict(model, predictors);
  const Matrix centered =
      responses.rowwise() - responses.colwise().mean();
  const double denom = centered.norm();
  if (denom == 0.0) return 0.0;
  return (responses - fitted).norm() / denom;
}

int clamp_components(int requested, Eigen::Index predictors,
                     Eigen::Index rows) {
  const auto cap = std::min<Eigen::Index>(predictors, rows - 1);
  return static_cast<int>(std::min<Eigen::Index>(requested, cap));
}

// Placeholder token list for screening when callers pass bare matrices.
std::vector<std::string> index_tokens(Eigen::Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

void check_common(const Matrix& d, const Matrix& x, const Matrix& y,
                  const std::vector<std::string>& y_tokens) {
  if (d.rows() != y.rows() || x.rows() != y.rows()) {
    throw std::invalid_argument("debias: role matrices disagree on N");
  }
  if (y_tokens.size() != static_cast<std::size_t>(y.cols())) {
    throw std::invalid_argument("debias: Y token list does not match Y");
  }
  if (d.cols() == 0) throw std::invalid_argument("debias: empty D");
  if (x.cols() == 0) throw std::invalid_argument("debias: empty X");
  if (y.cols() == 0) throw std::invalid_argument("debias: empty Y");
}

Matrix screen_x(const Matrix& x, const Matrix& y, const DebiasConfig& cfg,
                DebiasDiagnostics* diag) {
  diag->x_columns_in = static_cast<std::size_t>(x.cols());
  if (!cfg.apply_screening) {
    diag->x_columns_kept = diag->x_columns_in;
    return x;
  }
  const auto screened =
      partition::screen(x, index_tokens(x.cols()), y, cfg.gamma);
  diag->x_columns_kept = screened.kept.size();
  return screened.reduced;
}

void finish(DebiasResult* result, const Matrix& d, const Matrix& y) {
  const auto split = linalg::project_onto_span(y, d);
  result->y_perp = split.residual;
  result->debiased_y = result->y_hat + result->y_perp;
  result->diagnostics.orthogonality_residual =
      (d.transpose() * result->y_perp).array().abs().maxCoeff();
  if (!result->debiased_y.allFinite()) {
    throw std::runtime_error("debias: non-finite output");
  }
}

}  // namespace

std::string method_name(Method m) {
  return m == Method::PDesip ? "p-desip" : "u-desip";
}

Method parse_method(const std::string& name) {
  if (name == "p-desip") return Method::PDesip;
  if (name == "u-desip") return Method::UDesip;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected p-desip or u-desip)");
}

DebiasResult p_desip(const Matrix& d, const Matrix& p, const Matrix& x,
                     const Matrix& y, std::vector<std::string> y_tokens,
                     const DebiasConfig& cfg) {
  check_common(d, x, y, y_tokens);
  if (p.cols() == 0) throw std::invalid_argument("p_desip: empty P");
  if (p.rows() != y.rows()) {
    throw std::invalid_argument("p_desip: P disagrees on N");
  }

  DebiasResult result;
  result.tokens = std::move(y_tokens);
  const Matrix xk = screen_x(x, y, cfg, &result.diagnostics);

  // Step 1: X = D a1 + P a2, jointly on [D|P]; a2 is the P-block.
  const Matrix dp = hcat(d, p);
  const auto m1 = linalg::pls_fit(
      dp, xk, clamp_components(cfg.n_components, dp.cols(), dp.rows()),
      cfg.pls_scale);
  result.alpha2 = m1.coefficients.bottomRows(p.cols());
  result.diagnostics.step1_residual = relative_fit_residual(m1, dp, xk);

  // Step 2: Y = P b1 + X b2 on [P|X]; b2 is the X-block. b1 never enters
  // the output (the derivation forces b1 = -a2 b2).
  const Matrix px = hcat(p, xk);
  const auto m2 = linalg::pls_fit(
      px, y, clamp_components(cfg.n_components, px.cols(), px.rows()),
      cfg.pls_scale);
  result.beta2 = m2.coefficients.bottomRows(xk.cols());
  result.diagnostics.step2_residual = relative_fit_residual(m2, px, y);

  result.y_hat = (xk - p * result.alpha2) * result.beta2;
  finish(&result, d, y);
  return result;
}

DebiasResult u_desip(const Matrix& d, const Matrix& z, const Matrix& x,
                     const Matrix& y, std::vector<std::string> y_tokens,
                     const DebiasConfig& cfg) {
  check_common(d, x, y, y_tokens);
  if (z.cols() == 0) throw std::invalid_argument("u_desip: empty Z");
  if (z.rows() != y.rows()) {
    throw std::invalid_argument("u_desip: Z disagrees on N");
  }

  DebiasResult result;
  result.tokens = std::move(y_tokens);
  const Matrix xk = screen_x(x, y, cfg, &result.diagnostics);

  // Y = Z t1 + X t2 on [Z|X]; t1 is the Z-block, t2 never enters the
  // output (the derivation forces t2 = 0).
  const Matrix zx = hcat(z, xk);
  const auto m1 = linalg::pls_fit(
      zx, y, clamp_components(cfg.n_components, zx.cols(), zx.rows()),
      cfg.pls_scale);
  result.theta1 = m1.coefficients.topRows(z.cols());
  result.diagnostics.step2_residual = relative_fit_residual(m1, zx, y);

  result.y_hat = z * result.theta1;
  finish(&result, d, y);
  return result;
}

EmbeddingTable assemble_table(const DebiasResult& result,
                              const EmbeddingTable& original) {
  Eigen::MatrixXd vectors = original.matrix();
  for (std::size_t j = 0; j < result.tokens.size(); ++j) {
    const auto idx = original.index_of(result.tokens[j]);
    if (!idx) {
      throw std::runtime_error("assemble_table: token '" + result.tokens[j] +
                               "' missing from original vocabulary");
    }
    vectors.col(static_cast<Eigen::Index>(*idx)) =
        result.debiased_y.col(static_cast<Eigen::Index>(j));
  }
  return EmbeddingTable(original.words(), std::move(vectors),
                        original.duplicate_count());
}

}  // namespace desip::debias
