#include "desip/linalg.hpp"

#include <doctest.h>

#include "desip/rng.hpp"
#include "test_util.hpp"

using namespace desip;
using linalg::Matrix;
using linalg::Vector;

TEST_CASE("standardize_columns: two-point column") {
  Matrix m(2, 1);
  m << 1.0, 3.0;
  const auto s = linalg::standardize_columns(m);
  CHECK(s.data(0, 0) == doctest::Approx(-1.0));
  CHECK(s.data(1, 0) == doctest::Approx(1.0));
  CHECK(s.means(0) == doctest::Approx(2.0));
  CHECK(s.stds(0) == doctest::Approx(1.0));
}

TEST_CASE("standardize_columns: constant column maps to zeros") {
  Matrix m(3, 2);
  m << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
  const auto s = linalg::standardize_columns(m);
  CHECK(s.data.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.stds(0) == 0.0);
  CHECK(s.stds(1) > 0.0);
}

TEST_CASE("standardize_columns: random matrix recomputation oracle") {
  auto rng = make_rng(101);
  const Matrix m = testutil::random_matrix(rng, 10, 3, 2.5);
  const auto s = linalg::standardize_columns(m);
  for (int j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (int i = 0; i < 10; ++i) mean += s.data(i, j);
    mean /= 10.0;
    double var = 0.0;
    for (int i = 0; i < 10; ++i) var += (s.data(i, j) - mean) * (s.data(i, j) - mean);
    var /= 10.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    // reconstruction
    for (int i = 0; i < 10; ++i) {
      CHECK(s.data(i, j) * s.stds(j) + s.means(j) ==
            doctest::Approx(m(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ols_fit: exact single-column fit") {
  Matrix x(2, 1), y(2, 1);
  x << 1.0, 2.0;
  y << 2.0, 4.0;
  const Matrix b = linalg::ols_fit(x, y);
  CHECK(b(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("ols_fit: identity design returns responses") {
  Matrix x = Matrix::Identity(2, 2);
  Matrix y(2, 2);
  y << 3.0, -1.0, 0.5, 7.0;
  const Matrix b = linalg::ols_fit(x, y);
  CHECK((b - y).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("ols_fit: matches normal-equation oracle on random instance") {
  auto rng = make_rng(202);
  const Matrix x = testutil::random_matrix(rng, 20, 3);
  const Matrix y = testutil::random_matrix(rng, 20, 2);
  const Matrix b = linalg::ols_fit(x, y);
  const Matrix oracle = testutil::ols_normal_equations(x, y);
  CHECK((b - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ols_fit: residual orthogonal to column space") {
  auto rng = make_rng(203);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testutil::random_matrix(rng, 15, 4);
    const Matrix y = testutil::random_matrix(rng, 15, 3);
    const Matrix resid = y - x * linalg::ols_fit(x, y);
    const double rel =
        (x.transpose() * resid).cwiseAbs().maxCoeff() / y.norm();
    CHECK(rel < 1e-8);
  }
}

TEST_CASE("pls_fit: rank-one closed form") {
  auto rng = make_rng(303);
  const Matrix x = testutil::random_matrix(rng, 12, 1);
  const Matrix y = testutil::random_matrix(rng, 12, 1);
  const auto model = linalg::pls_fit(x, y, 1);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix yc = y.rowwise() - y.colwise().mean();
  const double expected =
      (xc.transpose() * yc)(0, 0) / (xc.transpose() * xc)(0, 0);
  CHECK(model.coefficients(0, 0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("pls_fit: full components equal OLS on centered data") {
  auto rng = make_rng(304);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 25, p = 4, d = 3;
    const Matrix x = testutil::random_matrix(rng, n, p);
    const Matrix y = testutil::random_matrix(rng, n, d);
    const auto model = linalg::pls_fit(x, y, p);
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Matrix yc = y.rowwise() - y.colwise().mean();
    const Matrix b_ols = linalg::ols_fit(xc, yc);
    CHECK((model.coefficients - b_ols).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("pls_fit: realizable target reaches tiny residual") {
  auto rng = make_rng(305);
  const int n = 30, p = 5, d = 2;
  const Matrix x = testutil::random_matrix(rng, n, p);
  const Matrix coef = testutil::random_matrix(rng, p, d);
  const Matrix y = x * coef;
  const auto model = linalg::pls_fit(x, y, p);
  const Matrix fitted = linalg::pls_predict(model, x);
  CHECK((y - fitted).norm() / y.norm() < 1e-8);
}

TEST_CASE("pls_fit: constant responses give zero coefficients and a flag") {
  auto rng = make_rng(306);
  const Matrix x = testutil::random_matrix(rng, 10, 3);
  Matrix y = Matrix::Constant(10, 2, 4.25);
  const auto model = linalg::pls_fit(x, y, 2);
  CHECK(model.degenerate_y);
  CHECK(model.coefficients.cwiseAbs().maxCoeff() == 0.0);
  // predictions collapse to the mean
  const Matrix fitted = linalg::pls_predict(model, x);
  CHECK((fitted.array() - 4.25).abs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("pls_fit: scaled fit agrees with manual pre/post scaling") {
  auto rng = make_rng(307);
  const int n = 24, p = 3, d = 2;
  Matrix x = testutil::random_matrix(rng, n, p);
  x.col(1) *= 50.0;  // wildly different column scales
  const Matrix y = testutil::random_matrix(rng, n, d);
  const auto scaled = linalg::pls_fit(x, y, p, true);
  const auto plain = linalg::pls_fit(x, y, p, false);
  // full-rank, full components: both must solve the same LS problem
  CHECK((scaled.coefficients - plain.coefficients).cwiseAbs().maxCoeff() <
        1e-6);
}

TEST_CASE("preconditions rejected across the numerical core") {
  auto rng = make_rng(308);
  const Matrix x = testutil::random_matrix(rng, 10, 3);
  const Matrix y = testutil::random_matrix(rng, 10, 2);
  CHECK_THROWS(linalg::pls_fit(x, y, 0));
  CHECK_THROWS(linalg::pls_fit(x, y, 4));   // > predictor count
  CHECK_THROWS(linalg::pls_fit(x, testutil::random_matrix(rng, 9, 2), 2));
  CHECK_THROWS(linalg::standardize_columns(Matrix::Zero(1, 3)));
  CHECK_THROWS(linalg::ols_fit(Matrix(0, 0), Matrix(0, 0)));
  CHECK_THROWS(linalg::ols_fit(x, testutil::random_matrix(rng, 9, 2)));
  CHECK_THROWS(
      linalg::project_onto_span(y, testutil::random_matrix(rng, 9, 2)));
}

TEST_CASE("project_onto_span: axis projection") {
  Matrix d(2, 1);
  d << 1.0, 0.0;
  Matrix y(2, 1);
  y << 3.0, 4.0;
  const auto split = linalg::project_onto_span(y, d);
  CHECK(split.onto(0, 0) == doctest::Approx(3.0));
  CHECK(split.onto(1, 0) == doctest::Approx(0.0));
  CHECK(split.residual(0, 0) == doctest::Approx(0.0));
  CHECK(split.residual(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("project_onto_span: orthogonal input passes through") {
  Matrix d(3, 1);
  d << 1.0, 0.0, 0.0;
  Matrix y(3, 1);
  y << 0.0, 2.0, -1.0;
  const auto split = linalg::project_onto_span(y, d);
  CHECK(split.onto.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((split.residual - y).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("project_onto_span: duplicate columns match single column") {
  auto rng = make_rng(404);
  Matrix d1 = testutil::random_matrix(rng, 6, 1);
  Matrix d2(6, 2);
  d2 << d1, d1;
  const Matrix y = testutil::random_matrix(rng, 6, 3);
  const auto s1 = linalg::project_onto_span(y, d1);
  const auto s2 = linalg::project_onto_span(y, d2);
  CHECK((s1.onto - s2.onto).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("project_onto_span: split invariants on random instances") {
  auto rng = make_rng(405);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 12;
    const Matrix d = testutil::random_matrix(rng, n, 3);
    const Matrix y = testutil::random_matrix(rng, n, 4);
    const auto split = linalg::project_onto_span(y, d);
    CHECK((split.onto + split.residual - y).norm() / y.norm() < 1e-8);
    CHECK((d.transpose() * split.residual).cwiseAbs().maxCoeff() <
          1e-6 * y.cwiseAbs().maxCoeff());
    // idempotence: the residual has nothing left in span(D)
    const auto again = linalg::project_onto_span(split.residual, d);
    CHECK(again.onto.cwiseAbs().maxCoeff() < 1e-8 * y.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("cosine: closed forms") {
  Vector a(2), b(2), c(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  c << 1.0, 1.0;
  CHECK(linalg::cosine(a, b) == doctest::Approx(0.0));
  CHECK(linalg::cosine(a, 2.0 * a) == doctest::Approx(1.0));
  CHECK(linalg::cosine(c, a) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK_THROWS(linalg::cosine(a, Vector::Zero(2)));
}

TEST_CASE("cosine: scale invariance property") {
  auto rng = make_rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    Vector u = testutil::random_matrix(rng, 7, 1);
    Vector v = testutil::random_matrix(rng, 7, 1);
    const double alpha = 0.05 + 3.0 * uniform_unit(rng);
    const double beta = 0.05 + 3.0 * uniform_unit(rng);
    CHECK(linalg::cosine(alpha * u, beta * v) ==
          doctest::Approx(linalg::cosine(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("knn: self query ranks itself first, tie-break by rank") {
  Matrix cols = Matrix::Identity(3, 3);
  const std::vector<std::string> words{"a", "b", "c"};
  Vector q(3);
  q << 1.0, 0.0, 0.0;
  const auto top2 = linalg::knn(cols, words, q, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0] == "a");
  CHECK(top2[1] == "b");  // cosine ties at 0 resolve by frequency rank

  std::unordered_set<std::string> exclude{"a"};
  const auto top1 = linalg::knn(cols, words, q, 1, &exclude);
  CHECK(top1[0] == "b");
}

TEST_CASE("knn: matches brute-force oracle on random tables") {
  auto rng = make_rng(606);
  const Matrix cols = testutil::random_matrix(rng, 8, 50);
  std::vector<std::string> words;
  for (int i = 0; i < 50; ++i) words.push_back("w" + std::to_string(i));
  const Vector q = testutil::random_matrix(rng, 8, 1);
  const auto got = linalg::knn(cols, words, q, 5);
  const auto expected_idx = testutil::knn_bruteforce(cols, q, 5);
  REQUIRE(got.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(got[i] == words[expected_idx[i]]);
  }
}

TEST_CASE("knn: zero-norm query and oversized k rejected") {
  Matrix cols = Matrix::Identity(3, 3);
  const std::vector<std::string> words{"a", "b", "c"};
  CHECK_THROWS(linalg::knn(cols, words, Vector::Zero(3), 1));
  Vector q(3);
  q << 1.0, 0.0, 0.0;
  CHECK_THROWS(linalg::knn(cols, words, q, 4));
  std::unordered_set<std::string> exclude{"a", "b", "c"};
  CHECK_THROWS(linalg::knn(cols, words, q, 1, &exclude));
}

TEST_CASE("knn: invariant under positive query rescaling") {
  auto rng = make_rng(607);
  const Matrix cols = testutil::random_matrix(rng, 6, 30);
  std::vector<std::string> words;
  for (int i = 0; i < 30; ++i) words.push_back("w" + std::to_string(i));
  const Vector q = testutil::random_matrix(rng, 6, 1);
  const auto base = linalg::knn(cols, words, q, 4);
  for (const double scale : {0.01, 3.0, 1000.0}) {
    CHECK(linalg::knn(cols, words, Vector(scale * q), 4) == base);
  }
}
