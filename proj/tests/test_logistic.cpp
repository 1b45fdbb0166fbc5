#include <catch_amalgamated.hpp>

#include <random>

#include "rmcst/error.hpp"
#include "rmcst/logistic.hpp"
#include "support.hpp"

using namespace rmcst;
using Catch::Matchers::WithinAbs;

namespace {

double column_sd(const Eigen::VectorXd& c) {
  const double m = c.mean();
  return std::sqrt((c.array() - m).square().sum() / static_cast<double>(c.size() - 1));
}

void check_score_residuals(const Eigen::MatrixXd& x, const Eigen::VectorXi& a, const PropensityFit& fit) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd r = a.cast<double>() - fit.scores;
  CHECK(std::abs(r.sum()) <= 1e-8 * n);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    CHECK(std::abs(r.dot(x.col(j))) <= 1e-8 * n * column_sd(x.col(j)));
  }
}

}  // namespace

TEST_CASE("balanced design gives zero coefficients", "[logistic]") {
  Eigen::MatrixXd x(4, 1);
  x << -1, -1, 1, 1;
  Eigen::VectorXi a(4);
  a << 0, 1, 0, 1;
  auto fit = fit_logistic(x, a);
  CHECK(fit.converged);
  CHECK_THAT(fit.beta[0], WithinAbs(0.0, 1e-12));
  CHECK_THAT(fit.beta[1], WithinAbs(0.0, 1e-12));
  for (double s : fit.scores) CHECK_THAT(s, WithinAbs(0.5, 1e-12));
}

TEST_CASE("perfect separation is detected", "[logistic]") {
  Eigen::MatrixXd x(6, 1);
  x << -1, -0.5, 0, 0.5, 1, 2;
  Eigen::VectorXi a(6);
  a << 0, 0, 0, 1, 1, 1;
  try {
    fit_logistic(x, a);
    FAIL("expected SeparationDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeparationDetected);
  }
}

TEST_CASE("collinear design is singular", "[logistic]") {
  Eigen::MatrixXd x(8, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12, 7, 14, 8, 16;
  Eigen::VectorXi a(8);
  a << 0, 1, 0, 1, 1, 0, 1, 0;
  try {
    fit_logistic(x, a);
    FAIL("expected SingularDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDesign);
  }
}

TEST_CASE("n=20 fit matches a derivative-free maximizer", "[logistic][oracle]") {
  std::mt19937_64 gen(20);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(20, 1);
  Eigen::VectorXi a(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = z(gen);
    a[i] = u(gen) < 1.0 / (1.0 + std::exp(-(0.2 + 0.5 * x(i, 0)))) ? 1 : 0;
  }
  auto fit = fit_logistic(x, a);
  auto oracle = testing::nelder_mead([&](const Eigen::VectorXd& b) { return -testing::logistic_loglik(x, a, b); },
                                     Eigen::VectorXd::Zero(2));
  CHECK_THAT(fit.beta[0], WithinAbs(oracle[0], 1e-6));
  CHECK_THAT(fit.beta[1], WithinAbs(oracle[1], 1e-6));
  check_score_residuals(x, a, fit);

  // predict on the training rows reproduces the fitted scores
  auto again = predict_ps(fit, x);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(again[i] == fit.scores[i]);
}

TEST_CASE("20 random small datasets agree with the oracle", "[logistic][oracle][property]") {
  std::mt19937_64 gen(1234);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int done = 0;
  for (int attempt = 0; done < 20 && attempt < 200; ++attempt) {
    const int n = 25 + attempt % 20;
    const int p = 1 + attempt % 3;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXi a(n);
    for (int i = 0; i < n; ++i) {
      double eta = -0.3;
      for (int j = 0; j < p; ++j) {
        x(i, j) = j == 2 ? (u(gen) < 0.5 ? 1.0 : 0.0) : 2.0 * z(gen) + 1.0;
        eta += 0.4 * x(i, j) / (j + 1);
      }
      a[i] = u(gen) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    PropensityFit fit;
    try {
      fit = fit_logistic(x, a);
    } catch (const Error&) {
      continue;  // separated draw, not informative here
    }
    ++done;
    auto oracle = testing::nelder_mead([&](const Eigen::VectorXd& b) { return -testing::logistic_loglik(x, a, b); },
                                       Eigen::VectorXd::Zero(p + 1));
    for (int j = 0; j <= p; ++j) CHECK_THAT(fit.beta[j], WithinAbs(oracle[j], 1e-5));
    CHECK(testing::logistic_loglik(x, a, fit.beta) >= testing::logistic_loglik(x, a, oracle) - 1e-10);
    check_score_residuals(x, a, fit);
    CHECK(fit.max_score_residual <= 1e-8 * n * 3.0);
  }
  CHECK(done == 20);
}

TEST_CASE("likelihood never decreases across accepted steps", "[logistic][property]") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 30; ++rep) {
    auto d = testing::random_dataset(gen, 60, 3, 1.5);
    auto fit = fit_logistic(d);
    REQUIRE(fit.log_likelihood_trace.size() >= 2);
    for (std::size_t k = 1; k < fit.log_likelihood_trace.size(); ++k) {
      const double prev = fit.log_likelihood_trace[k - 1];
      CHECK(fit.log_likelihood_trace[k] >= prev - 1e-10 * (1.0 + std::abs(prev)));
    }
  }
}

TEST_CASE("affine rescaling leaves scores unchanged", "[logistic][property]") {
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = testing::random_dataset(gen, 80, 3);
    auto base = fit_logistic(d);
    Eigen::MatrixXd x2 = d.x();
    x2.col(1) = x2.col(1) * 7.5 + Eigen::VectorXd::Constant(x2.rows(), -3.0);
    auto scaled = fit_logistic(x2, d.treat());
    CHECK_THAT(scaled.beta[2], WithinAbs(base.beta[2] / 7.5, 1e-8));
    CHECK((scaled.scores - base.scores).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("predict_ps simple cases", "[logistic]") {
  PropensityFit fit;
  fit.beta = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, -3, 4;
  CHECK(predict_ps(fit, x) == Eigen::Vector2d(0.5, 0.5));
  fit.beta[0] = std::log(3.0);
  auto p = predict_ps(fit, x);
  CHECK_THAT(p[0], WithinAbs(0.75, 1e-15));
  CHECK_THAT(p[1], WithinAbs(0.75, 1e-15));
  Eigen::MatrixXd wrong(2, 3);
  wrong.setZero();
  try {
    predict_ps(fit, wrong);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("scores stay strictly inside the unit interval", "[logistic][property]") {
  std::mt19937_64 gen(77);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = testing::random_dataset(gen, 100, 2, 2.0);
    auto fit = fit_logistic(d);
    CHECK(fit.scores.minCoeff() > 0.0);
    CHECK(fit.scores.maxCoeff() < 1.0);
  }
}
