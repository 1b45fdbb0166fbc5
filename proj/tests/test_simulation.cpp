#include <catch_amalgamated.hpp>

#include <cmath>

#include "rmcst/error.hpp"
#include "rmcst/logistic.hpp"
#include "rmcst/reference_values.hpp"
#include "rmcst/simulation.hpp"

using namespace rmcst;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("zero slopes give a score of one half", "[simulation]") {
  std::vector<double> lp(1000, 0.0);
  CHECK_THAT(calibrate_intercept(lp), WithinAbs(0.0, 1e-10));
  SimulationScenario sc;
  sc.gamma = 1e-300;
  sc.intercept = 0.0;
  sc.n = 200;
  auto sim = generate_dataset(sc, 0);
  for (double e : sim.true_ps) CHECK_THAT(e, WithinAbs(0.5, 1e-12));
}

TEST_CASE("single Bernoulli covariate calibrates to minus half the slope", "[simulation]") {
  for (double c : {0.4, 2.0, -3.0}) {
    std::vector<double> lp;
    for (int i = 0; i < 500; ++i) {
      lp.push_back(0.0);
      lp.push_back(c);
    }
    CHECK_THAT(calibrate_intercept(lp), WithinAbs(-c / 2.0, 1e-9));
  }
}

TEST_CASE("intercept outside the search range", "[simulation]") {
  std::vector<double> lp(10, 200.0);
  try {
    calibrate_intercept(lp);
    FAIL("expected RootNotBracketed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RootNotBracketed);
  }
}

TEST_CASE("gamma 5 intercept agrees across independent seeds", "[simulation][slow]") {
  const double a = calibrate_intercept(5.0);
  const double b = calibrate_intercept(5.0, 777);
  CHECK_THAT(a, WithinAbs(b, 0.01));
  // the calibrated intercept balances arms on a fresh covariate sample
  Rng rng(4242, {1});
  const auto slopes = ps_slopes(5.0);
  double mean = 0.0;
  const int m = 1'000'000;
  for (int i = 0; i < m; ++i) mean += logistic(a + slopes.dot(draw_covariates(rng)));
  CHECK_THAT(mean / m, WithinAbs(0.5, 2e-3));
}

TEST_CASE("covariate law", "[simulation]") {
  Rng rng(5, {9});
  const int m = 200'000;
  Eigen::MatrixXd x(m, kSimCovariates);
  for (int i = 0; i < m; ++i) x.row(i) = draw_covariates(rng).transpose();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  for (int j = 0; j < 3; ++j) CHECK_THAT(mean[j], WithinAbs(0.0, 0.01));
  for (int j = 3; j < 6; ++j) {
    CHECK_THAT(mean[j], WithinAbs(0.5, 0.01));
    for (int i = 0; i < 100; ++i) CHECK((x(i, j) == 0.0 || x(i, j) == 1.0));
  }
  const Eigen::MatrixXd c = x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / (m - 1.0);
  for (int j = 0; j < 3; ++j) {
    CHECK_THAT(cov(j, j), WithinAbs(1.0, 0.02));
    for (int k = j + 1; k < 3; ++k) CHECK_THAT(cov(j, k), WithinAbs(0.5, 0.02));
  }
}

TEST_CASE("outcome and censoring predictors", "[simulation]") {
  SimCovariates x;
  x << 1.0, -0.5, 0.25, 1.0, 0.0, 1.0;
  const double e = 0.3;
  const double m1 = -1.0 + 0.4 * 1.0 + 0.2 * -0.5 + 0.1 * 0.25 - 0.1 * 1.0 - 0.3 * 1.0;
  const double m0 = -1.4 - 0.2 * -0.5 - 0.3 * 0.25 - 0.5 * 1.0 - 0.7 * 1.0;
  CHECK_THAT(outcome_log_rate(x, 1, e, OutcomeVariant::WithoutPsTerm), WithinAbs(m1, 1e-15));
  CHECK_THAT(outcome_log_rate(x, 0, e, OutcomeVariant::WithoutPsTerm), WithinAbs(m0, 1e-15));
  CHECK_THAT(outcome_log_rate(x, 1, e, OutcomeVariant::WithPsTerm), WithinAbs(m1 + 2 * e, 1e-15));
  CHECK_THAT(outcome_log_rate(x, 0, e, OutcomeVariant::WithPsTerm), WithinAbs(m0 - e, 1e-15));

  SimulationScenario sc;
  const double eta = -1.6 - 0.3 * 1.0 + 0.5 * -0.5 + 0.5 * 0.25 + 0.2 * 1.0 - 0.5 * 1.0;
  CHECK_THAT(censoring_log_rate(x, sc), WithinAbs(eta, 1e-15));
  sc.censoring = CensoringVariant::Misspecified;
  CHECK_THAT(censoring_log_rate(x, sc), WithinAbs(eta + 0.3, 1e-15));
  sc.censoring_hook = [](const SimCovariates& v) { return -v[3]; };
  CHECK_THAT(censoring_log_rate(x, sc), WithinAbs(eta - 1.0, 1e-15));
}

TEST_CASE("replications are reproducible and distinct", "[simulation]") {
  SimulationScenario sc;
  sc.n = 300;
  auto a = generate_dataset(sc, 4);
  auto b = generate_dataset(sc, 4);
  auto c = generate_dataset(sc, 5);
  CHECK(a.data.x() == b.data.x());
  CHECK(a.data.time() == b.data.time());
  CHECK(a.data.treat() == b.data.treat());
  CHECK(a.data.x() != c.data.x());
  // observed data follow the assigned arm
  for (Eigen::Index i = 0; i < a.data.n(); ++i) {
    const double t = a.data.treat()[i] ? a.t1[i] : a.t0[i];
    CHECK(a.data.time()[i] == std::min(t, a.censoring_time[i]));
    CHECK(a.data.event()[i] == (t <= a.censoring_time[i] ? 1 : 0));
  }
}

TEST_CASE("scenario validation", "[simulation]") {
  SimulationScenario sc;
  sc.gamma = 0.0;
  CHECK_THROWS_AS(sc.validate(), Error);
  sc.gamma = 1.0;
  sc.reps = 0;
  CHECK_THROWS_AS(sc.validate(), Error);
  sc.reps = 1;
  sc.L = {2.0, -1.0};
  CHECK_THROWS_AS(sc.validate(), Error);
}

TEST_CASE("marginal censoring fraction is about one half", "[simulation][published-design]") {
  for (double gamma : {1.0, 3.0, 5.0}) {
    SimulationScenario sc;
    sc.gamma = gamma;
    sc.n = 1'000'000;
    auto sim = generate_dataset(sc, 0);
    const double censored = 1.0 - sim.data.event().cast<double>().mean();
    INFO("gamma " << gamma << " censored fraction " << censored);
    CHECK(censored >= 0.47);
    CHECK(censored <= 0.53);
  }
}

TEST_CASE("overlap-tilted mean of min(T1, 2) at gamma 1", "[simulation][slow]") {
  SimulationScenario sc;
  sc.gamma = 1.0;
  sc.n = 1'000'000;
  auto sim = generate_dataset(sc, 0);
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < sim.data.n(); ++i) {
    const double h = sim.true_ps[i] * (1.0 - sim.true_ps[i]);
    num += h * std::min(sim.t1[i], 2.0);
    den += h;
  }
  CHECK_THAT(num / den, WithinAbs(1.026, 0.01));
}

TEST_CASE("truths against published values", "[simulation][slow]") {
  SimulationScenario sc3;
  sc3.gamma = 3.0;
  sc3.schemes = {WeightScheme::iptw(), WeightScheme::overlap(), WeightScheme::truncate(0.05)};
  auto t3 = compute_truth(sc3);
  CHECK_THAT(t3.at(WeightScheme::overlap(), 10.0).delta, WithinAbs(-5.404, 0.02));

  SimulationScenario sc5;
  sc5.gamma = 5.0;
  sc5.schemes = {WeightScheme::iptw(), WeightScheme::truncate(0.025), WeightScheme::truncate(0.1)};
  auto t5 = compute_truth(sc5);
  CHECK_THAT(t5.at(WeightScheme::iptw(), 2.0).mu1, WithinAbs(1.012, 0.01));

  for (const auto* t : {&t3, &t5}) {
    for (double L : {2.0, 5.0, 10.0}) {
      const auto& ip = t->at(WeightScheme::iptw(), L);
      for (const auto& e : t->entries) {
        if (e.scheme.kind != WeightKind::Truncate || e.L != L) continue;
        CHECK(e.mu1 == ip.mu1);
        CHECK(e.mu0 == ip.mu0);
        CHECK(e.delta == ip.delta);
      }
      CHECK(ip.se_delta > 0.0);
      CHECK(ip.se_delta < 0.01);
    }
  }
  try {
    t3.at(WeightScheme::symmetric_trim(0.1), 2.0);
    FAIL("expected TruthMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruthMissing);
  }
}

TEST_CASE("single replication report", "[simulation]") {
  SimulationScenario sc;
  sc.n = 300;
  sc.reps = 1;
  sc.schemes = {WeightScheme::iptw(), WeightScheme::overlap()};
  auto truth = compute_truth(sc, 100'000);
  auto rep = run_study(sc, truth);
  CHECK(rep.cells.size() == 2 * 3 * 3);
  for (const auto& c : rep.cells) {
    CHECK(c.successes + c.failures == 1);
    CHECK((c.coverage == 0.0 || c.coverage == 100.0));
  }
}

TEST_CASE("study report is independent of the worker count", "[simulation][property]") {
  SimulationScenario sc;
  sc.gamma = 3.0;
  sc.n = 250;
  sc.reps = 8;
  sc.schemes = {WeightScheme::iptw(), WeightScheme::overlap(), WeightScheme::symmetric_trim(0.1)};
  auto truth = compute_truth(sc, 100'000);
  WorkerPool one(1), four(4);
  auto a = run_study(sc, truth, &one);
  auto b = run_study(sc, truth, &four);
  auto c = run_study(sc, truth, nullptr);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    for (const auto* other : {&b, &c}) {
      const auto& x = a.cells[k];
      const auto& y = other->cells[k];
      CHECK(x.mean_estimate == y.mean_estimate);
      CHECK(x.mc_variance == y.mc_variance);
      CHECK(x.coverage == y.coverage);
      CHECK(x.mean_se == y.mean_se);
      CHECK(x.relative_efficiency == y.relative_efficiency);
    }
    const auto& cell = a.cells[k];
    CHECK(cell.coverage >= 0.0);
    CHECK(cell.coverage <= 100.0);
    if (cell.scheme == WeightScheme::iptw()) CHECK(cell.relative_efficiency.value() == 1.0);
  }
}

TEST_CASE("published reference values", "[simulation]") {
  CHECK(reference_value(1, WeightScheme::overlap(), 1.0, 5.0, Target::Delta) == -2.687);
  CHECK(reference_value(1, WeightScheme::iptw(), 5.0, 10.0, Target::Delta) == -4.862);
  CHECK(reference_value(1, WeightScheme::symmetric_trim(0.15), 5.0, 10.0, Target::Delta) == -5.604);
  CHECK(reference_value(1, WeightScheme::overlap(), 1.0, 2.0, Target::Delta) == -0.828);
  CHECK(reference_value(3, WeightScheme::overlap(), 5.0, 2.0, Target::Delta) == 5.42);
  CHECK(reference_value(4, WeightScheme::overlap(), 1.0, 2.0, Target::Delta) == 96.7);
  CHECK(reference_value(4, WeightScheme::overlap(), 3.0, 5.0, Target::Delta) == 96.1);
  CHECK(reference_value(4, WeightScheme::iptw(), 5.0, 5.0, Target::Delta) == 73.5);
  CHECK(reference_value(5, WeightScheme::overlap(), 3.0, 5.0, Target::Delta, "coverage_bootstrap") == 93.1);
  CHECK(reference_value(5, WeightScheme::overlap(), 5.0, 2.0, Target::Delta, "coverage_bootstrap") == 95.5);
  CHECK(reference_value(5, WeightScheme::overlap(), 5.0, 2.0, Target::Delta, "efficiency") == 2.00);
  CHECK_FALSE(reference_value(1, WeightScheme::overlap(), 2.0, 5.0, Target::Delta).has_value());
  CHECK(reference_table(1).size() == 33);
  CHECK(reference_table(3).size() == 33);
  CHECK(reference_table(4).size() == 33);
}
