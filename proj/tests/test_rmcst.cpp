#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <sstream>

#include "rmcst/error.hpp"
#include "rmcst/estimator.hpp"
#include "rmcst/pipeline.hpp"
#include "rmcst/simulation.hpp"
#include "support.hpp"

using namespace rmcst;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Arm-1 units with the given times and events plus one arm-0 filler unit.
ObservationalDataset arm_one(const std::vector<double>& t, const std::vector<int>& e) {
  const auto n = static_cast<Eigen::Index>(t.size()) + 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
  Eigen::VectorXi a = Eigen::VectorXi::Ones(n), ev(n);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    u[i] = t[static_cast<std::size_t>(i)];
    ev[i] = e[static_cast<std::size_t>(i)];
    x(i, 0) = static_cast<double>(i);
  }
  a[n - 1] = 0;
  u[n - 1] = 1.0;
  ev[n - 1] = 1;
  return ObservationalDataset(x, a, u, ev);
}

WeightedCumulativeHazard single_jump(double at, double size) {
  WeightedCumulativeHazard h;
  h.event_times = {at};
  h.numerators = {size};
  h.denominators = {1.0};
  h.hazard = StepFunction({at}, {size}, 0.0);
  h.last_followup = at;
  return h;
}

WeightedCumulativeHazard flat(double last) {
  WeightedCumulativeHazard h;
  h.last_followup = last;
  return h;
}

}  // namespace

TEST_CASE("single unit with an event", "[rmcst]") {
  auto d = arm_one({1.0}, {1});
  auto h = weighted_nelson_aalen(d, Eigen::VectorXd::Ones(2), testing::no_censoring(1), 1);
  CHECK(h.hazard.eval(0.999) == 0.0);
  CHECK(h.hazard.eval(1.0) == 1.0);
  CHECK(h.hazard.eval(5.0) == 1.0);
}

TEST_CASE("five units reduce to classical Nelson-Aalen", "[rmcst]") {
  std::vector<double> t{2.5, 0.7, 4.1, 1.9, 3.3};
  auto d = arm_one(t, {1, 1, 1, 1, 1});
  auto h = weighted_nelson_aalen(d, Eigen::VectorXd::Ones(6), testing::no_censoring(1), 1);
  std::vector<double> sorted = t;
  std::sort(sorted.begin(), sorted.end());
  double cum = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    int at_risk = 0;
    for (double v : t) at_risk += v >= sorted[k];
    cum += 1.0 / at_risk;
    CHECK_THAT(h.hazard.eval(sorted[k]), WithinAbs(cum, 1e-15));
  }
  CHECK(h.event_times == sorted);
}

TEST_CASE("rescaling weights by 7 leaves the hazard unchanged", "[rmcst][property]") {
  std::mt19937_64 gen(7);
  auto d = testing::random_dataset(gen, 200, 3);
  auto cens = fit_censoring_cox(d);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Eigen::VectorXd w(d.n());
  for (auto& v : w) v = u(gen);
  for (int arm = 0; arm < 2; ++arm) {
    auto h1 = weighted_nelson_aalen(d, w, cens, arm);
    auto h7 = weighted_nelson_aalen(d, Eigen::VectorXd(7.0 * w), cens, arm);
    REQUIRE(h1.event_times == h7.event_times);
    for (double t : h1.event_times) CHECK_THAT(h7.hazard.eval(t), WithinAbs(h1.hazard.eval(t), 1e-12));
  }
}

TEST_CASE("restricted mean by exact integration", "[rmcst]") {
  auto none = flat(5.0);
  auto r = rmcst_estimate(none, none, 2.0);
  CHECK(r.mu1 == 2.0);
  CHECK(r.mu0 == 2.0);
  CHECK(r.delta == 0.0);

  auto jump = single_jump(1.0, 1.0);
  auto r2 = rmcst_estimate(jump, none, 2.0);
  CHECK_THAT(r2.mu1, WithinAbs(1.0 + std::exp(-1.0), 1e-15));
  CHECK_THAT(r2.mu1, WithinAbs(1.3679, 5e-5));
  CHECK_THAT(r2.delta, WithinAbs(r2.mu1 - 2.0, 1e-15));
  CHECK(r2.beyond_followup[1]);
  CHECK_FALSE(r2.beyond_followup[0]);

  for (double L : {0.0, -1.0}) {
    try {
      rmcst_estimate(jump, none, L);
      FAIL("expected NonpositiveL");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonpositiveL);
    }
  }
}

TEST_CASE("survival curve on a grid", "[rmcst]") {
  auto h = single_jump(1.0, 0.5);
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
  auto s = counterfactual_survival_curve(h, grid);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 1.0);
  CHECK_THAT(s[2] / s[1], WithinRel(std::exp(-0.5), 1e-15));
  CHECK(s[3] == s[2]);

  std::ostringstream os;
  write_survival_curve(os, h);
  CHECK(os.str() == "time,survival\n0,1\n1," + format_double(std::exp(-0.5)) + "\n");
}

TEST_CASE("all datasets of at most six units with distinct times", "[rmcst][property][oracle]") {
  const std::vector<double> base{0.4, 0.9, 1.3, 2.2, 2.9, 3.6};
  const std::vector<double> Ls{0.2, 0.9, 1.0, 2.5, 3.6, 5.0};
  long checked = 0;
  for (std::size_t k = 1; k <= 6; ++k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (unsigned pattern = 0; pattern < (1u << k); ++pattern) {
      // every row order of the k units
      do {
        std::vector<double> t(k);
        std::vector<int> e(k);
        for (std::size_t i = 0; i < k; ++i) {
          t[i] = base[perm[i]];
          e[i] = (pattern >> perm[i]) & 1u;
        }
        auto d = arm_one(t, e);
        const Eigen::VectorXd w = Eigen::VectorXd::Ones(d.n());
        auto h1 = weighted_nelson_aalen(d, w, testing::no_censoring(1), 1);
        auto h0 = weighted_nelson_aalen(d, w, testing::no_censoring(1), 0);
        for (double L : Ls) {
          auto r = rmcst_estimate(h1, h0, L);
          CHECK_THAT(r.mu1, WithinAbs(testing::brute_rmst(t, e, L), 1e-13));
          ++checked;
        }
      } while (k <= 4 && std::next_permutation(perm.begin(), perm.end()));
      std::sort(perm.begin(), perm.end());
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("bounded and 1-Lipschitz in the restriction time", "[rmcst][property]") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = testing::random_dataset(gen, 150, 3, 1.0);
    Estimator est(d);
    for (const auto& scheme : {WeightScheme::iptw(), WeightScheme::overlap(), WeightScheme::truncate(0.05)}) {
      std::vector<double> L;
      for (double l = 0.05; l < 8.0; l += 0.173) L.push_back(l);
      auto an = est.run(scheme, L, false);
      for (std::size_t k = 0; k < L.size(); ++k) {
        const auto& r = an.results[k];
        CHECK(r.mu1 >= 0.0);
        CHECK(r.mu1 <= L[k]);
        CHECK(r.mu0 >= 0.0);
        CHECK(r.mu0 <= L[k]);
        CHECK(std::abs(r.delta) <= L[k]);
        if (k > 0) {
          const double dl = L[k] - L[k - 1];
          for (double diff : {r.mu1 - an.results[k - 1].mu1, r.mu0 - an.results[k - 1].mu0}) {
            CHECK(diff >= 0.0);
            CHECK(diff <= dl + 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("jumps only at included event times of the arm", "[rmcst][property]") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = testing::random_dataset(gen, 200, 2, 1.5);
    std::vector<double> L{1.0};
    auto an = analyze(d, WeightScheme::symmetric_trim(0.1), L, false);
    for (int arm = 0; arm < 2; ++arm) {
      std::set<double> allowed;
      for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (d.treat()[i] == arm && d.event()[i] == 1 && an.weights.included[i]) allowed.insert(d.time()[i]);
      }
      const auto& h = an.hazards[arm];
      CHECK(std::set<double>(h.event_times.begin(), h.event_times.end()) == allowed);
      CHECK(h.hazard.is_nondecreasing());
      for (double den : h.denominators) CHECK(den > 0.0);
    }
  }
}

TEST_CASE("Hajek invariance through the pipeline quantities", "[rmcst][property]") {
  std::mt19937_64 gen(19);
  for (int rep = 0; rep < 10; ++rep) {
    auto d = testing::random_dataset(gen, 200, 3, 1.0);
    auto cens = fit_censoring_cox(d);
    auto w = compute_weights(d, fit_logistic(d), WeightScheme::iptw());
    for (double c : {1e-3, 0.37, 7.0, 1e4}) {
      auto a1 = weighted_nelson_aalen(d, w.weights, cens, 1);
      auto a0 = weighted_nelson_aalen(d, w.weights, cens, 0);
      auto b1 = weighted_nelson_aalen(d, Eigen::VectorXd(c * w.weights), cens, 1);
      auto b0 = weighted_nelson_aalen(d, Eigen::VectorXd(c * w.weights), cens, 0);
      for (double L : {1.0, 2.0, 5.0}) {
        auto ra = rmcst_estimate(a1, a0, L);
        auto rb = rmcst_estimate(b1, b0, L);
        CHECK_THAT(rb.mu1, WithinAbs(ra.mu1, 1e-12));
        CHECK_THAT(rb.mu0, WithinAbs(ra.mu0, 1e-12));
        CHECK_THAT(rb.delta, WithinAbs(ra.delta, 1e-12));
      }
    }
  }
}

TEST_CASE("censoring survival uses the left limit at event times", "[rmcst]") {
  // Arm 1: censoring at t=1 and an event at t=1 for another unit. The event's
  // weight must use K_C(1-) = 1.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
  x(1, 0) = 1.0;
  Eigen::VectorXi a(4), e(4);
  a << 1, 1, 1, 0;
  e << 0, 1, 1, 1;
  Eigen::VectorXd t(4);
  t << 1.0, 1.0, 2.0, 1.0;
  ObservationalDataset d(x, a, t, e);
  CensoringFit f = testing::no_censoring(1);
  f.arms[1].baseline = StepFunction({1.0}, {0.5}, 0.0);
  auto h = weighted_nelson_aalen(d, Eigen::VectorXd::Ones(4), f, 1);
  CHECK_THAT(h.hazard.eval(1.0), WithinAbs(1.0 / 3.0, 1e-15));
  // At t=2 the surviving unit carries 1 / K_C(2-) = exp(0.5).
  CHECK_THAT(h.hazard.eval(2.0), WithinAbs(1.0 / 3.0 + 1.0, 1e-15));
  CHECK_THAT(h.numerators[1], WithinRel(std::exp(0.5), 1e-15));
}

TEST_CASE("arm without positive weight", "[rmcst]") {
  auto d = arm_one({1.0, 2.0}, {1, 1});
  Eigen::VectorXd w(3);
  w << 0.0, 0.0, 1.0;
  try {
    weighted_nelson_aalen(d, w, testing::no_censoring(1), 1);
    FAIL("expected ZeroWeightArm");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ZeroWeightArm);
  }
}

TEST_CASE("tied event times form one jump", "[rmcst]") {
  auto d = arm_one({1.0, 1.0, 2.0, 1.0}, {1, 1, 1, 0});
  auto h = weighted_nelson_aalen(d, Eigen::VectorXd::Ones(5), testing::no_censoring(1), 1);
  REQUIRE(h.event_times.size() == 2);
  CHECK(h.numerators[0] == 2.0);
  CHECK(h.denominators[0] == 4.0);
  CHECK_THAT(h.hazard.eval(1.0), WithinAbs(0.5, 1e-15));
}

TEST_CASE("series and exact risk sums agree", "[rmcst][oracle]") {
  for (double gamma : {1.0, 5.0}) {
    SimulationScenario sc;
    sc.gamma = gamma;
    sc.n = 4000;
    auto sim = generate_dataset(sc, 3);
    const auto& d = sim.data;
    auto cens = fit_censoring_cox(d);
    auto w = compute_weights(d, fit_logistic(d), WeightScheme::iptw());
    for (int arm = 0; arm < 2; ++arm) {
      auto exact = weighted_nelson_aalen(d, w.weights, cens, arm, RiskSumMethod::Exact);
      auto series = weighted_nelson_aalen(d, w.weights, cens, arm, RiskSumMethod::Series);
      REQUIRE(exact.event_times == series.event_times);
      for (std::size_t j = 0; j < exact.denominators.size(); ++j) {
        CHECK_THAT(series.denominators[j], WithinRel(exact.denominators[j], 1e-12));
      }
      for (double L : {2.0, 5.0, 10.0}) {
        CHECK_THAT(series.area_to(L), WithinAbs(exact.area_to(L), 1e-12));
      }
    }
  }
}
