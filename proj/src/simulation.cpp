#include "rmcst/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <boost/math/tools/roots.hpp>

#include "rmcst/error.hpp"
#include "rmcst/inference.hpp"
#include "rmcst/logistic.hpp"
#include "rmcst/pipeline.hpp"

namespace rmcst {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;   // "data"
constexpr std::uint64_t kTruthStream = 0x7472757468;  // "truth"
constexpr std::uint64_t kBootStream = 0x626f6f74;   // "boot"
constexpr std::uint64_t kCalibStream = 0x63616c6962;  // "calib"

const Eigen::Matrix3d& normal_factor() {
  static const Eigen::Matrix3d f = [] {
    Eigen::Matrix3d c = Eigen::Matrix3d::Constant(0.5);
    c.diagonal().setOnes();
    return Eigen::Matrix3d(c.llt().matrixL());
  }();
  return f;
}

double resolved_intercept(const SimulationScenario& s) {
  return s.intercept ? *s.intercept : calibrate_intercept(s.gamma);
}

}  // namespace

std::vector<WeightScheme> default_scheme_grid() {
  return {WeightScheme::iptw(),
          WeightScheme::overlap(),
          WeightScheme::symmetric_trim(0.05),
          WeightScheme::symmetric_trim(0.10),
          WeightScheme::symmetric_trim(0.15),
          WeightScheme::asymmetric_trim(0.0),
          WeightScheme::asymmetric_trim(0.01),
          WeightScheme::asymmetric_trim(0.05),
          WeightScheme::truncate(0.025),
          WeightScheme::truncate(0.05),
          WeightScheme::truncate(0.10)};
}

void SimulationScenario::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 2");
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "at least one replication is required");
  if (L.empty()) throw Error(ErrorCode::InvalidArgument, "at least one restriction time is required");
  for (double l : L) {
    if (!(l > 0.0)) throw Error(ErrorCode::NonpositiveL, "restriction time must be positive");
  }
  for (const auto& s : schemes) s.validate();
  if (variance == VarianceMethod::Bootstrap && bootstrap_B < 2) {
    throw Error(ErrorCode::InvalidB, "at least two bootstrap replicates are required");
  }
}

SimCovariates ps_slopes(double gamma) {
  SimCovariates b;
  b << 0.15, 0.3, 0.3, -0.2, -0.25, -0.25;
  return b * gamma;
}

SimCovariates draw_covariates(Rng& rng) {
  Eigen::Vector3d z;
  for (int k = 0; k < 3; ++k) z[k] = rng.normal();
  SimCovariates x;
  x.head<3>() = normal_factor() * z;
  for (int k = 3; k < 6; ++k) x[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return x;
}

double outcome_log_rate(const SimCovariates& x, int arm, double ps, OutcomeVariant variant) {
  const bool with_ps = variant == OutcomeVariant::WithPsTerm;
  if (arm == 1) {
    return -1.0 + 0.4 * x[0] + 0.2 * x[1] + 0.1 * x[2] - 0.1 * x[3] - 0.2 * x[4] - 0.3 * x[5] +
           (with_ps ? 2.0 * ps : 0.0);
  }
  return -1.4 - 0.2 * x[1] - 0.3 * x[2] - 0.5 * x[3] - 0.6 * x[4] - 0.7 * x[5] - (with_ps ? ps : 0.0);
}

double censoring_log_rate(const SimCovariates& x, const SimulationScenario& scenario) {
  SimCovariates theta;
  theta << -0.3, 0.5, 0.5, 0.2, -0.4, -0.5;
  double eta = -1.6 + theta.dot(x);
  if (scenario.censoring == CensoringVariant::Misspecified) {
    eta += scenario.censoring_hook ? scenario.censoring_hook(x) : 0.3 * x[0] * x[0];
  }
  return eta;
}

SimulatedData generate_dataset(const SimulationScenario& scenario, std::uint64_t rep) {
  scenario.validate();
  const double b0 = resolved_intercept(scenario);
  const SimCovariates slopes = ps_slopes(scenario.gamma);
  const Eigen::Index n = scenario.n;
  Rng rng(scenario.master_seed, {kDataStream, rep});

  Eigen::MatrixXd x(n, kSimCovariates);
  Eigen::VectorXi a(n), event(n);
  Eigen::VectorXd u(n), e(n), t1(n), t0(n), c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SimCovariates xi = draw_covariates(rng);
    x.row(i) = xi.transpose();
    e[i] = logistic(b0 + slopes.dot(xi));
    a[i] = rng.bernoulli(e[i]) ? 1 : 0;
    t1[i] = rng.exponential(std::exp(outcome_log_rate(xi, 1, e[i], scenario.outcome)));
    t0[i] = rng.exponential(std::exp(outcome_log_rate(xi, 0, e[i], scenario.outcome)));
    c[i] = rng.exponential(std::exp(censoring_log_rate(xi, scenario)));
    const double t = a[i] == 1 ? t1[i] : t0[i];
    u[i] = std::min(t, c[i]);
    event[i] = t <= c[i] ? 1 : 0;
  }
  std::vector<std::string> names;
  for (int k = 1; k <= kSimCovariates; ++k) names.push_back("X" + std::to_string(k));
  return {ObservationalDataset(std::move(x), std::move(a), std::move(u), std::move(event), std::move(names)),
          std::move(e), std::move(t1), std::move(t0), std::move(c)};
}

double calibrate_intercept(std::span<const double> lp) {
  if (lp.empty()) throw Error(ErrorCode::InvalidArgument, "empty calibration sample");
  auto f = [&](double b) {
    double s = 0.0;
    for (double v : lp) s += logistic(b + v);
    return s / static_cast<double>(lp.size()) - 0.5;
  };
  if (f(0.0) == 0.0) return 0.0;
  constexpr double limit = 50.0;
  double lo = -1.0, hi = 1.0;
  while (f(lo) > 0.0) {
    if (lo <= -limit) throw Error(ErrorCode::RootNotBracketed, "intercept below -50");
    lo = std::max(2.0 * lo, -limit);
  }
  while (f(hi) < 0.0) {
    if (hi >= limit) throw Error(ErrorCode::RootNotBracketed, "intercept above 50");
    hi = std::min(2.0 * hi, limit);
  }
  std::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(45), iters);
  return 0.5 * (r.first + r.second);
}

double calibrate_intercept(double gamma, std::uint64_t seed, int draws) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (draws < 1) throw Error(ErrorCode::InvalidArgument, "calibration needs at least one draw");
  const bool cacheable = seed == kCalibrationSeed && draws == kCalibrationDraws;
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard lock(mutex);
  if (cacheable) {
    if (auto it = cache.find(gamma); it != cache.end()) return it->second;
  }
  const SimCovariates slopes = ps_slopes(gamma);
  Rng rng(seed, {kCalibStream});
  std::vector<double> lp(static_cast<std::size_t>(draws));
  for (auto& v : lp) v = slopes.dot(draw_covariates(rng));
  const double b0 = calibrate_intercept(lp);
  if (cacheable) cache[gamma] = b0;
  return b0;
}

const TruthEntry& TruthTable::at(const WeightScheme& scheme, double L) const {
  for (const auto& e : entries) {
    if (e.scheme == scheme && std::abs(e.L - L) < 1e-12) return e;
  }
  throw Error(ErrorCode::TruthMissing, "no truth for " + scheme.label() + " at L=" + format_double(L));
}

TruthTable compute_truth(const SimulationScenario& scenario, long super_n) {
  scenario.validate();
  if (super_n < 2) throw Error(ErrorCode::InvalidArgument, "super-population size must be at least 2");
  const double b0 = resolved_intercept(scenario);
  const SimCovariates slopes = ps_slopes(scenario.gamma);
  const Eigen::Index N = super_n;
  Rng rng(scenario.master_seed, {kTruthStream});
  Eigen::VectorXd e(N), t1(N), t0(N);
  Eigen::VectorXi a(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const SimCovariates xi = draw_covariates(rng);
    e[i] = logistic(b0 + slopes.dot(xi));
    a[i] = rng.bernoulli(e[i]) ? 1 : 0;
    t1[i] = rng.exponential(std::exp(outcome_log_rate(xi, 1, e[i], scenario.outcome)));
    t0[i] = rng.exponential(std::exp(outcome_log_rate(xi, 0, e[i], scenario.outcome)));
  }

  TruthTable table;
  table.gamma = scenario.gamma;
  table.super_n = super_n;
  table.outcome = scenario.outcome;
  for (const auto& scheme : scenario.schemes) {
    Eigen::VectorXd h(N);
    switch (scheme.kind) {
      case WeightKind::IPTW:
      case WeightKind::Truncate:
        h.setOnes();
        break;
      case WeightKind::Overlap:
        h = (e.array() * (1.0 - e.array())).matrix();
        break;
      case WeightKind::SymmetricTrim:
      case WeightKind::AsymmetricTrim: {
        const auto keep = scheme.kind == WeightKind::SymmetricTrim ? symmetric_trim_mask(e, scheme.alpha)
                                                                     : asymmetric_trim_mask(e, a, scheme.q);
        for (Eigen::Index i = 0; i < N; ++i) h[i] = keep[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        break;
      }
    }
    const double hsum = h.sum();
    for (double L : scenario.L) {
      double s1 = 0.0, s0 = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        s1 += h[i] * std::min(t1[i], L);
        s0 += h[i] * std::min(t0[i], L);
      }
      TruthEntry t;
      t.scheme = scheme;
      t.L = L;
      t.mu1 = s1 / hsum;
      t.mu0 = s0 / hsum;
      t.delta = t.mu1 - t.mu0;
      double v1 = 0.0, v0 = 0.0, vd = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const double y1 = std::min(t1[i], L) - t.mu1, y0 = std::min(t0[i], L) - t.mu0;
        const double h2 = h[i] * h[i];
        v1 += h2 * y1 * y1;
        v0 += h2 * y0 * y0;
        vd += h2 * (y1 - y0) * (y1 - y0);
      }
      t.se_mu1 = std::sqrt(v1) / hsum;
      t.se_mu0 = std::sqrt(v0) / hsum;
      t.se_delta = std::sqrt(vd) / hsum;
      table.entries.push_back(t);
    }
  }
  return table;
}

std::string to_string(Target t) {
  switch (t) {
    case Target::Mu1: return "mu1";
    case Target::Mu0: return "mu0";
    case Target::Delta: return "delta";
  }
  return "?";
}

const ReportCell& SimulationReport::at(const WeightScheme& scheme, double L, Target target) const {
  for (const auto& c : cells) {
    if (c.scheme == scheme && std::abs(c.L - L) < 1e-12 && c.target == target) return c;
  }
  throw Error(ErrorCode::TruthMissing, "no report cell for " + scheme.label());
}

namespace {

struct CellDraw {
  std::array<double, 3> est{};
  std::array<double, 3> se{};
  bool boot_ok = false;
  std::array<double, 3> boot_lo{};
  std::array<double, 3> boot_hi{};
};

// draws[s] is empty when scheme s failed in this replication.
using RepDraws = std::vector<std::vector<CellDraw>>;

RepDraws run_replication(const SimulationScenario& sc, std::uint64_t rep) {
  const std::size_t S = sc.schemes.size();
  RepDraws out(S);
  const SimulatedData sim = generate_dataset(sc, rep);
  Estimator est(sim.data);
  for (std::size_t s = 0; s < S; ++s) {
    try {
      const Analysis a = est.run(sc.schemes[s], sc.L, true);
      for (const auto& r : a.results) {
        CellDraw d;
        d.est = {r.mu1, r.mu0, r.delta};
        d.se = {*r.se_mu1, *r.se_mu0, *r.se};
        out[s].push_back(d);
      }
    } catch (const Error&) {
      out[s].clear();
    }
  }
  if (sc.variance == VarianceMethod::Bootstrap) {
    BootstrapOptions bo;
    bo.replicates = sc.bootstrap_B;
    bo.seed = Rng(sc.master_seed, {kBootStream, rep}).below(std::numeric_limits<std::uint64_t>::max());
    bo.throw_on_excess_failures = false;
    std::vector<BootstrapResult> boot;
    try {
      boot = bootstrap_ci(sim.data, sc.schemes, sc.L, bo);
    } catch (const Error&) {
      return out;
    }
    for (std::size_t s = 0; s < S; ++s) {
      if (out[s].empty() || !boot[s].usable) continue;
      for (std::size_t k = 0; k < sc.L.size(); ++k) {
        const auto& b = boot[s].per_L[k];
        auto& d = out[s][k];
        d.boot_ok = true;
        d.boot_lo = {b.mu1.low, b.mu0.low, b.delta.low};
        d.boot_hi = {b.mu1.high, b.mu0.high, b.delta.high};
      }
    }
  }
  return out;
}

}  // namespace

SimulationReport run_study(const SimulationScenario& scenario, const TruthTable& truth, const WorkerPool* pool) {
  scenario.validate();
  for (const auto& s : scenario.schemes) {
    for (double l : scenario.L) truth.at(s, l);
  }
  SimulationScenario sc = scenario;
  if (!sc.intercept) sc.intercept = calibrate_intercept(sc.gamma);

  const auto R = static_cast<std::size_t>(sc.reps);
  std::vector<RepDraws> draws(R);
  auto body = [&](std::size_t r) {
    try {
      draws[r] = run_replication(sc, r);
    } catch (const Error&) {
      draws[r] = RepDraws(sc.schemes.size());
    }
  };
  if (pool) {
    pool->parallel_for(R, body);
  } else {
    for (std::size_t r = 0; r < R; ++r) body(r);
  }

  SimulationReport report;
  report.gamma = sc.gamma;
  report.n = sc.n;
  report.reps = sc.reps;
  const std::array<Target, 3> targets{Target::Mu1, Target::Mu0, Target::Delta};
  for (std::size_t s = 0; s < sc.schemes.size(); ++s) {
    for (std::size_t k = 0; k < sc.L.size(); ++k) {
      const TruthEntry& te = truth.at(sc.schemes[s], sc.L[k]);
      for (std::size_t t = 0; t < 3; ++t) {
        ReportCell c;
        c.scheme = sc.schemes[s];
        c.L = sc.L[k];
        c.target = targets[t];
        c.truth = t == 0 ? te.mu1 : t == 1 ? te.mu0 : te.delta;
        double sum = 0.0, sum_se = 0.0, sum_var = 0.0;
        int covered = 0, boot_n = 0, boot_covered = 0;
        std::vector<double> values;
        for (std::size_t r = 0; r < R; ++r) {
          const auto& cell = draws[r][s];
          if (cell.empty()) continue;
          const CellDraw& d = cell[k];
          values.push_back(d.est[t]);
          sum += d.est[t];
          sum_se += d.se[t];
          sum_var += d.se[t] * d.se[t];
          if (std::abs(d.est[t] - c.truth) <= kWaldZ * d.se[t]) ++covered;
          if (d.boot_ok) {
            ++boot_n;
            if (d.boot_lo[t] <= c.truth && c.truth <= d.boot_hi[t]) ++boot_covered;
          }
        }
        c.successes = static_cast<int>(values.size());
        c.failures = sc.reps - c.successes;
        if (c.successes > 0) {
          const double m = static_cast<double>(c.successes);
          c.mean_estimate = sum / m;
          c.bias = c.mean_estimate - c.truth;
          double ss = 0.0;
          for (double v : values) ss += (v - c.mean_estimate) * (v - c.mean_estimate);
          c.mc_variance = c.successes > 1 ? ss / (m - 1.0) : 0.0;
          c.coverage = 100.0 * covered / m;
          c.mean_se = sum_se / m;
          c.mean_closed_variance = sum_var / m;
        }
        if (sc.variance == VarianceMethod::Bootstrap && boot_n > 0) {
          c.bootstrap_coverage = 100.0 * boot_covered / static_cast<double>(boot_n);
        }
        report.cells.push_back(c);
      }
    }
  }
  // Relative efficiency against the IPTW column of the same (L, target).
  for (auto& c : report.cells) {
    for (const auto& ref : report.cells) {
      if (ref.scheme.kind == WeightKind::IPTW && ref.L == c.L && ref.target == c.target) {
        if (c.mc_variance > 0.0 && ref.successes > 1) c.relative_efficiency = ref.mc_variance / c.mc_variance;
        if (c.scheme.kind == WeightKind::IPTW && c.successes > 0) c.relative_efficiency = 1.0;
        break;
      }
    }
  }
  return report;
}

}  // namespace rmcst
