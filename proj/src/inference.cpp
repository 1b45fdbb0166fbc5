#include "rmcst/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>

#include "rmcst/error.hpp"
#include "rmcst/rng.hpp"

namespace rmcst {

double InfluenceContributions::variance() const {
  const auto n = static_cast<double>(total.size());
  return n > 0 ? total.squaredNorm() / (n * n) : 0.0;
}

namespace {

// Unscaled per-unit linearization of mu^(a)(L) for every L.
struct ArmTerms {
  std::vector<Eigen::VectorXd> hazard;  // weighted Nelson-Aalen increments
  std::vector<Eigen::VectorXd> baseline;  // censoring Breslow baseline
};

ArmTerms arm_terms(const ObservationalDataset& data, const WeightAssignment& w, const CensoringFit& censoring,
                   const WeightedCumulativeHazard& haz, std::span<const double> L, const std::vector<double>& mu) {
  const int arm = haz.arm;
  const CoxFit& cox = censoring.arms.at(static_cast<std::size_t>(arm));
  const Eigen::Index n = data.n();
  const auto& time = data.time();
  const auto& event = data.event();
  const std::size_t K = L.size();

  ArmTerms out;
  out.hazard.assign(K, Eigen::VectorXd::Zero(n));
  out.baseline.assign(K, Eigen::VectorXd::Zero(n));

  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> units;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.treat()[i] != arm) continue;
    if (w.included[static_cast<std::size_t>(i)]) r[i] = std::exp(cox.theta.dot(data.x().row(i).transpose()));
    if (w.weights[i] > 0.0) units.push_back(i);
  }
  std::stable_sort(units.begin(), units.end(), [&](auto a, auto b) { return time[a] < time[b]; });

  const auto& u = haz.event_times;
  const std::size_t m = u.size();
  std::vector<double> lam_left(m), dlam(m), q(m), M(m);
  double surv_prev = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    lam_left[j] = cox.baseline.eval(u[j], Side::Left);
    dlam[j] = haz.numerators[j] / haz.denominators[j];
    q[j] = dlam[j] / haz.denominators[j];
    M[j] = j == 0 ? u[0] : M[j - 1] + surv_prev * (u[j] - u[j - 1]);
    surv_prev = std::exp(-haz.hazard.values()[j]);
  }
  std::vector<std::size_t> JL(K);
  for (std::size_t k = 0; k < K; ++k) {
    JL[k] = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), L[k]) - u.begin());
  }
  std::vector<std::size_t> by_cut(K);
  std::iota(by_cut.begin(), by_cut.end(), 0);
  std::stable_sort(by_cut.begin(), by_cut.end(), [&](auto a, auto b) { return JL[a] < JL[b]; });
  const std::size_t jmax = K ? JL[by_cut.back()] : 0;

  // Pass 1: sensitivity of each increment to the censoring baseline.
  std::vector<double> R(m, 0.0), RN(m, 0.0);
  {
    std::size_t last = 0;
    for (auto i : units) {
      while (last < m && u[last] <= time[i]) ++last;
      const double wi = w.weights[i], ri = r[i];
      for (std::size_t j = 0; j < last; ++j) R[j] += ri * wi * std::exp(lam_left[j] * ri);
      if (event[i] == 1) RN[last - 1] += ri * wi * std::exp(lam_left[last - 1] * ri);
    }
  }

  // Pass 2: hazard martingale terms.
  {
    std::size_t last = 0;
    std::vector<double> p1(K), p2(K);
    for (auto i : units) {
      while (last < m && u[last] <= time[i]) ++last;
      const double wi = w.weights[i], ri = r[i];
      const std::size_t jend = std::min(last, jmax);
      double s1 = 0.0, s2 = 0.0, f_event = 0.0;
      std::size_t ptr = 0;
      for (std::size_t j = 0; j < jend; ++j) {
        while (ptr < K && std::min(last, JL[by_cut[ptr]]) == j) {
          p1[by_cut[ptr]] = s1;
          p2[by_cut[ptr]] = s2;
          ++ptr;
        }
        const double f = wi * std::exp(lam_left[j] * ri);
        s1 += f * q[j];
        s2 += M[j] * f * q[j];
        if (j + 1 == last) f_event = f;
      }
      for (; ptr < K; ++ptr) {
        p1[by_cut[ptr]] = s1;
        p2[by_cut[ptr]] = s2;
      }
      for (std::size_t k = 0; k < K; ++k) {
        double v = mu[k] * p1[k] - p2[k];
        if (event[i] == 1 && last - 1 < JL[k]) {
          const std::size_t e = last - 1;
          v -= (mu[k] - M[e]) * f_event / haz.denominators[e];
        }
        out.hazard[k][i] = v;
      }
    }
  }

  // Censoring baseline terms.
  if (!cox.degenerate && !cox.event_times.empty()) {
    std::vector<double> E(m), PE(m + 1, 0.0), PME(m + 1, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      E[j] = (RN[j] - dlam[j] * R[j]) / haz.denominators[j];
      PE[j + 1] = PE[j] + E[j];
      PME[j + 1] = PME[j] + M[j] * E[j];
    }
    const auto& v = cox.event_times;
    const std::size_t S = v.size();
    std::vector<std::size_t> start(S);
    for (std::size_t s = 0; s < S; ++s) {
      start[s] = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), v[s]) - u.begin());
    }
    std::vector<double> F(S), H(S);
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const std::size_t b = start[s], e = JL[k];
        F[s] = b < e ? mu[k] * (PE[e] - PE[b]) - (PME[e] - PME[b]) : 0.0;
        const double s0 = cox.risk_sums[s];
        acc += F[s] * (cox.event_counts[s] / s0) / s0;
        H[s] = acc;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        if (data.treat()[i] != arm || !w.included[static_cast<std::size_t>(i)]) continue;
        const auto ns = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), time[i]) - v.begin());
        if (ns == 0) continue;
        double val = r[i] * H[ns - 1];
        if (event[i] == 0) val -= F[ns - 1] / cox.risk_sums[ns - 1];
        out.baseline[k][i] = val;
      }
    }
  }
  return out;
}

// Projection of the propensity-score estimation error: G' I^{-1} S_i.
Eigen::VectorXd ps_correction(const ObservationalDataset& data, const WeightAssignment& w,
                              const Eigen::VectorXd& hazard_term, const Eigen::LDLT<Eigen::MatrixXd>& info) {
  const Eigen::Index n = data.n(), p = data.p();
  Eigen::VectorXd G = Eigen::VectorXd::Zero(p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = w.log_weight_slope[i];
    if (s == 0.0 || hazard_term[i] == 0.0) continue;
    const double c = hazard_term[i] * s;
    G[0] += c;
    G.tail(p) += c * data.x().row(i).transpose();
  }
  const Eigen::VectorXd v = info.solve(G);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < w.ps_rows.size(); ++k) {
    const Eigen::Index i = w.ps_rows[k];
    const double resid = data.treat()[i] - w.ps_used.scores[static_cast<Eigen::Index>(k)];
    out[i] = resid * (v[0] + data.x().row(i).dot(v.tail(p)));
  }
  return out;
}

InfluenceContributions scaled(const Eigen::VectorXd& beta, const Eigen::VectorXd& theta, double n) {
  InfluenceContributions c;
  c.psi_beta = n * beta;
  c.psi_theta = n * theta;
  c.total = c.psi_beta + c.psi_theta;
  return c;
}

}  // namespace

std::vector<TargetInfluence> influence_contributions(const ObservationalDataset& data, const WeightAssignment& w,
                                                     const CensoringFit& censoring,
                                                     const WeightedCumulativeHazard& haz1,
                                                     const WeightedCumulativeHazard& haz0, std::span<const double> L) {
  if (w.weights.size() != data.n()) throw Error(ErrorCode::DimensionMismatch, "weights do not match the dataset");
  const std::size_t K = L.size();
  std::vector<double> mu1(K), mu0(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(L[k] > 0.0)) throw Error(ErrorCode::NonpositiveL, "restriction time must be positive");
    mu1[k] = std::clamp(haz1.area_to(L[k]), 0.0, L[k]);
    mu0[k] = std::clamp(haz0.area_to(L[k]), 0.0, L[k]);
  }
  const ArmTerms t1 = arm_terms(data, w, censoring, haz1, L, mu1);
  const ArmTerms t0 = arm_terms(data, w, censoring, haz0, L, mu0);

  Eigen::MatrixXd xr(static_cast<Eigen::Index>(w.ps_rows.size()), data.p());
  for (std::size_t k = 0; k < w.ps_rows.size(); ++k) xr.row(static_cast<Eigen::Index>(k)) = data.x().row(w.ps_rows[k]);
  const Eigen::LDLT<Eigen::MatrixXd> info(logistic_information(xr, w.ps_used.scores));
  if (info.info() != Eigen::Success || !info.isPositive()) {
    throw Error(ErrorCode::DegenerateVariance, "propensity information matrix is not positive definite");
  }

  const auto n = static_cast<double>(data.n());
  std::vector<TargetInfluence> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::VectorXd b1 = t1.hazard[k] + ps_correction(data, w, t1.hazard[k], info);
    const Eigen::VectorXd b0 = t0.hazard[k] + ps_correction(data, w, t0.hazard[k], info);
    out[k].L = L[k];
    out[k].mu1 = scaled(b1, t1.baseline[k], n);
    out[k].mu0 = scaled(b0, t0.baseline[k], n);
    out[k].delta = scaled(b1 - b0, t1.baseline[k] - t0.baseline[k], n);
  }
  return out;
}

void attach_closed_form(RmcstResult& result, const TargetInfluence& influence) {
  const double v = influence.delta.variance();
  if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateVariance, "closed-form variance is not finite");
  result.se = std::sqrt(v);
  result.se_mu1 = std::sqrt(influence.mu1.variance());
  result.se_mu0 = std::sqrt(influence.mu0.variance());
  result.ci_low = result.delta - kWaldZ * *result.se;
  result.ci_high = result.delta + kWaldZ * *result.se;
}

double closed_form_variance(const ObservationalDataset& data, const WeightAssignment& w,
                            const CensoringFit& censoring, const RmcstResult& result) {
  const auto h1 = weighted_nelson_aalen(data, w, censoring, 1);
  const auto h0 = weighted_nelson_aalen(data, w, censoring, 0);
  const double L[] = {result.L};
  return influence_contributions(data, w, censoring, h1, h0, L).front().delta.variance();
}

namespace {

BootstrapInterval summarize(std::vector<double> v) {
  BootstrapInterval b;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  b.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  b.low = quantile(v, 0.025);
  b.high = quantile(std::move(v), 0.975);
  return b;
}

}  // namespace

std::vector<BootstrapResult> bootstrap_ci(const ObservationalDataset& data, std::span<const WeightScheme> schemes,
                                          std::span<const double> L, const BootstrapOptions& options,
                                          const WorkerPool* pool) {
  if (options.replicates < 2) throw Error(ErrorCode::InvalidB, "at least two bootstrap replicates are required");
  for (const auto& s : schemes) s.validate();
  for (double l : L) {
    if (!(l > 0.0)) throw Error(ErrorCode::NonpositiveL, "restriction time must be positive");
  }
  const auto B = static_cast<std::size_t>(options.replicates);
  const std::size_t S = schemes.size(), K = L.size();
  // draws[b][s] holds (mu1, mu0) per L, empty when the replicate failed.
  std::vector<std::vector<std::vector<std::array<double, 2>>>> draws(B, std::vector<std::vector<std::array<double, 2>>>(S));

  auto one = [&](std::size_t b) {
    Rng rng(options.seed, {0x626f6f74ULL, b});
    const auto n = static_cast<std::uint64_t>(data.n());
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = static_cast<Eigen::Index>(rng.below(n));
    std::optional<ObservationalDataset> sample;
    try {
      sample.emplace(data.subset(rows));
    } catch (const Error&) {
      return;
    }
    Estimator est(*sample, options.estimation);
    for (std::size_t s = 0; s < S; ++s) {
      try {
        const Analysis a = est.run(schemes[s], L, false);
        auto& d = draws[b][s];
        for (const auto& r : a.results) d.push_back({r.mu1, r.mu0});
      } catch (const Error&) {
      }
    }
  };
  if (pool) {
    pool->parallel_for(B, one);
  } else {
    for (std::size_t b = 0; b < B; ++b) one(b);
  }

  std::vector<BootstrapResult> out(S);
  for (std::size_t s = 0; s < S; ++s) {
    BootstrapResult& res = out[s];
    res.scheme = schemes[s];
    res.replicates = options.replicates;
    std::vector<std::size_t> ok;
    for (std::size_t b = 0; b < B; ++b) {
      if (draws[b][s].size() == K) ok.push_back(b);
    }
    res.failed = static_cast<int>(B - ok.size());
    if (static_cast<double>(res.failed) > options.max_failed_fraction * static_cast<double>(B) || ok.size() < 2) {
      if (options.throw_on_excess_failures) {
        throw Error(ErrorCode::TooManyFailedReplicates,
                    std::to_string(res.failed) + " of " + std::to_string(B) + " bootstrap replicates failed for " +
                        schemes[s].label());
      }
      res.usable = false;
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> m1, m0, d;
      for (auto b : ok) {
        m1.push_back(draws[b][s][k][0]);
        m0.push_back(draws[b][s][k][1]);
        d.push_back(draws[b][s][k][0] - draws[b][s][k][1]);
      }
      res.per_L.push_back({L[k], summarize(std::move(m1)), summarize(std::move(m0)), summarize(std::move(d))});
    }
  }
  return out;
}

BootstrapResult bootstrap_ci(const ObservationalDataset& data, const WeightScheme& scheme, std::span<const double> L,
                             const BootstrapOptions& options, const WorkerPool* pool) {
  const WeightScheme s[] = {scheme};
  return bootstrap_ci(data, s, L, options, pool).front();
}

}  // namespace rmcst
