#include "rmcst/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rmcst/error.hpp"

namespace rmcst {

double WeightedCumulativeHazard::area_to(double t) const {
  if (t <= 0.0) return 0.0;
  double area = 0.0;
  double prev_time = 0.0;
  double surv = std::exp(-hazard.value_before_first_knot());
  const auto& knots = hazard.knots();
  const auto& values = hazard.values();
  for (std::size_t k = 0; k < knots.size() && knots[k] <= t; ++k) {
    area += surv * (knots[k] - prev_time);
    prev_time = knots[k];
    surv = std::exp(-values[k]);
  }
  return area + surv * (t - prev_time);
}

namespace {

constexpr double kSeriesWorkThreshold = 2e7;
constexpr int kMaxSeriesTerms = 600;

// Terms needed so that x^K / K! < 1e-17 e^x for every x in [0, s_max]; 0 when
// the expansion is not worth it.
int series_terms(double s_max) {
  if (!(s_max >= 0.0) || s_max > 200.0) return 0;
  for (int k = std::max(8, static_cast<int>(2.0 * s_max)); k <= kMaxSeriesTerms; ++k) {
    const double log_term = (s_max > 0.0 ? k * std::log(s_max) : -1e300) - std::lgamma(k + 1.0) - s_max;
    if (log_term < std::log(1e-17)) return k;
  }
  return 0;
}

}  // namespace

WeightedCumulativeHazard weighted_nelson_aalen(const ObservationalDataset& data, const Eigen::VectorXd& weights,
                                               const CensoringFit& censoring, int arm, RiskSumMethod method) {
  if (weights.size() != data.n()) throw Error(ErrorCode::DimensionMismatch, "weights do not match the dataset");
  const CoxFit& cox = censoring.arms.at(static_cast<std::size_t>(arm));

  std::vector<Eigen::Index> units;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (data.treat()[i] == arm && weights[i] > 0.0) units.push_back(i);
  }
  if (units.empty()) throw Error(ErrorCode::ZeroWeightArm, "arm " + std::to_string(arm) + " has no positively weighted units");
  const auto& time = data.time();
  std::stable_sort(units.begin(), units.end(), [&](auto a, auto b) { return time[a] < time[b]; });

  WeightedCumulativeHazard out;
  out.arm = arm;
  out.last_followup = time[units.back()];
  for (auto i : units) {
    if (data.event()[i] == 1 && (out.event_times.empty() || out.event_times.back() != time[i])) {
      out.event_times.push_back(time[i]);
    }
  }
  const std::size_t m = out.event_times.size();
  std::vector<double> lam_left(m);
  for (std::size_t j = 0; j < m; ++j) lam_left[j] = cox.baseline.eval(out.event_times[j], Side::Left);
  std::vector<double> r(units.size());
  for (std::size_t k = 0; k < units.size(); ++k) r[k] = std::exp(cox.theta.dot(data.x().row(units[k]).transpose()));

  out.numerators.assign(m, 0.0);
  out.denominators.assign(m, 0.0);
  // Event positions: unit k has its own event at index last_k - 1.
  std::vector<std::size_t> last(units.size());
  {
    std::size_t l = 0;
    for (std::size_t k = 0; k < units.size(); ++k) {
      while (l < m && out.event_times[l] <= time[units[k]]) ++l;
      last[k] = l;
    }
  }
  for (std::size_t k = 0; k < units.size(); ++k) {
    const auto i = units[k];
    if (data.event()[i] == 1) out.numerators[last[k] - 1] += weights[i] * std::exp(lam_left[last[k] - 1] * r[k]);
  }

  // Largest exponent Lambda_0(u_j-) r_i any unit needs: its own last event time.
  double s_max = 0.0;
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (last[k] > 0) s_max = std::max(s_max, lam_left[last[k] - 1] * r[k]);
  }
  int terms = 0;
  if (method != RiskSumMethod::Exact && m > 0 && lam_left.back() > 0.0) {
    const bool large = static_cast<double>(units.size()) * static_cast<double>(m) > kSeriesWorkThreshold;
    if (method == RiskSumMethod::Series || large) terms = series_terms(s_max);
  }

  if (terms > 0) {
    // D_j = sum_p (Lambda_j / ref)^p A_p with A_p = sum_{U_i >= u_j} w_i (ref r_i)^p / p!.
    // ref is halved (an exact rescaling of A_p by 2^-p) whenever Lambda_j drops
    // to ref / 2, so ref r_i < 2 s_max for every unit in the risk set.
    const auto K = static_cast<std::size_t>(terms);
    std::vector<double> A(K + 1, 0.0);
    double ref = lam_left.back();
    std::size_t k_unit = units.size();
    for (std::size_t j = m; j-- > 0;) {
      const double lam = lam_left[j];
      while (lam > 0.0 && lam <= 0.5 * ref) {
        ref *= 0.5;
        for (std::size_t p = 1; p <= K; ++p) A[p] = std::ldexp(A[p], -static_cast<int>(p));
      }
      while (k_unit > 0 && time[units[k_unit - 1]] >= out.event_times[j]) {
        --k_unit;
        double term = weights[units[k_unit]];
        A[0] += term;
        if (lam == 0.0) continue;
        const double s = ref * r[k_unit];
        for (std::size_t p = 1; p <= K; ++p) {
          term *= s / static_cast<double>(p);
          A[p] += term;
        }
      }
      if (lam == 0.0) {
        out.denominators[j] = A[0];
        continue;
      }
      const double t = lam / ref;
      double acc = A[K];
      for (std::size_t p = K; p-- > 0;) acc = acc * t + A[p];
      out.denominators[j] = acc;
    }
  } else {
    // Unit-major accumulation: unit k is at risk for every event time <= U_k.
    for (std::size_t k = 0; k < units.size(); ++k) {
      const double w = weights[units[k]];
      for (std::size_t j = 0; j < last[k]; ++j) out.denominators[j] += w * std::exp(lam_left[j] * r[k]);
    }
  }

  std::vector<double> cumulative(m);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!(out.denominators[j] > 0.0) || !std::isfinite(out.denominators[j])) {
      throw Error(ErrorCode::EmptyRiskSet, "weighted risk set is empty or degenerate at t=" + format_double(out.event_times[j]));
    }
    acc += out.numerators[j] / out.denominators[j];
    cumulative[j] = acc;
  }
  out.hazard = StepFunction(out.event_times, std::move(cumulative), 0.0);
  return out;
}

WeightedCumulativeHazard weighted_nelson_aalen(const ObservationalDataset& data, const WeightAssignment& w,
                                               const CensoringFit& censoring, int arm) {
  return weighted_nelson_aalen(data, w.weights, censoring, arm);
}

RmcstResult rmcst_estimate(const WeightedCumulativeHazard& haz1, const WeightedCumulativeHazard& haz0, double L) {
  if (!(L > 0.0)) throw Error(ErrorCode::NonpositiveL, "restriction time must be positive");
  RmcstResult r;
  r.L = L;
  r.mu1 = std::clamp(haz1.area_to(L), 0.0, L);
  r.mu0 = std::clamp(haz0.area_to(L), 0.0, L);
  r.delta = r.mu1 - r.mu0;
  r.beyond_followup = {L > haz0.last_followup, L > haz1.last_followup};
  return r;
}

std::vector<double> counterfactual_survival_curve(const WeightedCumulativeHazard& haz, std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  double prev = 0.0;
  for (double t : grid) {
    if (t < 0.0 || t < prev) throw Error(ErrorCode::InvalidArgument, "survival grid must be nonnegative and nondecreasing");
    prev = t;
    out.push_back(std::exp(-haz.hazard.eval(t, Side::Right)));
  }
  return out;
}

void write_survival_curve(std::ostream& out, const WeightedCumulativeHazard& haz, char delimiter) {
  out << "time" << delimiter << "survival\n";
  out << "0" << delimiter << format_double(std::exp(-haz.hazard.eval(0.0))) << '\n';
  const auto& knots = haz.hazard.knots();
  const auto& values = haz.hazard.values();
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (knots[k] == 0.0) continue;
    out << format_double(knots[k]) << delimiter << format_double(std::exp(-values[k])) << '\n';
  }
}

}  // namespace rmcst
