#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/cox.hpp"
#include "rmcst/data.hpp"
#include "rmcst/step_function.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

/// Treatment-specific Nelson-Aalen cumulative hazard in which every unit
/// carries the combined weight w_i / K_C(u-, X_i).
struct WeightedCumulativeHazard {
  int arm = 1;
  StepFunction hazard;
  // Jump table, one entry per distinct event time.
  std::vector<double> event_times;
  std::vector<double> numerators;    ///< weighted event mass
  std::vector<double> denominators;  ///< weighted at-risk mass (> 0)
  /// Latest observed time among positively weighted units of the arm.
  double last_followup = 0.0;

  /// Area under exp(-Lambda) on [0, t], exact for the step function.
  double area_to(double t) const;
};

/// How the weighted at-risk sums are accumulated. Exact visits every
/// (unit, event time) pair. Series expands exp(Lambda_0(u-) r_i) in powers of
/// Lambda_0(u-), which keeps running sums per power and is linear in n; it is
/// exact to rounding when the expansion converges. Auto picks Series for
/// large arms and falls back to Exact when the expansion would be too long.
enum class RiskSumMethod { Auto, Exact, Series };

/// Weighted cumulative hazard for arm `arm`, using the units with positive
/// weight. K_C is evaluated as a left limit at each event time and the risk
/// set at u includes units with U = u.
WeightedCumulativeHazard weighted_nelson_aalen(const ObservationalDataset& data, const Eigen::VectorXd& weights,
                                               const CensoringFit& censoring, int arm,
                                               RiskSumMethod method = RiskSumMethod::Auto);
WeightedCumulativeHazard weighted_nelson_aalen(const ObservationalDataset& data, const WeightAssignment& w,
                                               const CensoringFit& censoring, int arm);

struct RmcstResult {
  double L = 0.0;
  double mu1 = 0.0;
  double mu0 = 0.0;
  double delta = 0.0;
  std::optional<double> se;       ///< standard error of delta
  std::optional<double> se_mu1;
  std::optional<double> se_mu0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  WeightScheme scheme;
  /// L beyond the last follow-up of arm 0 / arm 1 (curve extended flat).
  std::array<bool, 2> beyond_followup{false, false};
};

/// Point estimates mu^(a)(L) = integral_0^L exp(-Lambda_a(t)) dt and their difference.
RmcstResult rmcst_estimate(const WeightedCumulativeHazard& haz1, const WeightedCumulativeHazard& haz0, double L);

/// exp(-Lambda(t)) at every grid point. The grid must be nondecreasing and nonnegative.
std::vector<double> counterfactual_survival_curve(const WeightedCumulativeHazard& haz, std::span<const double> grid);

/// Two-column "time,survival" text: the origin, then every jump of the curve.
void write_survival_curve(std::ostream& out, const WeightedCumulativeHazard& haz, char delimiter = ',');

}  // namespace rmcst
