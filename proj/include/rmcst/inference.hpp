#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/cox.hpp"
#include "rmcst/data.hpp"
#include "rmcst/estimator.hpp"
#include "rmcst/parallel.hpp"
#include "rmcst/pipeline.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

/// Per-unit influence contributions I_i, scaled so that the variance of the
/// estimate is (1/n^2) sum_i total_i^2.
struct InfluenceContributions {
  /// Weighted-hazard martingale terms plus the propensity-score correction.
  Eigen::VectorXd psi_beta;
  /// Correction for estimating the censoring baseline hazard.
  Eigen::VectorXd psi_theta;
  Eigen::VectorXd total;

  double variance() const;
};

struct TargetInfluence {
  double L = 0.0;
  InfluenceContributions mu1;
  InfluenceContributions mu0;
  InfluenceContributions delta;
};

/// Influence contributions for mu^(1)(L), mu^(0)(L) and their difference at
/// every L. Contributions come from linearizing the weighted Nelson-Aalen
/// increments through the exact restricted-mean integral, projecting on the
/// logistic score, and propagating Breslow baseline estimation; estimation of
/// the censoring regression coefficients contributes nothing.
///
/// For trimming schemes the result is conditional on the realized trimmed sample.
std::vector<TargetInfluence> influence_contributions(const ObservationalDataset& data, const WeightAssignment& w,
                                                     const CensoringFit& censoring,
                                                     const WeightedCumulativeHazard& haz1,
                                                     const WeightedCumulativeHazard& haz0, std::span<const double> L);

/// Variance of delta_hat(L) for `result.L`.
double closed_form_variance(const ObservationalDataset& data, const WeightAssignment& w,
                            const CensoringFit& censoring, const RmcstResult& result);

/// Fills se, se_mu1, se_mu0 and the Wald interval delta +/- 1.96 se.
void attach_closed_form(RmcstResult& result, const TargetInfluence& influence);

inline constexpr double kWaldZ = 1.959963984540054;

struct BootstrapInterval {
  double low = 0.0;
  double high = 0.0;
  double variance = 0.0;
};

struct BootstrapSummary {
  double L = 0.0;
  BootstrapInterval mu1;
  BootstrapInterval mu0;
  BootstrapInterval delta;
};

struct BootstrapResult {
  WeightScheme scheme;
  int replicates = 0;
  int failed = 0;
  bool usable = true;
  std::vector<BootstrapSummary> per_L;
};

struct BootstrapOptions {
  int replicates = 200;
  std::uint64_t seed = 1;
  double max_failed_fraction = 0.10;
  /// When false, a scheme with too many failed resamples is returned with
  /// `usable == false` instead of raising TooManyFailedReplicates.
  bool throw_on_excess_failures = true;
  EstimationOptions estimation;
};

/// Nonparametric bootstrap: rows are resampled with replacement and the full
/// pipeline (propensity fit, weights incl. trimming re-fits, censoring fit,
/// restricted means) is rerun on each resample. All schemes share each
/// resample. Percentile intervals at 2.5% and 97.5%.
std::vector<BootstrapResult> bootstrap_ci(const ObservationalDataset& data, std::span<const WeightScheme> schemes,
                                          std::span<const double> L, const BootstrapOptions& options,
                                          const WorkerPool* pool = nullptr);
BootstrapResult bootstrap_ci(const ObservationalDataset& data, const WeightScheme& scheme,
                             std::span<const double> L, const BootstrapOptions& options,
                             const WorkerPool* pool = nullptr);

}  // namespace rmcst
