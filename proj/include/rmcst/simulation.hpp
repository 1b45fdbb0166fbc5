#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/data.hpp"
#include "rmcst/parallel.hpp"
#include "rmcst/rng.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

enum class OutcomeVariant { WithPsTerm, WithoutPsTerm };
enum class CensoringVariant { CorrectCox, Misspecified };
enum class VarianceMethod { ClosedForm, Bootstrap };

inline constexpr int kSimCovariates = 6;
using SimCovariates = Eigen::Matrix<double, kSimCovariates, 1>;

/// Default scheme grid: IPTW, OW, symmetric trimming at 0.05/0.1/0.15,
/// asymmetric trimming at 0/0.01/0.05, truncation at 0.025/0.05/0.1.
std::vector<WeightScheme> default_scheme_grid();

struct SimulationScenario {
  double gamma = 1.0;
  int n = 1000;
  int reps = 1000;
  std::vector<double> L{2.0, 5.0, 10.0};
  std::vector<WeightScheme> schemes = default_scheme_grid();
  OutcomeVariant outcome = OutcomeVariant::WithPsTerm;
  CensoringVariant censoring = CensoringVariant::CorrectCox;
  VarianceMethod variance = VarianceMethod::ClosedForm;
  int bootstrap_B = 200;
  std::uint64_t master_seed = 1;
  /// Extra log-rate term for the censoring time under CensoringVariant::Misspecified.
  /// Not part of the published design. Unset means 0.3 * x1^2.
  std::function<double(const SimCovariates&)> censoring_hook;
  /// PS intercept; calibrated from gamma when unset.
  std::optional<double> intercept;

  void validate() const;
};

/// Slopes (0.15, 0.3, 0.3, -0.2, -0.25, -0.25) * gamma.
SimCovariates ps_slopes(double gamma);

/// X1-X3 standard normal with pairwise correlation 0.5, X4-X6 Bernoulli(0.5).
SimCovariates draw_covariates(Rng& rng);

/// Linear predictor m^(a)(X) of the log event rate. With the PS term the
/// treated predictor gains 2 e(X) and the control predictor loses e(X).
double outcome_log_rate(const SimCovariates& x, int arm, double ps, OutcomeVariant variant);
double censoring_log_rate(const SimCovariates& x, const SimulationScenario& scenario);

struct SimulatedData {
  ObservationalDataset data;
  Eigen::VectorXd true_ps;
  Eigen::VectorXd t1;
  Eigen::VectorXd t0;
  Eigen::VectorXd censoring_time;
};

/// Replication `rep` of the scenario, drawn from its own random stream.
SimulatedData generate_dataset(const SimulationScenario& scenario, std::uint64_t rep);

inline constexpr std::uint64_t kCalibrationSeed = 20210417;
inline constexpr int kCalibrationDraws = 1'000'000;

/// Intercept b0 solving mean(logistic(b0 + lp_i)) = 0.5.
double calibrate_intercept(std::span<const double> linear_predictor);
/// Calibration on a fixed covariate sample drawn from `seed`. Results for the
/// default seed and size are cached per gamma.
double calibrate_intercept(double gamma, std::uint64_t seed = kCalibrationSeed, int draws = kCalibrationDraws);

struct TruthEntry {
  WeightScheme scheme;
  double L = 0.0;
  double mu1 = 0.0, mu0 = 0.0, delta = 0.0;
  double se_mu1 = 0.0, se_mu0 = 0.0, se_delta = 0.0;  ///< Monte Carlo standard errors
};

struct TruthTable {
  double gamma = 0.0;
  long super_n = 0;
  OutcomeVariant outcome = OutcomeVariant::WithPsTerm;
  std::vector<TruthEntry> entries;

  /// Throws TruthMissing when the cell is absent.
  const TruthEntry& at(const WeightScheme& scheme, double L) const;
};

/// Super-population truths: every scheme's tilted mean of min(T^(a), L).
/// Trimming regions use the true propensity score at population scale.
TruthTable compute_truth(const SimulationScenario& scenario, long super_n = 1'000'000);

enum class Target { Mu1, Mu0, Delta };
std::string to_string(Target t);

struct ReportCell {
  WeightScheme scheme;
  double L = 0.0;
  Target target = Target::Delta;
  double truth = 0.0;
  int successes = 0;
  int failures = 0;
  double mean_estimate = 0.0;
  double bias = 0.0;                  ///< mean estimate minus truth, raw units
  double mc_variance = 0.0;
  std::optional<double> relative_efficiency;  ///< Var_MC(IPTW) / Var_MC(scheme)
  double coverage = 0.0;              ///< percent, closed-form Wald intervals
  std::optional<double> bootstrap_coverage;  ///< percent, percentile intervals
  double mean_se = 0.0;               ///< mean closed-form standard error
  double mean_closed_variance = 0.0;  ///< mean closed-form variance
};

struct SimulationReport {
  double gamma = 0.0;
  int n = 0;
  int reps = 0;
  std::vector<ReportCell> cells;

  const ReportCell& at(const WeightScheme& scheme, double L, Target target) const;
};

/// Runs every replication (in parallel when a pool is given) and folds the
/// results in replication order.
SimulationReport run_study(const SimulationScenario& scenario, const TruthTable& truth,
                           const WorkerPool* pool = nullptr);

}  // namespace rmcst
