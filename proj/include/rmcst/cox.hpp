#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/data.hpp"
#include "rmcst/step_function.hpp"

namespace rmcst {

struct CoxOptions {
  /// Converged when |U_j(theta)| <= tolerance * n * sd(x_j) for each covariate.
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Proportional hazards fit with Breslow tie handling and Breslow baseline.
struct CoxFit {
  Eigen::VectorXd theta;
  /// Cumulative baseline hazard for the raw (uncentered) covariates.
  StepFunction baseline;
  std::vector<double> event_times;   ///< distinct event times, ascending
  std::vector<double> event_counts;  ///< tied events at each time
  std::vector<double> risk_sums;     ///< sum over the risk set of exp(theta' x)
  bool converged = false;
  bool degenerate = false;           ///< no events: baseline identically zero
  int iterations = 0;
  double max_score_residual = 0.0;
  double log_partial_likelihood = 0.0;
  std::vector<std::string> warnings;
};

/// Breslow log partial likelihood sum_t [theta' s_t - d_t log S0(t)].
double cox_log_partial_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& time,
                                  const Eigen::VectorXi& status, const Eigen::VectorXd& theta);
Eigen::VectorXd cox_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& time,
                          const Eigen::VectorXi& status, const Eigen::VectorXd& theta);

/// Newton-Raphson with step-halving on the partial likelihood. Covariates that
/// are constant in the sample get a zero coefficient and a warning.
CoxFit fit_cox(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, const Eigen::VectorXi& status,
               const CoxOptions& options = {});

/// Per-arm Cox models for the censoring time, K_C(t, x) = exp(-Lambda_0(t) exp(theta' x)).
struct CensoringFit {
  std::array<CoxFit, 2> arms;
  std::vector<std::string> warnings;
};

/// Fits each arm separately with censoring (1 - delta) as the event. Only rows
/// flagged in `rows` participate when it is non-empty.
CensoringFit fit_censoring_cox(const ObservationalDataset& data, const std::vector<bool>& rows = {},
                               const CoxOptions& options = {});

double censoring_survival(const CensoringFit& fit, int arm, double t, const Eigen::VectorXd& x,
                          Side side = Side::Left);

}  // namespace rmcst
