#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rmcst/data.hpp"

namespace rmcst {

struct LogisticOptions {
  /// Converged when |sum(A - e)| <= tolerance * n and
  /// |sum((A - e) x_j)| <= tolerance * n * sd(x_j) for every column.
  double tolerance = 1e-8;
  int max_iterations = 100;
  /// Largest admissible |coefficient| on the standardized covariate scale.
  double separation_bound = 20.0;
  /// Fitted scores must stay inside (score_floor, 1 - score_floor).
  double score_floor = 1e-10;
};

/// Maximum-likelihood logistic propensity model with intercept.
struct PropensityFit {
  Eigen::VectorXd beta;    ///< intercept first, then one entry per covariate
  Eigen::VectorXd scores;  ///< e(X_i) for the rows the model was fitted on
  bool converged = false;
  int iterations = 0;
  double max_score_residual = 0.0;  ///< max_j |sum_i (A_i - e_i) z_ij|
  double log_likelihood = 0.0;
  std::vector<double> log_likelihood_trace;  ///< one entry per accepted step, starting at beta = 0
};

/// Intercept column followed by the covariates.
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x);

double logistic(double eta);
double bernoulli_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXi& treat,
                                const Eigen::VectorXd& beta);

PropensityFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& treat,
                           const LogisticOptions& options = {});
PropensityFit fit_logistic(const ObservationalDataset& data, const LogisticOptions& options = {});

Eigen::VectorXd predict_ps(const PropensityFit& fit, const Eigen::MatrixXd& x_new);

/// Observed information sum_i e_i (1 - e_i) z_i z_i^T.
Eigen::MatrixXd logistic_information(const Eigen::MatrixXd& x, const Eigen::VectorXd& scores);

}  // namespace rmcst
