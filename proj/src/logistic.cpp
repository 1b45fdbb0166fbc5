#include "rmcst/logistic.hpp"

#include <cmath>

#include "rmcst/error.hpp"

namespace rmcst {
namespace {

double log1p_exp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

Eigen::VectorXd column_sd(const Eigen::MatrixXd& x) {
  Eigen::VectorXd sd(x.cols());
  const double denom = std::max<double>(1.0, static_cast<double>(x.rows()) - 1.0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    sd[j] = std::sqrt((x.col(j).array() - mean).square().sum() / denom);
  }
  return sd;
}

}  // namespace

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double z = std::exp(eta);
  return z / (1.0 + z);
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

double bernoulli_log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXi& treat,
                                const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += treat[i] * eta[i] - log1p_exp(eta[i]);
  return ll;
}

PropensityFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& treat,
                           const LogisticOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (treat.size() != n) throw Error(ErrorCode::DimensionMismatch, "treatment length differs from covariate rows");

  // Work on standardized covariates; coefficients are mapped back at the end.
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::VectorXd sd = column_sd(x);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(sd[j] > 0.0)) throw Error(ErrorCode::SingularDesign, "covariate column " + std::to_string(j + 1) + " is constant");
  }
  Eigen::MatrixXd zs(n, p + 1);
  zs.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) zs.col(j + 1) = (x.col(j).array() - mean[j]) / sd[j];
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(zs).rank() < p + 1) {
    throw Error(ErrorCode::SingularDesign, "design matrix is rank deficient");
  }

  const Eigen::MatrixXd z = design_matrix(x);
  const Eigen::VectorXd a = treat.cast<double>();
  auto to_original = [&](const Eigen::VectorXd& bs) {
    Eigen::VectorXd b(p + 1);
    b[0] = bs[0];
    for (Eigen::Index j = 0; j < p; ++j) {
      b[j + 1] = bs[j + 1] / sd[j];
      b[0] -= b[j + 1] * mean[j];
    }
    return b;
  };
  auto residual_ok = [&](const Eigen::VectorXd& g) {
    const double scale = options.tolerance * static_cast<double>(n);
    if (std::abs(g[0]) > scale) return false;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(g[j + 1]) > scale * sd[j]) return false;
    }
    return true;
  };

  PropensityFit fit;
  Eigen::VectorXd bs = Eigen::VectorXd::Zero(p + 1);
  double ll = bernoulli_log_likelihood(zs, treat, bs);
  fit.log_likelihood_trace.push_back(ll);
  Eigen::VectorXd e(n);
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd eta = zs * bs;
    for (Eigen::Index i = 0; i < n; ++i) e[i] = logistic(eta[i]);
    const Eigen::VectorXd resid = a - e;
    const Eigen::VectorXd g_orig = z.transpose() * resid;
    fit.iterations = iter;
    if (residual_ok(g_orig)) {
      fit.converged = true;
      fit.max_score_residual = g_orig.cwiseAbs().maxCoeff();
      break;
    }
    if (iter >= options.max_iterations) {
      throw Error(ErrorCode::NoConvergence,
                  "logistic regression did not converge in " + std::to_string(options.max_iterations) + " iterations");
    }
    const Eigen::VectorXd g = zs.transpose() * resid;
    const Eigen::VectorXd wts = (e.array() * (1.0 - e.array())).matrix();
    const Eigen::MatrixXd h = zs.transpose() * wts.asDiagonal() * zs;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw Error(ErrorCode::SeparationDetected, "information matrix lost positive definiteness");
    }
    Eigen::VectorXd step = ldlt.solve(g);
    if (!step.allFinite()) throw Error(ErrorCode::SeparationDetected, "Newton step is not finite");

    // Step-halving keeps the log-likelihood non-decreasing, up to rounding
    // noise near the optimum where the full step must still be taken.
    const double noise = 1e-10 * (1.0 + std::abs(ll));
    double t = 1.0;
    Eigen::VectorXd candidate = bs + step;
    double ll_new = bernoulli_log_likelihood(zs, treat, candidate);
    for (int halving = 0; halving < 40 && !(ll_new >= ll - noise); ++halving) {
      t *= 0.5;
      candidate = bs + t * step;
      ll_new = bernoulli_log_likelihood(zs, treat, candidate);
    }
    if (!(ll_new >= ll - noise)) {
      candidate = bs;
      ll_new = ll;
    }
    bs = candidate;
    ll = ll_new;
    fit.log_likelihood_trace.push_back(ll);
    if (bs.cwiseAbs().maxCoeff() > options.separation_bound) {
      throw Error(ErrorCode::SeparationDetected, "coefficients diverge; treatment is (quasi-)separated by the covariates");
    }
  }

  fit.beta = to_original(bs);
  fit.scores = predict_ps(fit, x);
  fit.max_score_residual = (z.transpose() * (a - fit.scores)).cwiseAbs().maxCoeff();
  fit.log_likelihood = ll;
  const double lo = options.score_floor;
  if ((fit.scores.array() <= lo).any() || (fit.scores.array() >= 1.0 - lo).any()) {
    throw Error(ErrorCode::SeparationDetected, "fitted propensity score at the boundary of (0, 1)");
  }
  return fit;
}

PropensityFit fit_logistic(const ObservationalDataset& data, const LogisticOptions& options) {
  return fit_logistic(data.x(), data.treat(), options);
}

Eigen::VectorXd predict_ps(const PropensityFit& fit, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() + 1 != fit.beta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "covariate count does not match the fitted model");
  }
  const Eigen::VectorXd eta = design_matrix(x_new) * fit.beta;
  return eta.unaryExpr([](double v) { return logistic(v); });
}

Eigen::MatrixXd logistic_information(const Eigen::MatrixXd& x, const Eigen::VectorXd& scores) {
  const Eigen::MatrixXd z = design_matrix(x);
  const Eigen::VectorXd w = (scores.array() * (1.0 - scores.array())).matrix();
  return z.transpose() * w.asDiagonal() * z;
}

}  // namespace rmcst
