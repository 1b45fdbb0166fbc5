#include "rmcst/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmcst/error.hpp"

namespace rmcst {
namespace {

/// Units grouped by distinct time, latest group first.
struct TimeGroups {
  std::vector<Eigen::Index> order;      // indices sorted by time descending
  std::vector<std::size_t> group_end;   // exclusive end offset of each group in `order`
};

TimeGroups group_by_time(const Eigen::VectorXd& time) {
  TimeGroups g;
  g.order.resize(static_cast<std::size_t>(time.size()));
  std::iota(g.order.begin(), g.order.end(), Eigen::Index{0});
  std::stable_sort(g.order.begin(), g.order.end(), [&](auto a, auto b) { return time[a] > time[b]; });
  for (std::size_t k = 0; k < g.order.size(); ++k) {
    if (k + 1 == g.order.size() || time[g.order[k + 1]] != time[g.order[k]]) g.group_end.push_back(k + 1);
  }
  return g;
}

struct PartialLikelihood {
  double value = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

PartialLikelihood evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXi& status, const TimeGroups& groups,
                           const Eigen::VectorXd& theta, bool derivatives) {
  const Eigen::Index p = x.cols();
  PartialLikelihood out{0.0, Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p)};
  const Eigen::VectorXd eta = x * theta;
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  std::size_t begin = 0;
  for (std::size_t end : groups.group_end) {
    double d = 0.0;
    Eigen::VectorXd xsum = Eigen::VectorXd::Zero(p);
    double eta_sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const Eigen::Index i = groups.order[k];
      const double r = std::exp(eta[i]);
      s0 += r;
      if (derivatives) {
        s1 += r * x.row(i).transpose();
        s2.noalias() += r * x.row(i).transpose() * x.row(i);
      }
      if (status[i] == 1) {
        d += 1.0;
        eta_sum += eta[i];
        if (derivatives) xsum += x.row(i).transpose();
      }
    }
    if (d > 0.0) {
      out.value += eta_sum - d * std::log(s0);
      if (derivatives) {
        const Eigen::VectorXd xbar = s1 / s0;
        out.score += xsum - d * xbar;
        out.information += d * (s2 / s0 - xbar * xbar.transpose());
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace

double cox_log_partial_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& time,
                                  const Eigen::VectorXi& status, const Eigen::VectorXd& theta) {
  return evaluate(x, status, group_by_time(time), theta, false).value;
}

Eigen::VectorXd cox_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, const Eigen::VectorXi& status,
                          const Eigen::VectorXd& theta) {
  return evaluate(x, status, group_by_time(time), theta, true).score;
}

CoxFit fit_cox(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, const Eigen::VectorXi& status,
               const CoxOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (time.size() != n || status.size() != n) throw Error(ErrorCode::DimensionMismatch, "Cox inputs differ in length");

  CoxFit fit;
  fit.theta = Eigen::VectorXd::Zero(p);
  const TimeGroups groups = group_by_time(time);
  const bool any_event = (status.array() == 1).any();

  // Centered active columns for the Newton iterations.
  std::vector<Eigen::Index> active;
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    sd[j] = n > 1 ? std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
    if (sd[j] > 0.0) {
      active.push_back(j);
    } else {
      fit.warnings.push_back("covariate " + std::to_string(j + 1) + " is constant; coefficient fixed at 0");
    }
  }
  const auto q = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd xa(n, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const Eigen::Index j = active[static_cast<std::size_t>(k)];
    xa.col(k) = x.col(j).array() - x.col(j).mean();
  }

  if (!any_event) {
    fit.degenerate = true;
    fit.converged = true;
    fit.warnings.push_back("no events; cumulative baseline hazard is identically zero");
  } else if (q > 0) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
    PartialLikelihood cur = evaluate(xa, status, groups, theta, true);
    for (int iter = 0;; ++iter) {
      fit.iterations = iter;
      bool ok = true;
      for (Eigen::Index k = 0; k < q; ++k) {
        const double scale = options.tolerance * static_cast<double>(n) * sd[active[static_cast<std::size_t>(k)]];
        if (std::abs(cur.score[k]) > scale) ok = false;
      }
      if (ok) {
        fit.converged = true;
        break;
      }
      if (iter >= options.max_iterations) {
        throw Error(ErrorCode::NoConvergence, "Cox regression did not converge in " + std::to_string(options.max_iterations) + " iterations");
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.information);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
        throw Error(ErrorCode::SingularInformation, "Cox information matrix is singular");
      }
      const Eigen::VectorXd step = ldlt.solve(cur.score);
      double t = 1.0;
      Eigen::VectorXd cand = theta + step;
      PartialLikelihood next = evaluate(xa, status, groups, cand, true);
      const double noise = 1e-10 * (1.0 + std::abs(cur.value));
      for (int halving = 0; halving < 40 && !(next.value >= cur.value - noise); ++halving) {
        t *= 0.5;
        cand = theta + t * step;
        next = evaluate(xa, status, groups, cand, true);
      }
      if (!(next.value >= cur.value - noise)) {
        throw Error(ErrorCode::NoConvergence, "Cox step-halving failed to increase the partial likelihood");
      }
      theta = cand;
      cur = std::move(next);
    }
    for (Eigen::Index k = 0; k < q; ++k) fit.theta[active[static_cast<std::size_t>(k)]] = theta[k];
    fit.log_partial_likelihood = cur.value;
    fit.max_score_residual = q > 0 ? cur.score.cwiseAbs().maxCoeff() : 0.0;
  } else {
    fit.converged = true;
  }
  if (!fit.degenerate && q == 0) {
    fit.log_partial_likelihood = evaluate(xa, status, groups, Eigen::VectorXd::Zero(0), false).value;
  }

  // Breslow increments d(t) / sum_{U_j >= t} exp(theta' x_j), ascending in time.
  const Eigen::VectorXd risk = (x * fit.theta).array().exp();
  double s0 = 0.0;
  std::size_t begin = 0;
  std::vector<double> times, counts, sums;
  for (std::size_t end : groups.group_end) {
    double d = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const Eigen::Index i = groups.order[k];
      s0 += risk[i];
      d += status[i] == 1 ? 1.0 : 0.0;
    }
    if (d > 0.0) {
      times.push_back(time[groups.order[begin]]);
      counts.push_back(d);
      sums.push_back(s0);
    }
    begin = end;
  }
  std::reverse(times.begin(), times.end());
  std::reverse(counts.begin(), counts.end());
  std::reverse(sums.begin(), sums.end());
  std::vector<double> cumulative(times.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    acc += counts[k] / sums[k];
    cumulative[k] = acc;
  }
  fit.baseline = StepFunction(times, std::move(cumulative), 0.0);
  fit.event_times = std::move(times);
  fit.event_counts = std::move(counts);
  fit.risk_sums = std::move(sums);
  return fit;
}

CensoringFit fit_censoring_cox(const ObservationalDataset& data, const std::vector<bool>& rows,
                               const CoxOptions& options) {
  CensoringFit out;
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (data.treat()[i] == arm && (rows.empty() || rows[static_cast<std::size_t>(i)])) idx.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd x(m, data.p());
    Eigen::VectorXd u(m);
    Eigen::VectorXi c(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index i = idx[static_cast<std::size_t>(k)];
      x.row(k) = data.x().row(i);
      u[k] = data.time()[i];
      c[k] = 1 - data.event()[i];
    }
    out.arms[static_cast<std::size_t>(arm)] = fit_cox(x, u, c, options);
    for (const auto& w : out.arms[static_cast<std::size_t>(arm)].warnings) {
      out.warnings.push_back("censoring model, arm " + std::to_string(arm) + ": " + w);
    }
  }
  return out;
}

double censoring_survival(const CensoringFit& fit, int arm, double t, const Eigen::VectorXd& x, Side side) {
  if (arm != 0 && arm != 1) throw Error(ErrorCode::InvalidArgument, "arm must be 0 or 1");
  const CoxFit& f = fit.arms[static_cast<std::size_t>(arm)];
  if (x.size() != f.theta.size()) throw Error(ErrorCode::DimensionMismatch, "covariate length does not match the censoring model");
  return std::exp(-f.baseline.eval(t, side) * std::exp(f.theta.dot(x)));
}

}  // namespace rmcst
