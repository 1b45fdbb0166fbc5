#pragma once

// Independent oracles and fixtures shared by the unit tests. Nothing here
// calls into the library's fitting code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/cox.hpp"
#include "rmcst/data.hpp"

namespace testing {

// Nelder-Mead minimizer with restarts from the best vertex.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   double step = 0.5, int restarts = 12, int max_iter = 20000) {
  const Eigen::Index d = x0.size();
  Eigen::VectorXd best = x0;
  for (int r = 0; r < restarts; ++r) {
    std::vector<Eigen::VectorXd> s(d + 1, best);
    std::vector<double> fs(d + 1);
    for (Eigen::Index k = 0; k < d; ++k) s[k + 1][k] += step;
    for (Eigen::Index k = 0; k <= d; ++k) fs[k] = f(s[k]);
    for (int it = 0; it < max_iter; ++it) {
      std::vector<Eigen::Index> idx(d + 1);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
      std::vector<Eigen::VectorXd> s2;
      std::vector<double> f2;
      for (auto k : idx) { s2.push_back(s[k]); f2.push_back(fs[k]); }
      s = s2; fs = f2;
      if (std::abs(fs[d] - fs[0]) <= 1e-15 * (1.0 + std::abs(fs[0]))) {
        double spread = 0.0;
        for (Eigen::Index k = 1; k <= d; ++k) spread = std::max(spread, (s[k] - s[0]).cwiseAbs().maxCoeff());
        if (spread < 1e-10) break;
      }
      Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
      for (Eigen::Index k = 0; k < d; ++k) c += s[k];
      c /= static_cast<double>(d);
      const Eigen::VectorXd xr = c + (c - s[d]);
      const double fr = f(xr);
      if (fr < fs[0]) {
        const Eigen::VectorXd xe = c + 2.0 * (c - s[d]);
        const double fe = f(xe);
        if (fe < fr) { s[d] = xe; fs[d] = fe; } else { s[d] = xr; fs[d] = fr; }
      } else if (fr < fs[d - 1]) {
        s[d] = xr; fs[d] = fr;
      } else {
        const Eigen::VectorXd xc = fr < fs[d] ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (s[d] - c));
        const double fc = f(xc);
        if (fc < std::min(fr, fs[d])) {
          s[d] = xc; fs[d] = fc;
        } else {
          for (Eigen::Index k = 1; k <= d; ++k) { s[k] = s[0] + 0.5 * (s[k] - s[0]); fs[k] = f(s[k]); }
        }
      }
    }
    const auto k = std::min_element(fs.begin(), fs.end()) - fs.begin();
    best = s[k];
    step *= 0.1;
    if (step < 1e-6) step = 1e-3;
  }
  return best;
}

// Bernoulli log-likelihood with intercept written out from the definition.
inline double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& a, const Eigen::VectorXd& beta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double eta = beta[0];
    for (Eigen::Index j = 0; j < x.cols(); ++j) eta += beta[j + 1] * x(i, j);
    ll += a[i] * eta - std::log1p(std::exp(eta));
  }
  return ll;
}

// Breslow log partial likelihood, one term per event, risk set U_j >= U_i.
inline double breslow_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, const Eigen::VectorXi& status,
                             const Eigen::VectorXd& theta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!status[i]) continue;
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (t[j] >= t[i]) s += std::exp(x.row(j).dot(theta));
    }
    ll += x.row(i).dot(theta) - std::log(s);
  }
  return ll;
}

// Breslow baseline at time u: sum over event times v <= u of d(v) / sum_{U_j >= v} exp(theta'x_j).
inline double breslow_baseline(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, const Eigen::VectorXi& status,
                               const Eigen::VectorXd& theta, double u) {
  double lam = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!status[i] || t[i] > u) continue;
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (t[j] >= t[i]) s += std::exp(x.row(j).dot(theta));
    }
    lam += 1.0 / s;
  }
  return lam;
}

// Area under exp(-NA) on [0, L] for unit weights, by direct definition.
inline double brute_rmst(std::vector<double> times, std::vector<int> events, double L) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  double area = 0.0, prev = 0.0, cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double u = times[order[k]];
    if (!events[order[k]]) continue;
    if (u > L) break;
    area += std::exp(-cum) * (u - prev);
    prev = u;
    double at_risk = 0.0;
    for (double v : times) at_risk += v >= u ? 1.0 : 0.0;
    cum += 1.0 / at_risk;
  }
  return area + std::exp(-cum) * (L - prev);
}

// Censoring fit whose K_C is identically one.
inline rmcst::CensoringFit no_censoring(Eigen::Index p) {
  rmcst::CensoringFit f;
  for (auto& arm : f.arms) {
    arm.theta = Eigen::VectorXd::Zero(p);
    arm.degenerate = true;
    arm.converged = true;
  }
  return f;
}

// Small random dataset with a logistic treatment model and exponential times.
inline rmcst::ObservationalDataset random_dataset(std::mt19937_64& gen, int n, int p, double ps_slope = 0.5,
                                                  double censor_rate = 0.5) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(1e-12, 1.0);
  for (;;) {
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXi a(n), d(n);
    Eigen::VectorXd t(n);
    for (int i = 0; i < n; ++i) {
      double eta = 0.0;
      for (int j = 0; j < p; ++j) {
        x(i, j) = z(gen);
        eta += ps_slope * x(i, j) / (j + 1);
      }
      a[i] = u(gen) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
      const double rate = std::exp(0.3 * x(i, 0) - 0.2 * a[i]);
      const double ti = -std::log(u(gen)) / rate;
      const double ci = -std::log(u(gen)) / (censor_rate * std::exp(0.2 * x(i, p - 1)));
      t[i] = std::min(ti, ci);
      d[i] = ti <= ci ? 1 : 0;
    }
    const int treated = a.sum();
    int cens[2] = {0, 0};
    for (int i = 0; i < n; ++i) cens[a[i]] += d[i] == 0 ? 1 : 0;
    if (treated >= 3 && treated <= n - 3 && cens[0] >= 2 && cens[1] >= 2) {
      return rmcst::ObservationalDataset(std::move(x), std::move(a), std::move(t), std::move(d));
    }
  }
}

}  // namespace testing
