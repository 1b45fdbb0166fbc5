#include "rmcst/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rmcst/error.hpp"

namespace rmcst {
namespace {

std::string fmt_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

WeightScheme WeightScheme::iptw() { return {WeightKind::IPTW, 0.0, 0.0, std::nullopt}; }
WeightScheme WeightScheme::overlap() { return {WeightKind::Overlap, 0.0, 0.0, std::nullopt}; }
WeightScheme WeightScheme::symmetric_trim(double alpha) {
  return {WeightKind::SymmetricTrim, alpha, 0.0, std::nullopt};
}
WeightScheme WeightScheme::asymmetric_trim(double q) {
  return {WeightKind::AsymmetricTrim, 0.0, q, std::nullopt};
}
WeightScheme WeightScheme::truncate(double q) { return {WeightKind::Truncate, 0.0, q, std::nullopt}; }

std::string WeightScheme::label() const {
  switch (kind) {
    case WeightKind::IPTW: return "iptw";
    case WeightKind::Overlap: return "ow";
    case WeightKind::SymmetricTrim: return "symtrim(" + fmt_param(alpha) + ")";
    case WeightKind::AsymmetricTrim: return "asymtrim(" + fmt_param(q) + ")";
    case WeightKind::Truncate:
      if (upper_q) return "truncate(" + fmt_param(q) + "," + fmt_param(*upper_q) + ")";
      return "truncate(" + fmt_param(q) + ")";
  }
  return "unknown";
}

void WeightScheme::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 0.5)) {
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 0.5), got " + fmt_param(v));
    }
  };
  if (kind == WeightKind::SymmetricTrim) check(alpha, "alpha");
  if (kind == WeightKind::AsymmetricTrim || kind == WeightKind::Truncate) check(q, "q");
  if (kind == WeightKind::Truncate && upper_q) {
    if (!(*upper_q >= 0.0 && *upper_q < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "upper truncation fraction must lie in [0, 1)");
    }
  }
}

WeightScheme parse_scheme(const std::string& text, double alpha, double q) {
  std::string name = text;
  std::vector<double> params;
  if (auto open = text.find('('); open != std::string::npos) {
    auto close = text.find(')', open);
    if (close == std::string::npos) throw Error(ErrorCode::InvalidArgument, "unbalanced parentheses in scheme '" + text + "'");
    name = text.substr(0, open);
    std::string inner = text.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    while (start <= inner.size()) {
      auto comma = inner.find(',', start);
      auto token = inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      try {
        std::size_t used = 0;
        params.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad scheme parameter '" + token + "'");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  auto param = [&](double fallback) { return params.empty() ? fallback : params.front(); };
  WeightScheme scheme;
  if (name == "iptw") {
    scheme = WeightScheme::iptw();
  } else if (name == "ow" || name == "overlap") {
    scheme = WeightScheme::overlap();
  } else if (name == "symtrim") {
    scheme = WeightScheme::symmetric_trim(param(alpha));
  } else if (name == "asymtrim") {
    scheme = WeightScheme::asymmetric_trim(param(q));
  } else if (name == "truncate") {
    scheme = WeightScheme::truncate(param(q));
    if (params.size() > 1) scheme.upper_q = params[1];
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown weighting scheme '" + text + "'");
  }
  scheme.validate();
  return scheme;
}

Tilting tilting_of(WeightKind kind) {
  switch (kind) {
    case WeightKind::Overlap: return Tilting::Overlap;
    case WeightKind::SymmetricTrim:
    case WeightKind::AsymmetricTrim: return Tilting::Region;
    default: return Tilting::Uniform;
  }
}

Eigen::Index WeightAssignment::n_included() const {
  return std::count(included.begin(), included.end(), true);
}

std::vector<Eigen::Index> WeightAssignment::included_rows() const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < included.size(); ++i) {
    if (included[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  prob = std::clamp(prob, 0.0, 1.0);
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  if (lo + 1 >= values.size() || h == static_cast<double>(lo)) return v_lo;
  const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

double iptw_weight(double score, int treat) { return treat == 1 ? 1.0 / score : 1.0 / (1.0 - score); }
double overlap_weight(double score, int treat) { return treat == 1 ? 1.0 - score : score; }

std::vector<bool> symmetric_trim_mask(const Eigen::VectorXd& scores, double alpha) {
  std::vector<bool> keep(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    keep[static_cast<std::size_t>(i)] = scores[i] >= alpha && scores[i] <= 1.0 - alpha;
  }
  return keep;
}

std::vector<bool> asymmetric_trim_mask(const Eigen::VectorXd& scores, const Eigen::VectorXi& treat, double q) {
  std::vector<double> treated, control;
  for (Eigen::Index i = 0; i < scores.size(); ++i) (treat[i] == 1 ? treated : control).push_back(scores[i]);
  if (treated.empty() || control.empty()) throw Error(ErrorCode::EmptyArm, "asymmetric trimming needs both arms");
  const double lo = std::max(*std::min_element(treated.begin(), treated.end()),
                             *std::min_element(control.begin(), control.end()));
  const double hi = std::min(*std::max_element(treated.begin(), treated.end()),
                             *std::max_element(control.begin(), control.end()));
  if (lo > hi) throw Error(ErrorCode::AllUnitsTrimmed, "propensity score distributions have no common support");
  double cut_lo = lo, cut_hi = hi;
  if (q > 0.0) {
    cut_lo = std::max(cut_lo, quantile(treated, q));
    cut_hi = std::min(cut_hi, quantile(control, 1.0 - q));
  }
  std::vector<bool> keep(static_cast<std::size_t>(scores.size()));
  bool any = false;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool k = scores[i] >= cut_lo && scores[i] <= cut_hi;
    keep[static_cast<std::size_t>(i)] = k;
    any = any || k;
  }
  if (!any) throw Error(ErrorCode::AllUnitsTrimmed, "asymmetric trimming removed every unit");
  return keep;
}

Eigen::VectorXd winsorize_scores(const Eigen::VectorXd& scores, double lower_q, double upper_q) {
  std::vector<double> all(scores.data(), scores.data() + scores.size());
  const double p_lo = quantile(all, lower_q);
  const double p_hi = quantile(all, 1.0 - upper_q);
  return scores.unaryExpr([&](double s) { return std::clamp(s, p_lo, std::max(p_lo, p_hi)); });
}

WeightAssignment compute_weights(const ObservationalDataset& data, const PropensityFit& fit,
                                 const WeightScheme& scheme, bool refit_after_trim,
                                 const LogisticOptions& options) {
  scheme.validate();
  const Eigen::Index n = data.n();
  if (fit.scores.size() != n) throw Error(ErrorCode::DimensionMismatch, "propensity fit does not match the dataset");
  const auto& treat = data.treat();

  WeightAssignment out;
  out.scheme = scheme;
  out.tilting = tilting_of(scheme.kind);
  out.included.assign(static_cast<std::size_t>(n), true);
  out.weights = Eigen::VectorXd::Zero(n);
  out.log_weight_slope = Eigen::VectorXd::Zero(n);
  out.ps_used = fit;
  out.ps_rows.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.ps_rows[static_cast<std::size_t>(i)] = i;
  out.effective_ps = fit.scores;

  auto assign_iptw = [&](const Eigen::VectorXd& scores, const std::vector<bool>& frozen) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!out.included[k]) continue;
      out.weights[i] = iptw_weight(scores[i], treat[i]);
      if (frozen.empty() || !frozen[k]) {
        out.log_weight_slope[i] = treat[i] == 1 ? -(1.0 - scores[i]) : scores[i];
      }
    }
  };

  switch (scheme.kind) {
    case WeightKind::IPTW:
      assign_iptw(fit.scores, {});
      break;
    case WeightKind::Overlap:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double e = fit.scores[i];
        out.weights[i] = overlap_weight(e, treat[i]);
        out.log_weight_slope[i] = treat[i] == 1 ? -e : 1.0 - e;
      }
      break;
    case WeightKind::Truncate: {
      const double upper = scheme.upper_q.value_or(scheme.q);
      out.effective_ps = winsorize_scores(fit.scores, scheme.q, upper);
      std::vector<bool> frozen(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) frozen[static_cast<std::size_t>(i)] = out.effective_ps[i] != fit.scores[i];
      assign_iptw(out.effective_ps, frozen);
      break;
    }
    case WeightKind::SymmetricTrim:
    case WeightKind::AsymmetricTrim: {
      out.included = scheme.kind == WeightKind::SymmetricTrim
                         ? symmetric_trim_mask(fit.scores, scheme.alpha)
                         : asymmetric_trim_mask(fit.scores, treat, scheme.q);
      const auto rows = out.included_rows();
      if (rows.empty()) throw Error(ErrorCode::AllUnitsTrimmed, "trimming removed every unit");
      Eigen::Index kept_treated = 0;
      for (auto i : rows) kept_treated += treat[i];
      if (kept_treated == 0 || kept_treated == static_cast<Eigen::Index>(rows.size())) {
        throw Error(ErrorCode::ArmEmptyAfterTrim, "a treatment arm is empty after trimming");
      }
      Eigen::VectorXd scores = fit.scores;
      if (refit_after_trim) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.p());
        Eigen::VectorXi a(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
          x.row(static_cast<Eigen::Index>(k)) = data.x().row(rows[k]);
          a[static_cast<Eigen::Index>(k)] = treat[rows[k]];
        }
        try {
          out.ps_used = fit_logistic(x, a, options);
        } catch (const Error& e) {
          throw Error(ErrorCode::RefitFailed, std::string("re-fit after trimming failed: ") + e.what());
        }
        out.ps_rows = rows;
        out.refitted = true;
        for (std::size_t k = 0; k < rows.size(); ++k) scores[rows[k]] = out.ps_used.scores[static_cast<Eigen::Index>(k)];
      }
      out.effective_ps = scores;
      assign_iptw(scores, {});
      break;
    }
  }
  return out;
}

BalanceTable weighted_covariate_means(const ObservationalDataset& data, const Eigen::VectorXd& weights) {
  const Eigen::Index p = data.p();
  BalanceTable t{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
  double w1 = 0.0, w0 = 0.0;
  Eigen::VectorXd sum1 = Eigen::VectorXd::Zero(p), sum0 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p), m0 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd ss1 = Eigen::VectorXd::Zero(p), ss0 = Eigen::VectorXd::Zero(p);
  Eigen::Index n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    const Eigen::VectorXd xi = data.x().row(i).transpose();
    if (data.treat()[i] == 1) {
      w1 += weights[i];
      sum1 += weights[i] * xi;
      m1 += xi;
      ss1 += xi.cwiseProduct(xi);
      ++n1;
    } else {
      w0 += weights[i];
      sum0 += weights[i] * xi;
      m0 += xi;
      ss0 += xi.cwiseProduct(xi);
      ++n0;
    }
  }
  if (!(w1 > 0.0) || !(w0 > 0.0)) throw Error(ErrorCode::ZeroTotalWeight, "an arm has zero total weight");
  t.treated_mean = sum1 / w1;
  t.control_mean = sum0 / w0;
  auto variance = [](const Eigen::VectorXd& s, const Eigen::VectorXd& ss, Eigen::Index k) {
    if (k < 2) return Eigen::VectorXd(Eigen::VectorXd::Zero(s.size()));
    const double kd = static_cast<double>(k);
    return Eigen::VectorXd(((ss - s.cwiseProduct(s) / kd) / (kd - 1.0)).cwiseMax(0.0));
  };
  const Eigen::VectorXd pooled = ((variance(m1, ss1, n1) + variance(m0, ss0, n0)) / 2.0).cwiseSqrt();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double diff = t.treated_mean[j] - t.control_mean[j];
    t.std_diff[j] = pooled[j] > 0.0 ? diff / pooled[j] : 0.0;
  }
  return t;
}

BalanceTable weighted_covariate_means(const ObservationalDataset& data, const WeightAssignment& w) {
  return weighted_covariate_means(data, w.weights);
}

}  // namespace rmcst
