#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmcst/data.hpp"
#include "rmcst/logistic.hpp"

namespace rmcst {

enum class WeightKind { IPTW, Overlap, SymmetricTrim, AsymmetricTrim, Truncate };

/// Balancing-weight scheme. `alpha` is read only by SymmetricTrim and `q` only
/// by AsymmetricTrim and Truncate.
struct WeightScheme {
  WeightKind kind = WeightKind::IPTW;
  double alpha = 0.0;
  double q = 0.0;
  /// Truncation only: fraction winsorized in the upper tail when it should
  /// differ from `q`. Unset means the symmetric rule (lowest and highest 100q%).
  std::optional<double> upper_q;

  static WeightScheme iptw();
  static WeightScheme overlap();
  static WeightScheme symmetric_trim(double alpha);
  static WeightScheme asymmetric_trim(double q);
  static WeightScheme truncate(double q);

  /// Short stable identifier, e.g. "ow", "symtrim(0.05)", "truncate(0.025)".
  std::string label() const;
  /// Throws InvalidArgument when alpha or q is outside [0, 0.5).
  void validate() const;
  bool trims() const noexcept {
    return kind == WeightKind::SymmetricTrim || kind == WeightKind::AsymmetricTrim;
  }

  friend bool operator==(const WeightScheme&, const WeightScheme&) = default;
};

/// Parses the labels produced by WeightScheme::label() as well as the bare
/// names "iptw", "ow", "symtrim", "asymtrim", "truncate" (parameters then
/// come from `alpha` / `q`).
WeightScheme parse_scheme(const std::string& text, double alpha = 0.1, double q = 0.05);

/// Which population the scheme targets: h(X) = 1, h(X) = e(1 - e), or the
/// indicator of a retained propensity region.
enum class Tilting { Uniform, Overlap, Region };
Tilting tilting_of(WeightKind kind);

struct WeightAssignment {
  WeightScheme scheme;
  Tilting tilting = Tilting::Uniform;
  std::vector<bool> included;
  Eigen::VectorXd weights;        ///< zero where excluded
  PropensityFit ps_used;          ///< fit on `ps_rows` (the trimmed sample after a re-fit)
  std::vector<Eigen::Index> ps_rows;
  Eigen::VectorXd effective_ps;   ///< score each weight was built from (winsorized under truncation)
  /// d log(w_i) / d(linear predictor of ps_used); zero for excluded or winsorized units.
  Eigen::VectorXd log_weight_slope;
  bool refitted = false;

  Eigen::Index n_included() const;
  std::vector<Eigen::Index> included_rows() const;
};

/// Type-7 quantile: the k-th of n order statistics sits at probability (k-1)/(n-1).
double quantile(std::vector<double> values, double prob);

std::vector<bool> symmetric_trim_mask(const Eigen::VectorXd& scores, double alpha);

/// Common-support exclusion followed, when q > 0, by removal of scores below the
/// q-th quantile among treated or above the (1-q)-th quantile among controls.
/// Throws AllUnitsTrimmed when nothing survives.
std::vector<bool> asymmetric_trim_mask(const Eigen::VectorXd& scores, const Eigen::VectorXi& treat, double q);

/// Scores clipped to [p_lower, p_upper], the lower_q and (1 - upper_q) quantiles.
Eigen::VectorXd winsorize_scores(const Eigen::VectorXd& scores, double lower_q, double upper_q);

/// IPTW weight 1/e (treated) or 1/(1-e) (control).
double iptw_weight(double score, int treat);
/// Overlap weight 1-e (treated) or e (control).
double overlap_weight(double score, int treat);

WeightAssignment compute_weights(const ObservationalDataset& data, const PropensityFit& fit,
                                 const WeightScheme& scheme, bool refit_after_trim = true,
                                 const LogisticOptions& options = {});

struct BalanceTable {
  Eigen::VectorXd treated_mean;
  Eigen::VectorXd control_mean;
  /// (treated - control) / sqrt((s1^2 + s0^2) / 2) with unweighted arm variances.
  Eigen::VectorXd std_diff;
};

BalanceTable weighted_covariate_means(const ObservationalDataset& data, const WeightAssignment& w);
BalanceTable weighted_covariate_means(const ObservationalDataset& data, const Eigen::VectorXd& weights);

}  // namespace rmcst
