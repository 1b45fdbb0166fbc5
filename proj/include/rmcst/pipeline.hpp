#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmcst/cox.hpp"
#include "rmcst/data.hpp"
#include "rmcst/estimator.hpp"
#include "rmcst/logistic.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

struct EstimationOptions {
  bool refit_after_trim = true;
  LogisticOptions logistic;
  CoxOptions cox;
};

/// Everything produced for one dataset and one weighting scheme.
struct Analysis {
  WeightAssignment weights;
  CensoringFit censoring;
  std::array<WeightedCumulativeHazard, 2> hazards;  ///< indexed by arm
  std::vector<RmcstResult> results;                 ///< one per restriction time
  std::vector<std::string> warnings;
};

/// End-to-end estimation on one dataset: logistic propensity model, balancing
/// weights, per-arm censoring Cox models, weighted Nelson-Aalen hazards and
/// restricted means. Full-sample fits are cached and shared between schemes
/// that keep every unit.
class Estimator {
 public:
  explicit Estimator(const ObservationalDataset& data, EstimationOptions options = {});

  const ObservationalDataset& data() const noexcept { return data_; }
  const PropensityFit& propensity();
  const CensoringFit& full_censoring();

  /// Point estimates for every L; with `closed_form` the standard errors and
  /// Wald intervals are filled in as well.
  Analysis run(const WeightScheme& scheme, std::span<const double> L, bool closed_form = true);

 private:
  const ObservationalDataset& data_;
  EstimationOptions options_;
  std::optional<PropensityFit> ps_;
  std::optional<CensoringFit> censoring_;
};

Analysis analyze(const ObservationalDataset& data, const WeightScheme& scheme, std::span<const double> L,
                 bool closed_form = true, const EstimationOptions& options = {});

}  // namespace rmcst
