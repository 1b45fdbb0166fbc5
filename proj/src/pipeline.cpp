#include "rmcst/pipeline.hpp"

#include "rmcst/inference.hpp"

namespace rmcst {

Estimator::Estimator(const ObservationalDataset& data, EstimationOptions options)
    : data_(data), options_(std::move(options)) {}

const PropensityFit& Estimator::propensity() {
  if (!ps_) ps_ = fit_logistic(data_, options_.logistic);
  return *ps_;
}

const CensoringFit& Estimator::full_censoring() {
  if (!censoring_) censoring_ = fit_censoring_cox(data_, {}, options_.cox);
  return *censoring_;
}

Analysis Estimator::run(const WeightScheme& scheme, std::span<const double> L, bool closed_form) {
  Analysis a;
  a.weights = compute_weights(data_, propensity(), scheme, options_.refit_after_trim, options_.logistic);
  a.censoring = scheme.trims() ? fit_censoring_cox(data_, a.weights.included, options_.cox) : full_censoring();
  a.warnings = a.censoring.warnings;
  if (!a.weights.ps_used.converged) a.warnings.push_back("propensity model did not converge");
  for (int arm = 0; arm < 2; ++arm) {
    a.hazards[static_cast<std::size_t>(arm)] = weighted_nelson_aalen(data_, a.weights, a.censoring, arm);
  }
  for (double l : L) {
    RmcstResult r = rmcst_estimate(a.hazards[1], a.hazards[0], l);
    r.scheme = scheme;
    a.results.push_back(r);
  }
  if (closed_form && !L.empty()) {
    const auto infl = influence_contributions(data_, a.weights, a.censoring, a.hazards[1], a.hazards[0], L);
    for (std::size_t k = 0; k < infl.size(); ++k) attach_closed_form(a.results[k], infl[k]);
    if (data_.n() < 50) a.warnings.push_back("closed-form variance is unreliable below n=50");
    if (scheme.trims()) a.warnings.push_back("closed-form variance is conditional on the trimmed sample");
  }
  return a;
}

Analysis analyze(const ObservationalDataset& data, const WeightScheme& scheme, std::span<const double> L,
                 bool closed_form, const EstimationOptions& options) {
  Estimator est(data, options);
  return est.run(scheme, L, closed_form);
}

}  // namespace rmcst
