#include "rmcst/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "rmcst/error.hpp"

namespace rmcst {

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values,
                           double value_before_first_knot)
    : knots_(std::move(knots)), values_(std::move(values)), before_(value_before_first_knot) {
  if (knots_.size() != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "step function knots and values differ in length");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "step function knots must be strictly increasing");
    }
  }
}

double StepFunction::eval(double t, Side side) const {
  auto it = side == Side::Right ? std::upper_bound(knots_.begin(), knots_.end(), t)
                                : std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return before_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::jump(std::size_t k) const {
  return values_.at(k) - (k == 0 ? before_ : values_[k - 1]);
}

bool StepFunction::is_nondecreasing() const {
  double prev = before_;
  for (double v : values_) {
    if (v < prev) return false;
    prev = v;
  }
  return true;
}

}  // namespace rmcst
