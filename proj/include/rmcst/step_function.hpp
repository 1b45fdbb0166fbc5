#pragma once

#include <vector>

namespace rmcst {

enum class Side { Right, Left };

/// Right-continuous piecewise-constant function of time.
///
/// `values[k]` holds on `[knots[k], knots[k+1])`; before the first knot the
/// function equals `value_before_first_knot`. Left limits are available for
/// quantities such as K_C(u-) that must exclude a jump located exactly at u.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> knots, std::vector<double> values,
               double value_before_first_knot = 0.0);

  double eval(double t, Side side = Side::Right) const;

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double value_before_first_knot() const noexcept { return before_; }
  bool empty() const noexcept { return knots_.empty(); }

  /// Size of the jump located at knot k.
  double jump(std::size_t k) const;

  bool is_nondecreasing() const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double before_ = 0.0;
};

}  // namespace rmcst
