#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rmcst/simulation.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

/// Published values for one (scheme, gamma) row. Columns are mu1, mu0, delta,
/// each at L = 2, 5, 10. Used only for side-by-side reporting.
struct ReferenceRow {
  const char* scheme;  ///< WeightScheme::label()
  double gamma;
  std::array<double, 9> values;
};

struct Table5Row {
  const char* part;    ///< bias, efficiency, coverage_closed, coverage_bootstrap
  const char* scheme;  ///< ow or iptw
  double gamma;
  std::array<double, 9> values;
};

const std::vector<ReferenceRow>& reference_table(int table);  ///< 1, 3 or 4
const std::vector<Table5Row>& reference_table5();

/// Published value for a cell, when the grid contains it.
std::optional<double> reference_value(int table, const WeightScheme& scheme, double gamma, double L, Target target,
                                      const std::string& part = {});

}  // namespace rmcst
