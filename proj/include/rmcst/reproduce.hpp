#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmcst/parallel.hpp"
#include "rmcst/simulation.hpp"

namespace rmcst {

struct ReproduceOptions {
  int table = 1;
  int reps = 1000;
  long super_n = 1'000'000;
  std::uint64_t seed = 1;
  /// Sample size; unset means 1000 (tables 2-4) or 250 (table 5).
  std::optional<int> n;
  int B = 200;
  std::vector<double> gammas{1.0, 3.0, 5.0};
  std::vector<double> L{2.0, 5.0, 10.0};
  /// Unset means the default grid (tables 1-4) or OW and IPTW (table 5).
  std::optional<std::vector<WeightScheme>> schemes;
  /// Unset means with the PS term (tables 1-4) or without it (table 5).
  std::optional<OutcomeVariant> outcome;
  CensoringVariant censoring = CensoringVariant::CorrectCox;
};

inline constexpr int kMinimumReps = 200;

struct TableRow {
  std::string part;  ///< truth, bias, efficiency, coverage, coverage_closed, coverage_bootstrap
  std::string scheme;
  double gamma = 0.0;
  Target target = Target::Delta;
  double L = 0.0;
  std::optional<double> computed;
  std::optional<double> published;
  std::optional<double> mc_se;  ///< Monte Carlo SE of a truth
  int failures = 0;
};

struct TableArtifact {
  int table = 0;
  std::vector<std::pair<std::string, std::string>> header;  ///< budget and flags, in order
  bool budget_too_small = false;
  std::vector<TableRow> rows;
};

TableArtifact reproduce_table(const ReproduceOptions& options, const WorkerPool* pool = nullptr);

/// Estimands at 3 decimals, relative efficiency at 2, coverage at 1, bias x100 at 2.
void write_table_csv(std::ostream& out, const TableArtifact& t);
void write_table_json(std::ostream& out, const TableArtifact& t);

}  // namespace rmcst
