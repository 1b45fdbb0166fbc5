#include "rmcst/reproduce.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "rmcst/error.hpp"
#include "rmcst/reference_values.hpp"

namespace rmcst {

namespace {

constexpr std::array<Target, 3> kTargets{Target::Mu1, Target::Mu0, Target::Delta};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // no "-0.000"
  return s;
}

int digits_for(const std::string& part) {
  if (part == "truth") return 3;
  if (part == "efficiency") return 2;
  if (part == "bias") return 2;
  return 1;
}

// Bias is displayed x100, matching the published bias tables.
double display_scale(const std::string& part) { return part == "bias" ? 100.0 : 1.0; }

SimulationScenario scenario_for(const ReproduceOptions& o, double gamma, const std::vector<WeightScheme>& schemes,
                                OutcomeVariant outcome, int n) {
  SimulationScenario s;
  s.gamma = gamma;
  s.n = n;
  s.reps = o.reps;
  s.L = o.L;
  s.schemes = schemes;
  s.outcome = outcome;
  s.censoring = o.censoring;
  s.master_seed = o.seed;
  s.bootstrap_B = o.B;
  s.variance = o.table == 5 ? VarianceMethod::Bootstrap : VarianceMethod::ClosedForm;
  return s;
}

}  // namespace

TableArtifact reproduce_table(const ReproduceOptions& o, const WorkerPool* pool) {
  if (o.table < 1 || o.table > 5) throw Error(ErrorCode::InvalidArgument, "table must be between 1 and 5");
  if (o.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be positive");
  if (o.super_n < 2) throw Error(ErrorCode::InvalidArgument, "super-n must be at least 2");
  const bool t5 = o.table == 5;
  const int n = o.n.value_or(t5 ? 250 : 1000);
  const auto schemes = o.schemes.value_or(t5 ? std::vector<WeightScheme>{WeightScheme::overlap(), WeightScheme::iptw()}
                                             : default_scheme_grid());
  const OutcomeVariant outcome = o.outcome.value_or(t5 ? OutcomeVariant::WithoutPsTerm : OutcomeVariant::WithPsTerm);

  TableArtifact art;
  art.table = o.table;
  art.header.emplace_back("table", std::to_string(o.table));
  art.header.emplace_back("seed", std::to_string(o.seed));
  art.header.emplace_back("super_n", std::to_string(o.super_n));
  art.header.emplace_back("outcome", outcome == OutcomeVariant::WithPsTerm ? "with-ps" : "without-ps");
  art.header.emplace_back("censoring", o.censoring == CensoringVariant::CorrectCox ? "cox" : "misspec");
  if (o.table > 1) {
    art.header.emplace_back("n", std::to_string(n));
    art.header.emplace_back("reps", std::to_string(o.reps));
    if (t5) art.header.emplace_back("B", std::to_string(o.B));
    art.budget_too_small = o.reps < kMinimumReps;
    if (art.budget_too_small) art.header.emplace_back("warning", "BudgetTooSmall");
  }
  if (o.table == 1 && o.super_n < 1'000'000) art.header.emplace_back("note", "reduced super-population");

  for (double gamma : o.gammas) {
    const SimulationScenario sc = scenario_for(o, gamma, schemes, outcome, n);
    const TruthTable truth = compute_truth(sc, o.super_n);
    if (o.table == 1) {
      for (const auto& s : schemes) {
        for (Target t : kTargets) {
          for (double L : o.L) {
            const TruthEntry& e = truth.at(s, L);
            TableRow r;
            r.part = "truth";
            r.scheme = s.label();
            r.gamma = gamma;
            r.target = t;
            r.L = L;
            r.computed = t == Target::Mu1 ? e.mu1 : t == Target::Mu0 ? e.mu0 : e.delta;
            r.mc_se = t == Target::Mu1 ? e.se_mu1 : t == Target::Mu0 ? e.se_mu0 : e.se_delta;
            r.published = reference_value(1, s, gamma, L, t);
            art.rows.push_back(r);
          }
        }
      }
      continue;
    }
    const SimulationReport rep = run_study(sc, truth, pool);
    std::vector<std::string> parts;
    if (o.table == 2) parts = {"bias"};
    if (o.table == 3) parts = {"efficiency"};
    if (o.table == 4) parts = {"coverage"};
    if (t5) parts = {"bias", "efficiency", "coverage_closed", "coverage_bootstrap"};
    for (const auto& part : parts) {
      for (const auto& s : schemes) {
        for (Target t : kTargets) {
          for (double L : o.L) {
            const ReportCell& c = rep.at(s, L, t);
            TableRow r;
            r.part = part;
            r.scheme = s.label();
            r.gamma = gamma;
            r.target = t;
            r.L = L;
            r.failures = c.failures;
            if (c.successes > 0) {
              if (part == "bias") r.computed = c.bias;
              if (part == "efficiency") r.computed = c.relative_efficiency;
              if (part == "coverage" || part == "coverage_closed") r.computed = c.coverage;
              if (part == "coverage_bootstrap") r.computed = c.bootstrap_coverage;
            }
            if (o.table == 3 || o.table == 4) r.published = reference_value(o.table, s, gamma, L, t);
            if (t5) {
              r.published = reference_value(5, s, gamma, L, t, part);
              if (r.published && part == "bias") *r.published /= 100.0;
            }
            art.rows.push_back(r);
          }
        }
      }
    }
  }
  return art;
}

void write_table_csv(std::ostream& out, const TableArtifact& t) {
  for (const auto& [k, v] : t.header) out << "# " << k << '=' << v << '\n';
  out << "part,scheme,gamma,target,L,computed,published,abs_diff,mc_se,failures\n";
  for (const auto& r : t.rows) {
    const int d = digits_for(r.part);
    const double scale = display_scale(r.part);
    out << r.part << ',' << r.scheme << ',' << format_double(r.gamma) << ',' << to_string(r.target) << ','
        << format_double(r.L) << ',';
    out << (r.computed ? fixed(*r.computed * scale, d) : "NA") << ',';
    out << (r.published ? fixed(*r.published * scale, d) : "NA") << ',';
    out << (r.computed && r.published ? fixed(std::abs(*r.computed - *r.published) * scale, d) : "NA") << ',';
    out << (r.mc_se ? fixed(*r.mc_se, 4) : "NA") << ',' << r.failures << '\n';
  }
}

void write_table_json(std::ostream& out, const TableArtifact& t) {
  nlohmann::ordered_json j;
  j["table"] = t.table;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.header) h[k] = v;
  j["header"] = h;
  j["budget_too_small"] = t.budget_too_small;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row;
    row["part"] = r.part;
    row["scheme"] = r.scheme;
    row["gamma"] = r.gamma;
    row["target"] = to_string(r.target);
    row["L"] = r.L;
    row["computed"] = r.computed ? nlohmann::ordered_json(*r.computed) : nlohmann::ordered_json(nullptr);
    row["published"] = r.published ? nlohmann::ordered_json(*r.published) : nlohmann::ordered_json(nullptr);
    if (r.mc_se) row["mc_se"] = *r.mc_se;
    row["failures"] = r.failures;
    j["rows"].push_back(row);
  }
  out << j.dump(2) << '\n';
}

}  // namespace rmcst
