#include "rmcst/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmcst/data.hpp"
#include "rmcst/error.hpp"
#include "rmcst/inference.hpp"
#include "rmcst/parallel.hpp"
#include "rmcst/pipeline.hpp"
#include "rmcst/reproduce.hpp"
#include "rmcst/simulation.hpp"
#include "rmcst/weighting.hpp"

namespace rmcst {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "NA"; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Common {
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--output", c.output, "Output path (default: standard output)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--threads", c.threads, "Worker threads (default: RMCST_THREADS or machine parallelism)");
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + c.output + "'");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing '" + c.output + "'");
}

std::vector<WeightScheme> schemes_from(const std::vector<std::string>& names, double alpha, double q) {
  std::vector<WeightScheme> out;
  for (const auto& n : names) {
    WeightScheme s;
    try {
      s = parse_scheme(n, alpha, q);
      s.validate();
    } catch (const Error& e) {
      throw UsageError(e.message());
    }
    out.push_back(s);
  }
  return out;
}

void check_L(const std::vector<double>& L) {
  if (L.empty()) throw UsageError("--L needs at least one restriction time");
  for (double l : L) {
    if (!(l > 0.0) || !std::isfinite(l)) throw UsageError("restriction times must be positive");
  }
}

OutcomeVariant outcome_from(const std::string& s) {
  return s == "without-ps" ? OutcomeVariant::WithoutPsTerm : OutcomeVariant::WithPsTerm;
}
CensoringVariant censoring_from(const std::string& s) {
  return s == "misspec" ? CensoringVariant::Misspecified : CensoringVariant::CorrectCox;
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string input;
  std::vector<std::string> schemes{"ow"};
  double alpha = 0.1;
  double q = 0.05;
  std::vector<double> L;
  std::string variance = "closed";
  int B = 200;
  std::string treat_col = "treat", time_col = "time", event_col = "event";
  std::vector<std::string> covariates;
  bool no_refit = false;
};

constexpr int kHistogramBins = 20;

std::string run_estimate(const EstimateArgs& a) {
  const auto schemes = schemes_from(a.schemes, a.alpha, a.q);
  check_L(a.L);
  if (a.variance == "bootstrap" && a.B < 2) throw UsageError("--B must be at least 2");
  ColumnSchema schema{a.treat_col, a.time_col, a.event_col, a.covariates};
  const ObservationalDataset data = load_dataset(a.input, schema);

  EstimationOptions eo;
  eo.refit_after_trim = !a.no_refit;
  Estimator est(data, eo);
  const bool closed = a.variance == "closed";
  std::vector<Analysis> analyses;
  for (const auto& s : schemes) analyses.push_back(est.run(s, a.L, closed));

  std::vector<BootstrapResult> boot;
  if (!closed) {
    WorkerPool pool(a.common.threads);
    BootstrapOptions bo;
    bo.replicates = a.B;
    bo.seed = a.common.seed;
    bo.estimation = eo;
    boot = bootstrap_ci(data, schemes, a.L, bo, &pool);
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      for (std::size_t k = 0; k < a.L.size(); ++k) {
        auto& r = analyses[s].results[k];
        const auto& b = boot[s].per_L[k];
        r.se = std::sqrt(b.delta.variance);
        r.se_mu1 = std::sqrt(b.mu1.variance);
        r.se_mu0 = std::sqrt(b.mu0.variance);
        r.ci_low = b.delta.low;
        r.ci_high = b.delta.high;
      }
    }
  }

  // Estimated propensity histogram, per arm.
  const Eigen::VectorXd& ps = est.propensity().scores;
  std::array<std::array<int, kHistogramBins>, 2> hist{};
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int bin = std::min(kHistogramBins - 1, static_cast<int>(ps[i] * kHistogramBins));
    ++hist[static_cast<std::size_t>(data.treat()[i])][static_cast<std::size_t>(bin)];
  }

  std::vector<std::pair<std::string, BalanceTable>> balance;
  balance.emplace_back("unweighted", weighted_covariate_means(data, Eigen::VectorXd::Ones(data.n()).eval()));
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    balance.emplace_back(schemes[s].label(), weighted_covariate_means(data, analyses[s].weights));
  }

  auto diagnostics = [&](const Analysis& an, const RmcstResult& r) {
    std::vector<std::string> d = an.warnings;
    if (r.beyond_followup[1]) d.push_back("L beyond treated follow-up");
    if (r.beyond_followup[0]) d.push_back("L beyond control follow-up");
    if (!closed) {
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        if (schemes[s] == r.scheme && boot[s].failed > 0) {
          d.push_back(std::to_string(boot[s].failed) + " bootstrap resamples failed");
        }
      }
    }
    return d;
  };

  std::ostringstream os;
  if (a.common.format == "json") {
    json j;
    j["n"] = data.n();
    j["variance"] = a.variance;
    j["results"] = json::array();
    for (const auto& an : analyses) {
      for (const auto& r : an.results) {
        json row;
        row["scheme"] = r.scheme.label();
        row["L"] = r.L;
        row["mu1"] = r.mu1;
        row["mu0"] = r.mu0;
        row["delta"] = r.delta;
        row["se"] = opt_json(r.se);
        row["se_mu1"] = opt_json(r.se_mu1);
        row["se_mu0"] = opt_json(r.se_mu0);
        row["ci_low"] = opt_json(r.ci_low);
        row["ci_high"] = opt_json(r.ci_high);
        row["n_included"] = an.weights.n_included();
        row["diagnostics"] = diagnostics(an, r);
        j["results"].push_back(row);
      }
    }
    json h;
    h["bins"] = kHistogramBins;
    h["control"] = hist[0];
    h["treated"] = hist[1];
    j["ps_histogram"] = h;
    j["balance"] = json::array();
    for (const auto& [name, t] : balance) {
      for (Eigen::Index c = 0; c < data.p(); ++c) {
        j["balance"].push_back({{"weights", name},
                                {"covariate", data.covariate_names()[static_cast<std::size_t>(c)]},
                                {"treated_mean", t.treated_mean[c]},
                                {"control_mean", t.control_mean[c]},
                                {"std_diff", t.std_diff[c]}});
      }
    }
    j["warnings"] = data.warnings();
    os << j.dump(2) << '\n';
    return os.str();
  }

  os << "# results\n";
  os << "scheme,L,mu1,mu0,delta,se,ci_low,ci_high,n_included,diagnostics\n";
  for (const auto& an : analyses) {
    for (const auto& r : an.results) {
      std::string diag;
      for (const auto& d : diagnostics(an, r)) diag += (diag.empty() ? "" : "; ") + d;
      os << r.scheme.label() << ',' << format_double(r.L) << ',' << fixed(r.mu1, 3) << ',' << fixed(r.mu0, 3) << ','
         << fixed(r.delta, 3) << ',' << opt_fixed(r.se, 3) << ',' << opt_fixed(r.ci_low, 3) << ','
         << opt_fixed(r.ci_high, 3) << ',' << an.weights.n_included() << ",\"" << diag << "\"\n";
    }
  }
  os << "\n# ps_histogram\narm,bin_low,bin_high,count\n";
  for (int arm = 1; arm >= 0; --arm) {
    for (int b = 0; b < kHistogramBins; ++b) {
      os << arm << ',' << fixed(b / double(kHistogramBins), 2) << ',' << fixed((b + 1) / double(kHistogramBins), 2)
         << ',' << hist[static_cast<std::size_t>(arm)][static_cast<std::size_t>(b)] << '\n';
    }
  }
  os << "\n# balance\nweights,covariate,treated_mean,control_mean,std_diff\n";
  for (const auto& [name, t] : balance) {
    for (Eigen::Index c = 0; c < data.p(); ++c) {
      os << name << ',' << data.covariate_names()[static_cast<std::size_t>(c)] << ',' << fixed(t.treated_mean[c], 4)
         << ',' << fixed(t.control_mean[c], 4) << ',' << fixed(t.std_diff[c], 4) << '\n';
    }
  }
  return os.str();
}

// ---- simulate / truth -----------------------------------------------------

struct SimArgs {
  Common common;
  double gamma = 1.0;
  int n = 1000;
  int reps = 1000;
  long super_n = 1'000'000;
  std::vector<double> L{2.0, 5.0, 10.0};
  std::vector<std::string> schemes;
  double alpha = 0.1;
  double q = 0.05;
  std::string variance = "closed";
  int B = 200;
  std::string outcome = "with-ps";
  std::string censoring = "cox";
  std::string data_out;
};

SimulationScenario scenario_from(const SimArgs& a) {
  check_L(a.L);
  if (!(a.gamma > 0.0)) throw UsageError("--gamma must be positive");
  if (a.n < 2) throw UsageError("--n must be at least 2");
  if (a.reps < 1) throw UsageError("--reps must be positive");
  if (a.super_n < 2) throw UsageError("--super-n must be at least 2");
  if (a.variance == "bootstrap" && a.B < 2) throw UsageError("--B must be at least 2");
  SimulationScenario s;
  s.gamma = a.gamma;
  s.n = a.n;
  s.reps = a.reps;
  s.L = a.L;
  if (!a.schemes.empty()) s.schemes = schemes_from(a.schemes, a.alpha, a.q);
  s.variance = a.variance == "bootstrap" ? VarianceMethod::Bootstrap : VarianceMethod::ClosedForm;
  s.bootstrap_B = a.B;
  s.outcome = outcome_from(a.outcome);
  s.censoring = censoring_from(a.censoring);
  s.master_seed = a.common.seed;
  return s;
}

std::string run_truth(const SimArgs& a) {
  const SimulationScenario sc = scenario_from(a);
  const TruthTable t = compute_truth(sc, a.super_n);
  std::ostringstream os;
  if (a.common.format == "json") {
    json j;
    j["gamma"] = t.gamma;
    j["super_n"] = t.super_n;
    j["entries"] = json::array();
    for (const auto& e : t.entries) {
      j["entries"].push_back({{"scheme", e.scheme.label()}, {"L", e.L}, {"mu1", e.mu1}, {"mu0", e.mu0},
                              {"delta", e.delta}, {"se_mu1", e.se_mu1}, {"se_mu0", e.se_mu0},
                              {"se_delta", e.se_delta}});
    }
    os << j.dump(2) << '\n';
    return os.str();
  }
  os << "# gamma=" << format_double(t.gamma) << " super_n=" << t.super_n << " seed=" << a.common.seed << '\n';
  os << "scheme,L,mu1,mu0,delta,se_mu1,se_mu0,se_delta\n";
  for (const auto& e : t.entries) {
    os << e.scheme.label() << ',' << format_double(e.L) << ',' << fixed(e.mu1, 3) << ',' << fixed(e.mu0, 3) << ','
       << fixed(e.delta, 3) << ',' << fixed(e.se_mu1, 4) << ',' << fixed(e.se_mu0, 4) << ',' << fixed(e.se_delta, 4)
       << '\n';
  }
  return os.str();
}

std::string run_simulate(const SimArgs& a) {
  const SimulationScenario sc = scenario_from(a);
  if (!a.data_out.empty()) save_dataset(a.data_out, generate_dataset(sc, 0).data);
  const TruthTable truth = compute_truth(sc, a.super_n);
  WorkerPool pool(a.common.threads);
  const SimulationReport rep = run_study(sc, truth, &pool);
  std::ostringstream os;
  if (a.common.format == "json") {
    json j;
    j["gamma"] = rep.gamma;
    j["n"] = rep.n;
    j["reps"] = rep.reps;
    j["super_n"] = a.super_n;
    j["cells"] = json::array();
    for (const auto& c : rep.cells) {
      j["cells"].push_back({{"scheme", c.scheme.label()},
                            {"L", c.L},
                            {"target", to_string(c.target)},
                            {"truth", c.truth},
                            {"mean_estimate", c.mean_estimate},
                            {"bias", c.bias},
                            {"mc_variance", c.mc_variance},
                            {"relative_efficiency", opt_json(c.relative_efficiency)},
                            {"coverage", c.coverage},
                            {"bootstrap_coverage", opt_json(c.bootstrap_coverage)},
                            {"mean_se", c.mean_se},
                            {"successes", c.successes},
                            {"failures", c.failures}});
    }
    os << j.dump(2) << '\n';
    return os.str();
  }
  os << "# gamma=" << format_double(rep.gamma) << " n=" << rep.n << " reps=" << rep.reps << " super_n=" << a.super_n
     << " seed=" << a.common.seed << '\n';
  if (rep.reps < kMinimumReps) os << "# warning=BudgetTooSmall\n";
  os << "scheme,L,target,truth,mean_estimate,bias,mc_variance,relative_efficiency,coverage,bootstrap_coverage,"
        "mean_se,successes,failures\n";
  for (const auto& c : rep.cells) {
    os << c.scheme.label() << ',' << format_double(c.L) << ',' << to_string(c.target) << ',' << fixed(c.truth, 3)
       << ',' << fixed(c.mean_estimate, 3) << ',' << fixed(c.bias, 4) << ',' << fixed(c.mc_variance, 5) << ','
       << opt_fixed(c.relative_efficiency, 2) << ',' << fixed(c.coverage, 1) << ','
       << opt_fixed(c.bootstrap_coverage, 1) << ',' << fixed(c.mean_se, 4) << ',' << c.successes << ','
       << c.failures << '\n';
  }
  return os.str();
}

// ---- reproduce ------------------------------------------------------------

struct ReproduceArgs {
  Common common;
  int table = 1;
  int reps = 1000;
  long super_n = 1'000'000;
  std::optional<int> n;
  int B = 200;
  std::vector<double> gammas{1.0, 3.0, 5.0};
  std::string outcome;
  std::string censoring = "cox";
};

std::string run_reproduce(const ReproduceArgs& a) {
  if (a.reps < 1) throw UsageError("--reps must be positive");
  if (a.super_n < 2) throw UsageError("--super-n must be at least 2");
  if (a.n && *a.n < 2) throw UsageError("--n must be at least 2");
  if (a.B < 2) throw UsageError("--B must be at least 2");
  for (double g : a.gammas) {
    if (!(g > 0.0)) throw UsageError("--gamma must be positive");
  }
  ReproduceOptions o;
  o.table = a.table;
  o.reps = a.reps;
  o.super_n = a.super_n;
  o.seed = a.common.seed;
  o.n = a.n;
  o.B = a.B;
  o.gammas = a.gammas;
  if (!a.outcome.empty()) o.outcome = outcome_from(a.outcome);
  o.censoring = censoring_from(a.censoring);
  WorkerPool pool(a.common.threads);
  const TableArtifact t = reproduce_table(o, &pool);
  std::ostringstream os;
  if (a.common.format == "json") {
    write_table_json(os, t);
  } else {
    write_table_csv(os, t);
  }
  return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Restricted mean counterfactual survival time estimation with balancing weights", "rmcst"};
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Estimate restricted mean survival contrasts on a dataset");
  add_common(est, ea.common);
  est->add_option("--input", ea.input, "Delimited data file")->required();
  est->add_option("--scheme", ea.schemes, "Weighting scheme (repeatable): iptw, ow, symtrim, asymtrim, truncate");
  est->add_option("--alpha", ea.alpha, "Symmetric trimming threshold");
  est->add_option("--q", ea.q, "Asymmetric trimming or truncation quantile");
  est->add_option("--L", ea.L, "Restriction times, comma separated")->delimiter(',')->required();
  est->add_option("--variance", ea.variance, "Variance method")->check(CLI::IsMember({"closed", "bootstrap"}));
  est->add_option("--B", ea.B, "Bootstrap replicates");
  est->add_option("--treat-col", ea.treat_col, "Treatment column name");
  est->add_option("--time-col", ea.time_col, "Observed time column name");
  est->add_option("--event-col", ea.event_col, "Event indicator column name");
  est->add_option("--covariates", ea.covariates, "Covariate columns (default: all others)")->delimiter(',');
  est->add_flag("--no-refit", ea.no_refit, "Keep the full-sample propensity model after trimming");

  SimArgs sa;
  auto add_sim = [](CLI::App* sub, SimArgs& s) {
    add_common(sub, s.common);
    sub->add_option("--gamma", s.gamma, "Overlap multiplier");
    sub->add_option("--L", s.L, "Restriction times, comma separated")->delimiter(',');
    sub->add_option("--scheme", s.schemes, "Weighting scheme (repeatable; default: full grid)");
    sub->add_option("--alpha", s.alpha, "Symmetric trimming threshold");
    sub->add_option("--q", s.q, "Asymmetric trimming or truncation quantile");
    sub->add_option("--super-n", s.super_n, "Super-population size for truths");
    sub->add_option("--outcome-variant", s.outcome, "Outcome model")->check(CLI::IsMember({"with-ps", "without-ps"}));
    sub->add_option("--censoring-variant", s.censoring, "Censoring model")->check(CLI::IsMember({"cox", "misspec"}));
  };
  auto* sim = app.add_subcommand("simulate", "Run the replication study for one overlap level");
  add_sim(sim, sa);
  sim->add_option("--n", sa.n, "Sample size");
  sim->add_option("--reps", sa.reps, "Replications");
  sim->add_option("--variance", sa.variance, "Variance method")->check(CLI::IsMember({"closed", "bootstrap"}));
  sim->add_option("--B", sa.B, "Bootstrap replicates per replication");
  sim->add_option("--data-out", sa.data_out, "Also write replication 0 as a data file");

  SimArgs ta;
  auto* truth = app.add_subcommand("truth", "Super-population truths for one overlap level");
  add_sim(truth, ta);

  ReproduceArgs ra;
  auto* rep = app.add_subcommand("reproduce", "Regenerate a table of the simulation study");
  add_common(rep, ra.common);
  rep->add_option("--table", ra.table, "Table number")->required()->check(CLI::Range(1, 5));
  rep->add_option("--reps", ra.reps, "Replications per overlap level");
  rep->add_option("--super-n", ra.super_n, "Super-population size for truths");
  rep->add_option("--n", ra.n, "Sample size");
  rep->add_option("--B", ra.B, "Bootstrap replicates (table 5)");
  rep->add_option("--gamma", ra.gammas, "Overlap levels, comma separated")->delimiter(',');
  rep->add_option("--outcome-variant", ra.outcome, "Outcome model")->check(CLI::IsMember({"with-ps", "without-ps"}));
  rep->add_option("--censoring-variant", ra.censoring, "Censoring model")->check(CLI::IsMember({"cox", "misspec"}));

  auto usage = [&](const std::string& msg) {
    err << "error: code=UsageError message=" << msg << '\n';
    return kExitUsage;
  };
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return usage(msg);
  }

  try {
    std::string text;
    const Common* common = nullptr;
    if (est->parsed()) {
      text = run_estimate(ea);
      common = &ea.common;
    } else if (sim->parsed()) {
      text = run_simulate(sa);
      common = &sa.common;
    } else if (truth->parsed()) {
      text = run_truth(ta);
      common = &ta.common;
    } else {
      text = run_reproduce(ra);
      common = &ra.common;
    }
    emit(*common, text, out);
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const Error& e) {
    std::string msg = e.message();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: code=" << to_string(e.code()) << " message=" << msg << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: code=Internal message=" << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace rmcst
