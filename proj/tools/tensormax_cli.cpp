// tensormax: largest-entry statistics of the sample random tensor.
//
//   tensormax quantile --m 2 --sided two --q 0.95
//   tensormax test --input data.csv --m 2
//   tensormax simulate --config experiment.json
//   tensormax diagnose --what lambda --z 0 --n 500 --p 50 --m 2 --reps 1000000
//
// stdout carries JSON (or a single number for quantile); stderr carries logs.
// Exit codes: 0 ok, 1 internal error, 2 usage/parameter error, 3 budget error, 4 IO error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tensormax/asymptotics.hpp"
#include "tensormax/diagnostics.hpp"
#include "tensormax/error.hpp"
#include "tensormax/hypotest.hpp"
#include "tensormax/lab.hpp"
#include "tensormax/matrix_io.hpp"
#include "tensormax/parallel.hpp"
#include "tensormax/statcore.hpp"

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240607;

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kBudget = 3, kIo = 4 };

void log_config(const std::string& subcommand, const json& resolved) {
  std::cerr << "[tensormax] " << subcommand << " " << resolved.dump() << "\n";
}

tmax::PopulationSpec make_spec(const std::string& family, int df) {
  tmax::PopulationSpec spec;
  spec.family = tmax::parse_family(family);
  spec.df = df;
  spec.label = family;
  spec.validate();
  return spec;
}

struct QuantileArgs {
  int m = 2;
  std::string sided = "two";
  std::optional<double> q;
  std::optional<double> z;
};

int run_quantile(const QuantileArgs& a) {
  const tmax::GumbelLimit limit(a.m, tmax::parse_sided(a.sided));
  if (a.q.has_value() == a.z.has_value()) throw tmax::ParameterError("give exactly one of --q or --z");
  json cfg{{"m", a.m}, {"sided", a.sided}};
  if (a.q) cfg["q"] = *a.q;
  if (a.z) cfg["z"] = *a.z;
  log_config("quantile", cfg);
  const double v = a.q ? limit.quantile(*a.q) : limit.cdf(*a.z);
  std::cout << tmax::format_double(v, 12) << "\n";
  return kOk;
}

struct TestArgs {
  std::vector<std::string> inputs;
  int m = 0;
  std::string sided = "two";
  bool studentize = false;
  double max_cost = tmax::kDefaultCostCeiling;
  unsigned workers = 0;
};

int run_test(const TestArgs& a) {
  std::vector<tmax::DataMatrix> mats;
  for (const auto& path : a.inputs) {
    tmax::DataMatrix x = tmax::read_matrix_csv(std::filesystem::path(path));
    mats.push_back(a.studentize ? tmax::studentize(x) : std::move(x));
  }
  const tmax::Sided sided = tmax::parse_sided(a.sided);
  tmax::TestOptions opts;
  opts.enumeration = {a.workers, a.max_cost};
  log_config("test", json{{"inputs", a.inputs},
                          {"m", a.m},
                          {"sided", a.sided},
                          {"studentize", a.studentize},
                          {"max_cost", a.max_cost},
                          {"workers", tmax::resolve_workers(a.workers)}});
  tmax::TestResult result;
  if (mats.size() == 1) {
    if (a.m == 0) throw tmax::ParameterError("--m is required with a single --input");
    result = tmax::test_independence(mats.front(), a.m, sided, opts);
  } else {
    if (a.m != 0 && static_cast<std::size_t>(a.m) != mats.size()) {
      throw tmax::ParameterError("--m must equal the number of --input files for the multi-population test");
    }
    result = tmax::test_independence_multi(mats, sided, opts);
  }
  json out = result;
  if (a.studentize) out["studentized"] = true;
  std::cout << out.dump(2) << "\n";
  return kOk;
}

struct SimulateArgs {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

int run_simulate(const SimulateArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw tmax::IoError("cannot open " + a.config + " for reading");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw tmax::IoError(a.config + ": invalid JSON: " + e.what());
  }
  tmax::ExperimentConfig cfg;
  cfg.master_seed = kDefaultSeed;
  cfg = raw.get<tmax::ExperimentConfig>();
  if (!raw.contains("master_seed")) cfg.master_seed = kDefaultSeed;
  if (a.seed) cfg.master_seed = *a.seed;
  if (!a.output.empty()) cfg.output_path = a.output;
  if (cfg.output_path.empty()) throw tmax::ParameterError("output_path missing (set it in the config or pass --output)");
  cfg.workers = a.workers;
  json logged = cfg;
  logged["workers"] = tmax::resolve_workers(cfg.workers);
  log_config("simulate", logged);
  cfg.validate();

  const tmax::ExperimentReport report = tmax::run_experiment(cfg);
  tmax::persist(report, cfg.output_path);
  for (const auto& c : report.cells) {
    std::cerr << "[tensormax] cell " << c.cell_id << " done in " << c.runtime_seconds << " s, ks=" << c.ks_distance
              << "\n";
  }
  std::cout << tmax::summary_json(report).dump(2) << "\n";
  return kOk;
}

struct DiagnoseArgs {
  std::string what;
  double z = 0.0;
  std::size_t n = 500;
  std::size_t p = 50;
  int m = 2;
  std::string family = "StandardNormal";
  int df = 0;
  std::uint64_t reps = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream = 0;
  std::optional<double> single_tail;
  int s = 1;
  std::optional<double> a_n;
  double x = 2.0;
  unsigned workers = 0;
};

int run_diagnose(const DiagnoseArgs& a) {
  const tmax::SeedSpec seed{a.seed, a.stream};
  json cfg{{"what", a.what}, {"n", a.n}, {"p", a.p}, {"m", a.m}, {"family", a.family},
           {"reps", a.reps}, {"seed", seed}, {"workers", tmax::resolve_workers(a.workers)}};
  if (a.df) cfg["df"] = a.df;
  json out;
  if (a.what == "b1") {
    double tail = 0.0;
    if (a.single_tail) {
      tail = *a.single_tail;
    } else {
      // Asymptotic single-tuple tail m!/p^m e^{-z/2}.
      tail = std::exp(std::lgamma(a.m + 1.0) - a.m * std::log(static_cast<double>(a.p))) * tmax::lambda_limit(a.z);
      cfg["z"] = a.z;
    }
    cfg["single_tail"] = tail;
    log_config("diagnose", cfg);
    out = json{{"p", a.p}, {"m", a.m}, {"single_tail", tail}, {"b1_bound", tmax::b1_bound(a.p, a.m, tail)}};
  } else {
    const tmax::PopulationSpec spec = make_spec(a.family, a.df);
    if (a.what == "lambda") {
      cfg["z"] = a.z;
      log_config("diagnose", cfg);
      out = tmax::estimate_lambda(a.z, a.n, a.p, a.m, spec, a.reps, seed, a.workers);
    } else if (a.what == "pairtail") {
      const double an = a.a_n.value_or(1.0);
      cfg["s"] = a.s;
      cfg["a_n"] = an;
      log_config("diagnose", cfg);
      const tmax::PairTailSpec ps{a.s, an, a.n, static_cast<double>(a.p), a.m, spec};
      const auto est = tmax::estimate_pair_tail(ps, a.reps, seed, a.workers);
      const double log_p = std::log(static_cast<double>(a.p));
      out = json{{"s", a.s},
                 {"a_n", an},
                 {"threshold", an * std::sqrt(static_cast<double>(a.n) * log_p)},
                 {"estimate", est},
                 {"rate_subexponential", std::pow(static_cast<double>(a.p), -an * an)},
                 {"rate_polynomial", std::pow(static_cast<double>(a.p), -2.0 * a.m)}};
    } else if (a.what == "mdr") {
      cfg["x"] = a.x;
      log_config("diagnose", cfg);
      out = tmax::moderate_deviation_ratio(spec, a.m, a.n, a.x, a.reps, seed, a.workers);
    } else if (a.what == "steinchen") {
      cfg["z"] = a.z;
      if (a.a_n) cfg["a_n"] = *a.a_n;
      log_config("diagnose", cfg);
      out = tmax::stein_chen_report(a.z, a.n, a.p, a.m, spec, a.reps, seed, a.workers, a.a_n);
    } else {
      throw tmax::ParameterError("--what must be one of lambda, b1, pairtail, mdr, steinchen");
    }
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Largest off-diagonal entry of the sample random tensor: limit law, tests and Monte Carlo checks"};
  app.require_subcommand(1);

  QuantileArgs qa;
  auto* quantile = app.add_subcommand("quantile", "Quantile (--q) or CDF value (--z) of the limiting law");
  quantile->add_option("--m", qa.m, "Tensor order m, 2..20")->required();
  quantile->add_option("--sided", qa.sided, "two: |entry| maximum; one: signed maximum")
      ->check(CLI::IsMember({"two", "one"}))
      ->capture_default_str();
  auto* q_opt = quantile->add_option("--q", qa.q, "Probability in (0,1); prints the quantile");
  auto* z_opt = quantile->add_option("--z", qa.z, "Point on the normalized scale; prints the CDF");
  q_opt->excludes(z_opt);

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Asymptotic independence test on a headerless CSV matrix (rows = observations)");
  test->add_option("--input", ta.inputs, "CSV file; repeat once per population for the multi-population test")
      ->required();
  test->add_option("--m", ta.m, "Tensor order m (defaults to the number of inputs when more than one)");
  test->add_option("--sided", ta.sided, "two: W_n (default); one: signed maximum")
      ->check(CLI::IsMember({"two", "one"}))
      ->capture_default_str();
  test->add_flag("--studentize", ta.studentize,
                 "Center and scale each column by its sample mean and sd first (heuristic; the limit theory assumes "
                 "standardized data)");
  test->add_option("--max-cost", ta.max_cost, "Ceiling on enumeration cost, in multiply-adds")->capture_default_str();
  test->add_option("--workers", ta.workers, "Worker threads, 0 = all cores")->capture_default_str();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a replicated Monte Carlo experiment grid");
  simulate->add_option("--config", sa.config, "Experiment config JSON")->required();
  simulate->add_option("--output", sa.output, "Output directory (overrides output_path in the config)");
  simulate->add_option("--seed", sa.seed, "Master seed (overrides the config; default " + std::to_string(kDefaultSeed) + ")");
  simulate->add_option("--workers", sa.workers, "Worker threads, 0 = all cores; results do not depend on it")
      ->capture_default_str();

  DiagnoseArgs da;
  auto* diagnose = app.add_subcommand("diagnose", "Monte Carlo estimates of proof-level quantities");
  diagnose->add_option("--what", da.what, "lambda | b1 | pairtail | mdr | steinchen")
      ->required()
      ->check(CLI::IsMember({"lambda", "b1", "pairtail", "mdr", "steinchen"}));
  diagnose->add_option("--z", da.z, "Point on the limit scale (lambda, b1, steinchen)")->capture_default_str();
  diagnose->add_option("--n", da.n, "Observations per replicate")->capture_default_str();
  diagnose->add_option("--p", da.p, "Dimension (enters through C(p,m) and log p)")->capture_default_str();
  diagnose->add_option("--m", da.m, "Tensor order")->capture_default_str();
  diagnose->add_option("--family", da.family,
                       "StandardNormal | Rademacher | UniformScaled | CenteredExponential | StudentTStandardized")
      ->capture_default_str();
  diagnose->add_option("--df", da.df, "Degrees of freedom for StudentTStandardized (> 2)");
  diagnose->add_option("--reps", da.reps, "Monte Carlo replicates")->capture_default_str();
  diagnose->add_option("--seed", da.seed, "Master seed")->capture_default_str();
  diagnose->add_option("--stream", da.stream, "Stream id")->capture_default_str();
  diagnose->add_option("--single-tail", da.single_tail,
                       "b1: single-tuple tail probability (default: asymptotic m!/p^m e^{-z/2})");
  diagnose->add_option("--s", da.s, "pairtail: shared index count, 1..m-1")->capture_default_str();
  diagnose->add_option("--a", da.a_n, "pairtail/steinchen: threshold a_n, in units of sqrt(n log p)");
  diagnose->add_option("--x", da.x, "mdr: threshold x on the S_n/sqrt(n) scale")->capture_default_str();
  diagnose->add_option("--workers", da.workers, "Worker threads, 0 = all cores")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*quantile) return run_quantile(qa);
    if (*test) return run_test(ta);
    if (*simulate) return run_simulate(sa);
    if (*diagnose) return run_diagnose(da);
  } catch (const tmax::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kBudget;
  } catch (const tmax::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const tmax::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
