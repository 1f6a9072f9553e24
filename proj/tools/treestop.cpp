// treestop: simulate, fit, cross-validate, evaluate and export tree stopping policies.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treestop/baselines.hpp"
#include "treestop/benchmark.hpp"
#include "treestop/core.hpp"
#include "treestop/cross_validation.hpp"
#include "treestop/generators.hpp"
#include "treestop/policy_io.hpp"
#include "treestop/trajectory_io.hpp"
#include "treestop/tree_builder.hpp"

namespace {

using nlohmann::json;
using namespace treestop;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

json number(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::size_t> resolve_vars(const StoppingInstance& inst, const std::string& list) {
  std::vector<std::size_t> out;
  if (list.empty()) return out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (name == "prices") {
      const auto idx = price_var_indices(inst);
      if (idx.empty()) throw InputError("data has no price variables");
      out.insert(out.end(), idx.begin(), idx.end());
      continue;
    }
    const auto idx = inst.var_index(name == "time" ? std::string(kTimeVar) : name == "koind" ? std::string(kKoVar) : name);
    if (!idx) throw InputError("data has no variable named " + name);
    out.push_back(*idx);
  }
  return out;
}

json summarize_json(const EvaluationSummary& s) {
  return {{"mean_reward", s.mean_reward},
          {"stderr", s.std_error},
          {"stop_rate", s.stop_rate},
          {"mean_stop_time", s.mean_stop_time}};
}

struct SimulateArgs {
  std::string instance = "maxcall";
  MaxCallParams maxcall;
  int horizon = 54;
  double beta = 1.0;
  std::string layout;
  std::size_t omega = 20000;
  std::uint64_t seed = 1;
  std::string out;
};

struct IngestArgs {
  std::string prices;
  IngestConfig config;
  std::optional<std::uint64_t> seed;
  std::string layout = "time,prices,payoff";
  std::string train_out;
  std::string test_out;
};

struct FitArgs {
  std::string data;
  std::string test;
  double gamma = 0.005;
  std::string vars;
  std::optional<std::size_t> max_depth;
  std::size_t max_iterations = 10000;
  std::string policy_out;
  std::string trace_out;
};

struct FitLsArgs {
  std::string data;
  std::string test;
  std::string basis = "one,pricesko,koind,payoff";
  std::string out;
};

struct CvArgs {
  std::string data;
  std::string test;
  std::size_t k = 5;
  double gamma_min = 1e-4;
  std::optional<std::uint64_t> shuffle_seed;
  std::string vars;
  std::size_t max_iterations = 10000;
  std::string policy_out;
  std::string curve_out;
};

struct EvaluateArgs {
  std::string policy;
  std::string data;
  bool dp = false;
};

struct DotArgs {
  std::string policy;
  std::string out;
};

struct BenchArgs {
  std::string suite;
  BenchmarkOptions options;
  std::optional<std::size_t> omega_train;
  std::optional<std::size_t> omega_test;
  std::optional<std::size_t> replications;
  std::string out;
};

int run_simulate(const SimulateArgs& a, unsigned threads) {
  std::optional<TrajectorySet> data;
  if (a.instance == "maxcall") {
    const StateLayout layout = a.layout.empty() ? StateLayout{} : StateLayout::parse(a.layout);
    MaxCallParams params = a.maxcall;
    params.periods = a.horizon;
    data.emplace(simulate_maxcall(params, layout, a.omega, a.seed, threads));
  } else if (a.instance == "uniform1d") {
    const StateLayout layout = StateLayout::parse(a.layout.empty() ? "time,payoff" : a.layout);
    data.emplace(simulate_uniform_1d(a.horizon, a.beta, layout, a.omega, a.seed, threads));
  } else {
    throw InputError("unknown instance: " + a.instance);
  }
  write_trajectories(a.out, *data);
  emit({{"trajectories", data->num_trajectories()},
        {"horizon", data->horizon()},
        {"discount", data->instance().discount},
        {"var_names", data->instance().var_names},
        {"csv", a.out},
        {"metadata", sidecar_path(a.out).string()}});
  return 0;
}

int run_ingest(IngestArgs a) {
  std::ifstream in(a.prices, std::ios::binary);
  if (!in) throw InputError("cannot open " + a.prices);
  const PriceTable table = PriceTable::read_csv(in);
  a.config.seed = a.seed;
  a.config.layout = StateLayout::parse(a.layout);
  const auto [train, test] = ingest_price_windows(table, a.config);
  write_trajectories(a.train_out, train);
  write_trajectories(a.test_out, test);
  emit({{"train_trajectories", train.num_trajectories()},
        {"test_trajectories", test.num_trajectories()},
        {"var_names", train.instance().var_names},
        {"discount", train.instance().discount}});
  return 0;
}

int run_fit(const FitArgs& a, unsigned threads) {
  const TrajectorySet data = read_trajectories(a.data);
  BuildConfig cfg;
  cfg.gamma = a.gamma;
  cfg.allowed_vars = resolve_vars(data.instance(), a.vars);
  cfg.max_depth = a.max_depth;
  cfg.max_iterations = a.max_iterations;
  cfg.threads = threads;
  const BuildResult result = build(data, cfg);
  write_policy(a.policy_out, {result.policy, data.instance()});
  if (!a.trace_out.empty()) {
    auto out = open_out(a.trace_out);
    result.trace.write_csv(out, data.instance().var_names);
  }
  json summary{{"train_objective", result.objective},
               {"nodes", result.policy.size()},
               {"splits", result.policy.num_splits()},
               {"depth", result.policy.depth()},
               {"iterations", result.trace.steps.size()},
               {"clairvoyant", clairvoyant_value(data)}};
  if (!a.test.empty()) summary["test_objective"] = evaluate(result.policy, read_trajectories(a.test), threads).mean_reward;
  emit(summary);
  return 0;
}

int run_fit_ls(const FitLsArgs& a, unsigned threads) {
  const TrajectorySet data = read_trajectories(a.data);
  const LsPolicy policy = fit_longstaff_schwartz(data, BasisSpec::parse(a.basis));
  auto out = open_out(a.out);
  policy.write_csv(out);
  json summary{{"train_objective", evaluate(policy, data, threads).mean_reward},
               {"basis_dimension", policy.basis().dimension()}};
  if (!a.test.empty()) summary["test_objective"] = evaluate(policy, read_trajectories(a.test), threads).mean_reward;
  emit(summary);
  return 0;
}

int run_cv(const CvArgs& a, unsigned threads) {
  const TrajectorySet data = read_trajectories(a.data);
  BuildConfig cfg;
  cfg.allowed_vars = resolve_vars(data.instance(), a.vars);
  cfg.max_iterations = a.max_iterations;
  cfg.threads = threads;
  CvConfig cv;
  cv.k = a.k;
  cv.gamma_min = a.gamma_min;
  cv.shuffle_seed = a.shuffle_seed;
  const CvFit fit = fit_with_cv(data, cv, cfg);
  write_policy(a.policy_out, {fit.fit.policy, data.instance()});
  if (!a.curve_out.empty()) {
    auto out = open_out(a.curve_out);
    fit.curve.write_csv(out);
  }
  json summary{{"gamma", fit.selection.gamma},
               {"interval", {number(fit.selection.lower), number(fit.selection.upper)}},
               {"cv_objective", fit.selection.value},
               {"no_signal", fit.no_signal},
               {"train_objective", fit.fit.objective},
               {"nodes", fit.fit.policy.size()},
               {"depth", fit.fit.policy.depth()}};
  if (!a.test.empty()) summary["test_objective"] = evaluate(fit.fit.policy, read_trajectories(a.test), threads).mean_reward;
  emit(summary);
  return 0;
}

int run_evaluate(const EvaluateArgs& a, unsigned threads) {
  const TrajectorySet data = read_trajectories(a.data);
  if (a.dp) {
    if (data.instance().reward_kind != "uniform1d") throw InputError("--dp needs uniform1d data");
    const auto dp = exact_uniform_dp(data.horizon(), data.instance().discount);
    emit(summarize_json(summarize(evaluate(dp.policy, data, threads))));
    return 0;
  }
  if (a.policy.empty()) throw InputError("either --policy or --dp is required");
  const PolicyFile file = read_policy(a.policy);
  if (file.instance.var_names != data.instance().var_names) {
    throw InputError("policy variables do not match the trajectory file");
  }
  emit(summarize_json(summarize(evaluate(file.policy, data, threads))));
  return 0;
}

int run_export_dot(const DotArgs& a) {
  const PolicyFile file = read_policy(a.policy);
  const std::string dot = export_dot(file.policy, file.instance.var_names);
  if (a.out.empty()) {
    std::cout << dot;
  } else {
    auto out = open_out(a.out);
    out << dot;
  }
  return 0;
}

int run_benchmark_cmd(BenchArgs a, unsigned threads) {
  a.options.omega_train = a.omega_train;
  a.options.omega_test = a.omega_test;
  a.options.replications = a.replications;
  a.options.threads = threads;
  const auto rows = run_benchmark(a.suite, a.options);
  if (a.out.empty()) {
    write_benchmark_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out);
    write_benchmark_csv(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn, evaluate and export tree policies for optimal stopping"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a trajectory CSV and its metadata sidecar");
  simulate->add_option("--instance", sim.instance, "maxcall or uniform1d")
      ->check(CLI::IsMember({"maxcall", "uniform1d"}))
      ->capture_default_str();
  simulate->add_option("--n", sim.maxcall.n_assets, "Number of assets (maxcall)")->capture_default_str();
  simulate->add_option("--pbar", sim.maxcall.initial_price, "Initial price (maxcall)")->capture_default_str();
  simulate->add_option("--strike", sim.maxcall.strike, "Strike (maxcall)")->capture_default_str();
  simulate->add_option("--barrier", sim.maxcall.barrier, "Knock-out barrier (maxcall)")->capture_default_str();
  simulate->add_option("--rate", sim.maxcall.rate, "Annual risk-free rate (maxcall)")->capture_default_str();
  simulate->add_option("--sigma", sim.maxcall.volatility, "Annual volatility (maxcall)")->capture_default_str();
  simulate->add_option("--rho", sim.maxcall.correlation, "Common correlation (maxcall)")->capture_default_str();
  simulate->add_option("--years", sim.maxcall.years, "Maturity in years (maxcall)")->capture_default_str();
  simulate->add_option("--T", sim.horizon, "Number of periods")->capture_default_str();
  simulate->add_option("--beta", sim.beta, "Discount per period (uniform1d)")->capture_default_str();
  simulate->add_option("--layout", sim.layout,
                       "State variables: comma list of time,prices,payoff,koind (default: all for maxcall, "
                       "time,payoff for uniform1d)");
  simulate->add_option("--omega", sim.omega, "Number of trajectories")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output trajectory CSV")->required();

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "Cut a daily price table into train/test trajectory windows");
  ingest->add_option("--prices", ing.prices, "Price CSV: date column then one column per ticker")->required();
  ingest->add_option("--assets", ing.config.assets_per_instance, "Assets per instance")->capture_default_str();
  ingest->add_option("--window", ing.config.window_len, "Trading days per window")->capture_default_str();
  ingest->add_option("--strike", ing.config.strike, "Strike after rescaling")->capture_default_str();
  ingest->add_option("--rescale", ing.config.rescale_to, "Day-one price of every asset")->capture_default_str();
  ingest->add_option("--train-windows", ing.config.n_train, "Leading windows used for training")->capture_default_str();
  ingest->add_option("--rate", ing.config.rate, "Annual rate for discounting")->capture_default_str();
  ingest->add_option("--day-fraction", ing.config.day_fraction, "Years per trading day")->capture_default_str();
  ingest->add_option("--seed", ing.seed, "Seed for random asset selection (first columns when omitted)");
  ingest->add_option("--layout", ing.layout, "State variables: comma list of time,prices,payoff")->capture_default_str();
  ingest->add_option("--train-out", ing.train_out, "Training trajectory CSV")->required();
  ingest->add_option("--test-out", ing.test_out, "Test trajectory CSV")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Grow a tree policy on a trajectory file");
  fit->add_option("--data", fa.data, "Training trajectory CSV")->required();
  fit->add_option("--test", fa.test, "Optional test trajectory CSV to report out-of-sample value");
  fit->add_option("--gamma", fa.gamma, "Relative improvement tolerance")->capture_default_str();
  fit->add_option("--vars", fa.vars, "Comma list of variables the tree may split on (default: all)");
  fit->add_option("--max-depth", fa.max_depth, "Depth cap");
  fit->add_option("--max-iterations", fa.max_iterations, "Safety cap on growth iterations")->capture_default_str();
  fit->add_option("--policy", fa.policy_out, "Output policy JSON")->required();
  fit->add_option("--trace", fa.trace_out, "Output build trace CSV");

  FitLsArgs la;
  auto* fit_ls = app.add_subcommand("fit-ls", "Fit a Longstaff-Schwartz regression policy");
  fit_ls->add_option("--data", la.data, "Training trajectory CSV")->required();
  fit_ls->add_option("--test", la.test, "Optional test trajectory CSV");
  fit_ls->add_option("--basis", la.basis,
                     "Comma list from one,prices,pricesko,koind,payoff,maxpriceko,max2priceko,prices2ko,maxprice,prices2")
      ->capture_default_str();
  fit_ls->add_option("--out", la.out, "Output coefficient CSV")->required();

  CvArgs ca;
  auto* cv = app.add_subcommand("cv", "Choose gamma by k-fold cross-validation and refit");
  cv->add_option("--data", ca.data, "Training trajectory CSV")->required();
  cv->add_option("--test", ca.test, "Optional test trajectory CSV");
  cv->add_option("--k", ca.k, "Number of folds")->capture_default_str();
  cv->add_option("--gamma-min", ca.gamma_min, "Smallest tolerance considered")->capture_default_str();
  cv->add_option("--shuffle-seed", ca.shuffle_seed, "Shuffle trajectories before folding");
  cv->add_option("--vars", ca.vars, "Comma list of variables the tree may split on (default: all)");
  cv->add_option("--max-iterations", ca.max_iterations, "Safety cap per build")->capture_default_str();
  cv->add_option("--policy", ca.policy_out, "Output policy JSON")->required();
  cv->add_option("--curve", ca.curve_out, "Output cross-validation curve CSV");

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Sample-average value of a policy on a trajectory file");
  eval->add_option("--policy", ea.policy, "Policy JSON");
  eval->add_flag("--dp", ea.dp, "Evaluate the exact threshold policy instead (uniform1d data)");
  eval->add_option("--data", ea.data, "Trajectory CSV")->required();

  DotArgs da;
  auto* dot = app.add_subcommand("export-dot", "Render a policy as a Graphviz digraph");
  dot->add_option("--policy", da.policy, "Policy JSON")->required();
  dot->add_option("--out", da.out, "Output file (stdout when omitted)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Run a benchmark suite and write a results CSV");
  bench->add_option("--suite", ba.suite, "uniform1d, maxcall-desk, maxcall-full or cv-desk")
      ->required()
      ->check(CLI::IsMember(benchmark_suites()));
  bench->add_option("--omega-train", ba.omega_train, "Training trajectories per replication");
  bench->add_option("--omega-test", ba.omega_test, "Test trajectories per replication");
  bench->add_option("--replications", ba.replications, "Replications per cell");
  bench->add_option("--seed", ba.options.seed, "Base seed")->capture_default_str();
  bench->add_option("--out", ba.out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim, threads);
    if (*ingest) return run_ingest(ing);
    if (*fit) return run_fit(fa, threads);
    if (*fit_ls) return run_fit_ls(la, threads);
    if (*cv) return run_cv(ca, threads);
    if (*eval) return run_evaluate(ea, threads);
    if (*dot) return run_export_dot(da);
    if (*bench) return run_benchmark_cmd(ba, threads);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const StructuralError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
