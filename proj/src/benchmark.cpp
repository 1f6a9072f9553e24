#include "treestop/benchmark.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "treestop/baselines.hpp"
#include "treestop/core.hpp"
#include "treestop/cross_validation.hpp"
#include "treestop/csv_format.hpp"
#include "treestop/generators.hpp"
#include "treestop/tree_builder.hpp"

namespace treestop {
namespace {

using Clock = std::chrono::steady_clock;

struct Cell {
  BenchmarkRow row;
  std::vector<double> means;
  double last_se = 0.0;
  double seconds = 0.0;
};

class Table {
 public:
  void add(const std::string& instance, const std::string& method, const std::string& vars, const PolicyEvaluation& e,
           double seconds) {
    const std::string key = instance + '\x1f' + method + '\x1f' + vars;
    auto it = index_.find(key);
    if (it == index_.end()) {
      it = index_.emplace(key, cells_.size()).first;
      cells_.push_back({{instance, method, vars, 0.0, 0.0, 0.0}, {}, 0.0, 0.0});
    }
    Cell& c = cells_[it->second];
    c.means.push_back(e.mean_reward);
    c.last_se = mean_stderr(e.per_trajectory_reward).std_error;
    c.seconds += seconds;
  }

  std::vector<BenchmarkRow> rows() const {
    std::vector<BenchmarkRow> out;
    for (const Cell& c : cells_) {
      BenchmarkRow r = c.row;
      const auto ms = mean_stderr(c.means);
      r.mean = ms.mean;
      r.std_error = c.means.size() >= 2 ? ms.std_error : c.last_se;
      r.seconds = c.seconds / static_cast<double>(c.means.size());
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  std::vector<Cell> cells_;
  std::map<std::string, std::size_t> index_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> vars_by_name(const StoppingInstance& inst, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    if (n == "prices") {
      for (std::size_t i : price_var_indices(inst)) out.push_back(i);
      continue;
    }
    const auto idx = inst.var_index(n);
    if (!idx) throw InputError("instance has no variable " + n);
    out.push_back(*idx);
  }
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void run_uniform(const BenchmarkOptions& opt, Table& table) {
  const std::size_t n_train = opt.omega_train.value_or(20000);
  const std::size_t n_test = opt.omega_test.value_or(100000);
  const std::size_t reps = opt.replications.value_or(1);
  const StateLayout layout{true, false, true, false};
  for (double beta : {0.9, 0.95, 0.97, 0.98, 0.99, 0.995, 0.999, 0.9999, 1.0}) {
    const std::string inst = "uniform1d T=54 beta=" + fmt(beta);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto train = simulate_uniform_1d(54, beta, layout, n_train, opt.seed + 2 * r, opt.threads);
      const auto test = simulate_uniform_1d(54, beta, layout, n_test, opt.seed + 2 * r + 1, opt.threads);

      BuildConfig cfg;
      cfg.gamma = 0.005;
      cfg.threads = opt.threads;
      auto start = Clock::now();
      const auto tree = build(train, cfg);
      double secs = seconds_since(start);
      table.add(inst, "tree", "payoff,time", evaluate(tree.policy, test, opt.threads), secs);

      start = Clock::now();
      const auto ls = fit_longstaff_schwartz(train, BasisSpec({BasisTag::One}));
      secs = seconds_since(start);
      table.add(inst, "ls", "one", evaluate(ls, test, opt.threads), secs);

      start = Clock::now();
      const auto dp = exact_uniform_dp(54, beta);
      secs = seconds_since(start);
      table.add(inst, "dp", "payoff", evaluate(dp.policy, test, opt.threads), secs);
    }
  }
}

MaxCallParams option_params(double pbar) {
  MaxCallParams p;
  p.n_assets = 8;
  p.initial_price = pbar;
  return p;
}

void run_maxcall_desk(const BenchmarkOptions& opt, Table& table) {
  const std::size_t n_train = opt.omega_train.value_or(2000);
  const std::size_t n_test = opt.omega_test.value_or(20000);
  const std::size_t reps = opt.replications.value_or(10);
  const std::string inst = "maxcall n=8 pbar=90";
  const std::string vars = "prices,time,payoff,koind";
  for (std::size_t r = 0; r < reps; ++r) {
    const auto train = simulate_maxcall(option_params(90), StateLayout{}, n_train, opt.seed + 2 * r, opt.threads);
    const auto test = simulate_maxcall(option_params(90), StateLayout{}, n_test, opt.seed + 2 * r + 1, opt.threads);
    for (double gamma : {0.1, 0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001}) {
      BuildConfig cfg;
      cfg.gamma = gamma;
      cfg.threads = opt.threads;
      const auto start = Clock::now();
      const auto tree = build(train, cfg);
      const double secs = seconds_since(start);
      const std::string method = "tree gamma=" + fmt(gamma);
      table.add(inst, method + " train", vars, evaluate(tree.policy, train, opt.threads), secs);
      table.add(inst, method + " test", vars, evaluate(tree.policy, test, opt.threads), secs);
    }
  }
}

void run_maxcall_full(const BenchmarkOptions& opt, Table& table) {
  const std::size_t n_train = opt.omega_train.value_or(20000);
  const std::size_t n_test = opt.omega_test.value_or(100000);
  const std::size_t reps = opt.replications.value_or(1);
  for (double pbar : {90.0, 100.0, 110.0}) {
    const std::string inst = "maxcall n=8 pbar=" + fmt(pbar);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto train = simulate_maxcall(option_params(pbar), StateLayout{}, n_train, opt.seed + 2 * r, opt.threads);
      const auto test = simulate_maxcall(option_params(pbar), StateLayout{}, n_test, opt.seed + 2 * r + 1, opt.threads);
      for (const std::vector<std::string>& vars :
           {std::vector<std::string>{"payoff", "t"}, std::vector<std::string>{"prices", "t", "payoff", "ko"}}) {
        BuildConfig cfg;
        cfg.gamma = 0.005;
        cfg.threads = opt.threads;
        cfg.allowed_vars = vars_by_name(train.instance(), vars);
        const auto start = Clock::now();
        const auto tree = build(train, cfg);
        const double secs = seconds_since(start);
        table.add(inst, "tree", vars.size() == 2 ? "payoff,time" : "prices,time,payoff,koind",
                  evaluate(tree.policy, test, opt.threads), secs);
      }
      const auto start = Clock::now();
      const auto ls = fit_longstaff_schwartz(train, BasisSpec::parse("pricesko,koind,payoff"));
      const double secs = seconds_since(start);
      table.add(inst, "ls", "pricesko,koind,payoff", evaluate(ls, test, opt.threads), secs);
    }
  }
}

void run_cv_desk(const BenchmarkOptions& opt, Table& table) {
  const std::size_t n_train = opt.omega_train.value_or(20000);
  const std::size_t n_test = opt.omega_test.value_or(100000);
  const std::size_t reps = opt.replications.value_or(1);
  const std::string inst = "maxcall n=8 pbar=90";
  const std::string vars = "prices,time,payoff,koind";
  for (std::size_t r = 0; r < reps; ++r) {
    const auto train = simulate_maxcall(option_params(90), StateLayout{}, n_train, opt.seed + 2 * r, opt.threads);
    const auto test = simulate_maxcall(option_params(90), StateLayout{}, n_test, opt.seed + 2 * r + 1, opt.threads);

    auto start = Clock::now();
    const auto ls = fit_longstaff_schwartz(train, BasisSpec::parse("pricesko,koind,payoff"));
    double secs = seconds_since(start);
    table.add(inst, "ls", "pricesko,koind,payoff", evaluate(ls, test, opt.threads), secs);

    BuildConfig cfg;
    cfg.gamma = 0.005;
    cfg.threads = opt.threads;
    start = Clock::now();
    const auto tree = build(train, cfg);
    secs = seconds_since(start);
    table.add(inst, "tree gamma=0.005", vars, evaluate(tree.policy, test, opt.threads), secs);

    CvConfig cv;
    cv.k = 5;
    cv.gamma_min = 1e-4;
    start = Clock::now();
    const auto fit = fit_with_cv(train, cv, cfg);
    secs = seconds_since(start);
    table.add(inst, "tree-cv", vars, evaluate(fit.fit.policy, test, opt.threads), secs);
  }
}

}  // namespace

const std::vector<std::string>& benchmark_suites() {
  static const std::vector<std::string> ids{"uniform1d", "maxcall-desk", "maxcall-full", "cv-desk"};
  return ids;
}

std::vector<BenchmarkRow> run_benchmark(const std::string& suite, const BenchmarkOptions& options) {
  if (options.replications && *options.replications == 0) throw InputError("replications must be >= 1");
  Table table;
  if (suite == "uniform1d") {
    run_uniform(options, table);
  } else if (suite == "maxcall-desk") {
    run_maxcall_desk(options, table);
  } else if (suite == "maxcall-full") {
    run_maxcall_full(options, table);
  } else if (suite == "cv-desk") {
    run_cv_desk(options, table);
  } else {
    throw InputError("unknown benchmark suite: " + suite);
  }
  return table.rows();
}

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  auto quote = [](const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
  };
  os << "instance,method,variables,mean,stderr,seconds\n";
  for (const auto& r : rows) {
    os << quote(r.instance) << ',' << quote(r.method) << ',' << quote(r.variables) << ',' << format_double(r.mean) << ','
       << format_double(r.std_error) << ',' << format_double(r.seconds) << '\n';
  }
}

}  // namespace treestop
