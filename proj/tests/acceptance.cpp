// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: acceptance [name ...] runs only the named criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "treestop/baselines.hpp"
#include "treestop/cross_validation.hpp"
#include "treestop/generators.hpp"
#include "treestop/tree_builder.hpp"

using namespace treestop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_of(const std::vector<double>& xs) { return mean_stderr(xs).mean; }

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

MaxCallParams option(double pbar) {
  MaxCallParams p;
  p.initial_price = pbar;
  return p;
}

std::vector<std::size_t> vars_named(const StoppingInstance& inst, std::initializer_list<const char*> names) {
  std::vector<std::size_t> out;
  for (const char* n : names) out.push_back(*inst.var_index(n));
  return out;
}

const StateLayout kTimePayoff{true, false, true, false};

// ---------------------------------------------------------------------------

Outcome exact_dp() {
  const std::vector<std::pair<double, double>> table{{0.9, 0.6964},  {0.95, 0.7620},  {0.97, 0.8044},
                                                     {0.98, 0.8340}, {0.99, 0.8763},  {0.995, 0.9087},
                                                     {0.999, 0.9507}, {0.9999, 0.9648}, {1.0, 0.9666}};
  bool ok = true;
  std::string worst;
  double best_time = 1e9;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = Clock::now();
    for (const auto& [beta, ref] : table) {
      const double v = exact_uniform_dp(54, beta).optimal_value;
      if (rep == 0 && std::round(v * 1e4) != std::round(ref * 1e4)) {
        ok = false;
        worst += fmt(" beta=%g got %.6f want %.4f;", beta, v, ref);
      }
    }
    best_time = std::min(best_time, seconds_since(t0));
  }
  const double small = exact_uniform_dp(3, 1.0).optimal_value;
  ok = ok && small == 89.0 / 128.0 && best_time < 1e-3;
  return {ok, fmt("9/9 values to 4 d.p.%s; T=3 value %.10g (89/128 = %.10g); %.1f us", worst.c_str(), small,
                  89.0 / 128.0, best_time * 1e6)};
}

struct UniformRun {
  std::vector<double> tree_oos;
  std::vector<double> tree_se;
  std::vector<double> ls_oos;
  double seconds = 0.0;
};

UniformRun uniform_runs(double beta, bool with_tree, bool with_ls) {
  UniformRun r;
  const auto t0 = Clock::now();
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    const auto train = simulate_uniform_1d(54, beta, kTimePayoff, 20000, 1000 + 2 * rep);
    const auto test = simulate_uniform_1d(54, beta, kTimePayoff, 100000, 1001 + 2 * rep);
    if (with_tree) {
      BuildConfig cfg;
      cfg.gamma = 0.005;
      cfg.allowed_vars = vars_named(train.instance(), {"payoff", "t"});
      const auto fit = build(train, cfg);
      const auto ms = mean_stderr(evaluate(fit.policy, test).per_trajectory_reward);
      r.tree_oos.push_back(ms.mean);
      r.tree_se.push_back(ms.std_error);
    }
    if (with_ls) {
      const auto ls = fit_longstaff_schwartz(train, BasisSpec({BasisTag::One}));
      r.ls_oos.push_back(evaluate(ls, test).mean_reward);
    }
  }
  r.seconds = seconds_since(t0);
  return r;
}

Outcome uniform_tree() {
  const std::vector<std::pair<double, double>> targets{{0.9, 0.6962}, {0.99, 0.8762}, {1.0, 0.9532}};
  bool ok = true;
  std::string detail;
  for (const auto& [beta, ref] : targets) {
    const auto r = uniform_runs(beta, true, false);
    const double optimal = exact_uniform_dp(54, beta).optimal_value;
    const double m = mean_of(r.tree_oos);
    bool capped = true;
    for (std::size_t i = 0; i < r.tree_oos.size(); ++i) capped = capped && r.tree_oos[i] <= optimal + 3.0 * r.tree_se[i];
    const bool this_ok = std::abs(m - ref) <= 0.01 && capped && r.seconds < 60.0;
    ok = ok && this_ok;
    detail += fmt(" beta=%g: %.4f (target %.4f +-0.01, optimal %.4f%s, %.1fs);", beta, m, ref, optimal,
                  capped ? "" : " EXCEEDED", r.seconds);
  }
  return {ok, detail};
}

Outcome uniform_ls() {
  const auto r = uniform_runs(1.0, false, true);
  const double m = mean_of(r.ls_oos);
  return {std::abs(m - 0.9665) <= 0.003 && r.seconds < 60.0,
          fmt("beta=1 mean OOS %.4f (target 0.9665 +-0.003), %.1fs", m, r.seconds)};
}

Outcome maxcall_desk() {
  const auto t0 = Clock::now();
  std::vector<double> train_v, test_v;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto train = simulate_maxcall(option(90), StateLayout{}, 2000, 2000 + 2 * rep);
    const auto test = simulate_maxcall(option(90), StateLayout{}, 20000, 2001 + 2 * rep);
    BuildConfig cfg;
    cfg.gamma = 0.005;
    const auto fit = build(train, cfg);
    train_v.push_back(fit.objective);
    test_v.push_back(evaluate(fit.policy, test).mean_reward);
  }
  const double secs = seconds_since(t0);
  const double tr = mean_of(train_v);
  const double te = mean_of(test_v);
  return {std::abs(tr - 45.47) <= 0.5 && std::abs(te - 45.38) <= 0.5 && secs < 120.0,
          fmt("train %.3f (target 45.47 +-0.5), test %.3f (target 45.38 +-0.5), %.1fs", tr, te, secs)};
}

Outcome maxcall_full() {
  const auto t0 = Clock::now();
  const auto train = simulate_maxcall(option(100), StateLayout{}, 20000, 3000);
  const auto test = simulate_maxcall(option(100), StateLayout{}, 100000, 3001);
  BuildConfig cfg;
  cfg.gamma = 0.005;
  cfg.allowed_vars = vars_named(train.instance(), {"payoff", "t"});
  const auto tree = build(train, cfg);
  const auto tree_ms = mean_stderr(evaluate(tree.policy, test).per_trajectory_reward);
  const auto ls = fit_longstaff_schwartz(train, BasisSpec::parse("pricesko,koind,payoff"));
  const auto ls_ms = mean_stderr(evaluate(ls, test).per_trajectory_reward);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(tree_ms.mean - 51.28) <= 0.3 && std::abs(ls_ms.mean - 49.86) <= 0.3 && tree_ms.mean > ls_ms.mean;
  return {ok, fmt("tree(payoff,t) %.3f (se %.3f, target 51.28 +-0.3), ls %.3f (se %.3f, target 49.86 +-0.3), %.1fs",
                  tree_ms.mean, tree_ms.std_error, ls_ms.mean, ls_ms.std_error, secs)};
}

Outcome cross_validation() {
  const auto t0 = Clock::now();
  const auto train = simulate_maxcall(option(90), StateLayout{}, 20000, 4000);
  const auto test = simulate_maxcall(option(90), StateLayout{}, 100000, 4001);
  BuildConfig cfg;
  cfg.gamma = 0.005;
  cfg.threads = 0;
  const double fixed = evaluate(build(train, cfg).policy, test).mean_reward;
  CvConfig cv;
  cv.k = 5;
  cv.gamma_min = 1e-4;
  const auto t1 = Clock::now();
  const auto fit = fit_with_cv(train, cv, cfg);
  const double cv_secs = seconds_since(t1);
  const double oos = evaluate(fit.fit.policy, test).mean_reward;
  const double secs = seconds_since(t0);
  const bool ok = oos >= fixed - 0.2 && std::abs(oos - 45.43) <= 0.3 && cv_secs < 1200.0;
  return {ok, fmt("cv OOS %.3f (gamma* %.3g%s) vs fixed-gamma OOS %.3f (need >= %.3f; target 45.43 +-0.3), cv %.0fs, "
                  "total %.0fs",
                  oos, fit.selection.gamma, fit.no_signal ? ", no signal" : "", fixed, fixed - 0.2, cv_secs, secs)};
}

Outcome split_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5000);
  std::size_t argmax_checks = 0, argmax_bad = 0, probe_checks = 0, probe_bad = 0;
  std::uniform_real_distribution<double> u(-0.25, 1.25);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t omega = 1 + rng() % 10;
    const int horizon = 1 + static_cast<int>(rng() % 8);
    const std::size_t n = 1 + rng() % 3;
    const auto d = oracle::random_data(rng, omega, horizon, n, rng() % 2 ? 1.0 : 0.9);
    const auto p = oracle::random_tree(rng, n, 3);
    const auto leaves = p.leaves();
    for (NodeId leaf : leaves) {
      for (std::size_t v = 0; v < n; ++v) {
        for (Direction dir : {Direction::Left, Direction::Right}) {
          ++argmax_checks;
          const auto r = optimize_split_point(p, d, leaf, v, dir);
          if (r.objective != oracle::best_split_objective(p, d, leaf, v, dir)) ++argmax_bad;
        }
      }
    }
    const SplitSearch search(p, d);
    for (int probe = 0; probe < 50; ++probe) {
      const NodeId leaf = leaves[rng() % leaves.size()];
      const std::size_t v = rng() % n;
      const Direction dir = rng() % 2 ? Direction::Left : Direction::Right;
      double theta = u(rng);
      if (probe % 2 == 0) {
        // exactly on an observed value, where right-continuity matters
        theta = d.value(rng() % omega, static_cast<int>(rng() % static_cast<std::uint64_t>(horizon)), v);
      }
      ++probe_checks;
      if (search.objective_function(leaf, v, dir)(theta) != oracle::objective(splice(p, leaf, v, theta, dir), d)) {
        ++probe_bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {argmax_bad == 0 && probe_bad == 0,
          fmt("200 instances: %zu/%zu argmax values exact, %zu/%zu probes exact, %.2fs", argmax_checks - argmax_bad,
              argmax_checks, probe_checks - probe_bad, probe_checks, secs)};
}

Outcome build_invariants() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(6000);
  std::size_t bad_monotone = 0, bad_bound = 0, bad_threads = 0, splits = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t omega = 5 + rng() % 60;
    const int horizon = 2 + static_cast<int>(rng() % 10);
    const std::size_t n = 1 + rng() % 4;
    const auto d = oracle::random_data(rng, omega, horizon, n, rng() % 2 ? 1.0 : 0.95);
    BuildConfig cfg;
    cfg.gamma = std::array<double, 3>{0.0, 0.001, 0.01}[rng() % 3];
    cfg.threads = 1;
    const auto a = build(d, cfg);
    cfg.threads = 8;
    const auto b = build(d, cfg);
    const double bound = oracle::clairvoyant(d);
    double prev = 0.0;
    bool mono = true, bounded = true;
    for (const auto& s : a.trace.steps) {
      mono = mono && s.objective > prev;
      bounded = bounded && s.objective <= bound;
      prev = s.objective;
    }
    bool same = a.policy == b.policy && a.objective == b.objective && a.trace.steps.size() == b.trace.steps.size();
    for (std::size_t i = 0; same && i < a.trace.steps.size(); ++i) {
      const auto& x = a.trace.steps[i];
      const auto& y = b.trace.steps[i];
      same = x.leaf == y.leaf && x.var == y.var && x.direction == y.direction && x.threshold == y.threshold &&
             x.objective == y.objective;
    }
    bad_monotone += !mono;
    bad_bound += !bounded;
    bad_threads += !same;
    splits += a.trace.steps.size();
  }
  const double secs = seconds_since(t0);
  return {bad_monotone == 0 && bad_bound == 0 && bad_threads == 0,
          fmt("100 instances, %zu splits: %zu non-increasing traces, %zu above clairvoyant, %zu thread mismatches, "
              "%.2fs",
              splits, bad_monotone, bad_bound, bad_threads, secs)};
}

Outcome worked_examples() {
  const auto t0 = Clock::now();
  const auto two = oracle::toy_two_paths();
  BuildConfig cfg;
  cfg.gamma = 0.0;
  const auto res = build(two, cfg);
  bool ok = res.trace.steps.size() == 2;
  std::string detail = fmt("two-path build: %zu splits", res.trace.steps.size());
  if (ok) {
    const auto& s1 = res.trace.steps[0];
    const auto& s2 = res.trace.steps[1];
    ok = s1.leaf == 0 && s1.var == 0 && s1.direction == Direction::Right && std::abs(s1.threshold - 0.175) < 1e-12 &&
         std::abs(s1.objective - 0.225) < 1e-12 && s2.leaf == 2 && s2.var == 1 && s2.direction == Direction::Right;
    detail += fmt(", step 1 x%zu %s at %g -> Z=%.6g, step 2 on node %zu x%zu %s", s1.var + 1,
                  std::string(to_string(s1.direction)).c_str(), s1.threshold, s1.objective, s2.leaf, s2.var + 1,
                  std::string(to_string(s2.direction)).c_str());
  }
  const auto r = optimize_split_point(TreePolicy::single_leaf(Action::Go), oracle::toy_three_paths(), 0, 0,
                                      Direction::Right);
  ok = ok && r.threshold == 2.75 && r.interval_lower == 2.5 && r.interval_upper == 3.0;
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  detail += fmt("; three-path theta*=%g on [%g, %g); %.3fs", r.threshold, r.interval_lower, r.interval_upper, secs);
  return {ok, detail};
}

Outcome overfitting() {
  const auto t0 = Clock::now();
  constexpr double optimum = 89.0 / 128.0;
  std::vector<double> in_sample;
  std::size_t oos_over = 0;
  const auto fresh = simulate_uniform_1d(3, 1.0, kTimePayoff, 100000, 7999);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto train = simulate_uniform_1d(3, 1.0, kTimePayoff, 100, 7000 + seed);
    BuildConfig cfg;
    cfg.gamma = 1e-6;
    const auto fit = build(train, cfg);
    in_sample.push_back(fit.objective);
    const auto ms = mean_stderr(evaluate(fit.policy, fresh).per_trajectory_reward);
    if (ms.mean > optimum + 3.0 * ms.std_error) ++oos_over;
  }
  const double med_in = median_of(in_sample);

  std::vector<double> gaps;
  for (std::size_t omega : {100u, 1000u, 10000u}) {
    std::vector<double> g;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto train = simulate_uniform_1d(3, 1.0, kTimePayoff, omega, 7100 + seed);
      BuildConfig cfg;
      cfg.gamma = 0.005;
      const auto fit = build(train, cfg);
      g.push_back(std::abs(fit.objective - evaluate(fit.policy, fresh).mean_reward));
    }
    gaps.push_back(median_of(g));
  }
  const bool ok = med_in > optimum && oos_over == 0 && gaps[0] > gaps[1] && gaps[1] > gaps[2];
  return {ok, fmt("median in-sample %.4f (optimum %.4f), %zu/20 OOS above optimum+3SE; median gap %.4f > %.4f > %.4f; "
                  "%.1fs",
                  med_in, optimum, oos_over, gaps[0], gaps[1], gaps[2], seconds_since(t0))};
}

double per_iteration_seconds(std::size_t omega) {
  const auto d = simulate_maxcall(option(90), StateLayout{}, omega, 9000);
  std::vector<double> samples;
  for (int rep = 0; rep < 3; ++rep) {
    BuildConfig cfg;
    cfg.gamma = 0.005;
    cfg.threads = 1;
    const auto t0 = Clock::now();
    const auto fit = build(d, cfg);
    // the final, non-improving iteration also scans every candidate
    samples.push_back(seconds_since(t0) / static_cast<double>(fit.trace.steps.size() + 1));
  }
  return median_of(samples);
}

Outcome scaling() {
  const double a = per_iteration_seconds(10000);
  const double b = per_iteration_seconds(20000);
  const double ratio = b / a;
  return {ratio >= 1.6 && ratio <= 3.0,
          fmt("per-iteration %.1f ms at 10000, %.1f ms at 20000, ratio %.2f (allowed 1.6 to 3.0)", a * 1e3, b * 1e3, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"exact-dp", exact_dp},
      {"uniform-tree", uniform_tree},
      {"uniform-ls", uniform_ls},
      {"maxcall-desk", maxcall_desk},
      {"maxcall-full", maxcall_full},
      {"cross-validation", cross_validation},
      {"split-oracle", split_oracle},
      {"build-invariants", build_invariants},
      {"worked-examples", worked_examples},
      {"overfitting", overfitting},
      {"scaling", scaling},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-17s %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
