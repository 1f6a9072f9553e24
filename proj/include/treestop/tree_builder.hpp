#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "treestop/core.hpp"
#include "treestop/split_optimizer.hpp"

namespace treestop {

struct BuildConfig {
  double gamma = 0.005;                  ///< relative-improvement tolerance
  std::vector<std::size_t> allowed_vars;  ///< empty means every variable
  std::optional<std::size_t> max_depth;   ///< leaves at this depth are not split
  std::size_t max_iterations = 10000;
  unsigned threads = 1;  ///< 0 = all cores

  void validate(std::size_t num_vars) const;
};

/// One applied growth step.
struct BuildStep {
  std::size_t iteration = 0;  ///< 1-based
  NodeId leaf = 0;
  std::size_t var = 0;
  Direction direction = Direction::Left;
  double threshold = 0.0;
  double objective = 0.0;        ///< training objective after the split
  double rel_improvement = 0.0;  ///< objective / previous - 1, +inf from a zero objective
};

struct BuildTrace {
  std::vector<BuildStep> steps;
  /// True when the loop ended on a strict improvement below tolerance (that split is kept).
  bool final_step_below_tolerance = false;

  void write_csv(std::ostream& os, const std::vector<std::string>& var_names) const;
};

struct BuildResult {
  TreePolicy policy = TreePolicy::single_leaf(Action::Go);
  double objective = 0.0;
  BuildTrace trace;
};

/// Best split over every (leaf, var, direction) of the current tree.
struct Candidate {
  NodeId leaf = 0;
  std::size_t var = 0;
  Direction direction = Direction::Left;
  SplitResult result;
};

/// Turns `leaf` into a split with two fresh leaves. Returns (left, right).
std::pair<NodeId, NodeId> grow_tree(TreePolicy& policy, NodeId leaf);

/// Evaluates every eligible candidate and returns the first maximum in
/// (leaf, var, left-before-right) order; empty when no leaf is eligible.
std::optional<Candidate> best_split(const TreePolicy& policy, const TrajectorySet& data, const BuildConfig& config);

/// Called after every applied split with the grown tree and the step record.
using StepObserver = std::function<void(const TreePolicy&, const BuildStep&)>;

/// Greedy top-down construction from a single go leaf.
BuildResult build(const TrajectorySet& data, const BuildConfig& config, const StepObserver& observer = {});

}  // namespace treestop
