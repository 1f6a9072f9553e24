#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "treestop/core.hpp"

namespace treestop {

/// Which child of a new split receives the stop action.
enum class Direction : std::uint8_t { Left, Right };

std::string_view to_string(Direction d);

/// Per-trajectory quantities for one candidate (leaf, variable, direction).
struct LeafContext {
  std::optional<int> no_stop_time;  ///< first period stopped at a leaf other than the candidate
  double no_stop_value = 0.0;       ///< discounted reward at no_stop_time, 0 if absent
  std::vector<int> in_leaf_periods;
  std::vector<int> permissible_stop_periods;
};

/// Right-continuous piecewise-constant function of a split point.
///
/// values[0] holds on (-inf, breakpoints[0]), values[i] on
/// [breakpoints[i-1], breakpoints[i]) and values.back() on [breakpoints.back(), +inf).
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;

  [[nodiscard]] double operator()(double theta) const;
};

struct SplitResult {
  double objective = 0.0;  ///< max of the averaged reward function
  double threshold = 0.0;  ///< chosen split point, possibly +-infinity
  /// Interior of the maximizing interval, (lower, upper); either end may be infinite.
  double interval_lower = 0.0;
  double interval_upper = 0.0;
};

LeafContext leaf_context(const TreePolicy& policy, const TrajectorySet& data, std::size_t omega, NodeId leaf,
                         std::size_t var, Direction dir);

/// F_omega: the discounted reward trajectory `omega` collects as a function of the split point.
StepFunction trajectory_step_function(const LeafContext& ctx, const TrajectorySet& data, std::size_t omega,
                                      std::size_t var, Direction dir);

/// The tree obtained by splitting `leaf` on `var` at `threshold`, with the stop
/// action on the child named by `dir` and go on the other.
TreePolicy splice(const TreePolicy& policy, NodeId leaf, std::size_t var, double threshold, Direction dir);

/// Exact split-point search over a fixed tree and data set.
///
/// The constructor routes every (omega, t) once and indexes the in-leaf
/// periods of every leaf, so each optimize() call only touches the periods
/// of its own leaf. Instances are immutable and safe to query from several
/// threads at once.
class SplitSearch {
 public:
  SplitSearch(const TreePolicy& policy, const TrajectorySet& data);

  /// Averaged reward F(theta) for splitting `leaf` on `var` in direction `dir`.
  [[nodiscard]] StepFunction objective_function(NodeId leaf, std::size_t var, Direction dir) const;
  [[nodiscard]] SplitResult optimize(NodeId leaf, std::size_t var, Direction dir) const;

  /// SAA objective of the unmodified tree.
  [[nodiscard]] double current_objective() const { return current_objective_; }
  /// Number of (omega, t) cells that sit in `leaf` before the trajectory is stopped elsewhere.
  [[nodiscard]] std::size_t in_leaf_cells(NodeId leaf) const;

 private:
  struct Cell {
    std::size_t omega;
    int t;
  };
  struct LeafIndex {
    ExactSum no_stop_total;  ///< sum over omega of the no-stop value for this leaf
    std::vector<Cell> cells;  ///< in-leaf periods, grouped by omega, t ascending
  };

  [[nodiscard]] const LeafIndex& index_for(NodeId leaf) const;
  [[nodiscard]] double no_stop_value(std::size_t omega, NodeId leaf) const;

  const TreePolicy* policy_;
  const TrajectorySet* data_;
  std::vector<std::optional<int>> first_stop_;         ///< first stop period of the current tree
  std::vector<NodeId> first_stop_leaf_;                ///< leaf responsible for first_stop_
  std::vector<std::optional<int>> second_stop_;        ///< first stop at a leaf other than first_stop_leaf_
  std::vector<std::optional<LeafIndex>> leaf_index_;   ///< indexed by node id, engaged for leaves
  double current_objective_ = 0.0;
};

/// One-shot form of SplitSearch::optimize. A leaf no trajectory visits yields
/// the current objective with threshold +inf.
SplitResult optimize_split_point(const TreePolicy& policy, const TrajectorySet& data, NodeId leaf,
                                 std::size_t var, Direction dir);

/// Argmax of a step function: leftmost maximizing run of pieces, midpoint
/// threshold when bounded, -inf/+inf when unbounded below/above, and +inf when
/// the function is constant.
SplitResult argmax_split(const StepFunction& f);

}  // namespace treestop
