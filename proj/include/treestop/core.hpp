#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treestop/error.hpp"
#include "treestop/exact_sum.hpp"
#include "treestop/parallel.hpp"

namespace treestop {

enum class Action : std::uint8_t { Go, Stop };

std::string_view to_string(Action a);

/// Problem metadata: horizon, per-period discount and state-variable names.
///
/// Periods are indexed from 0 inside the library (period t is the (t+1)-th
/// decision epoch); file formats use 1-based periods.
struct StoppingInstance {
  int horizon = 1;
  double discount = 1.0;
  std::vector<std::string> var_names;
  std::string reward_kind = "external";

  /// Throws InputError unless horizon >= 1, 0 < discount <= 1 and the names are non-empty and unique.
  void validate() const;
  [[nodiscard]] std::size_t num_vars() const { return var_names.size(); }
  [[nodiscard]] std::optional<std::size_t> var_index(std::string_view name) const;
};

/// Omega trajectories of T states with n variables each, plus the realized
/// rewards g(t, x(omega, t)). Immutable after construction.
class TrajectorySet {
 public:
  /// `states` is laid out [omega][t][var], `rewards` [omega][t].
  TrajectorySet(StoppingInstance instance, std::size_t num_trajectories, std::vector<double> states,
                std::vector<double> rewards);

  [[nodiscard]] const StoppingInstance& instance() const { return instance_; }
  [[nodiscard]] std::size_t num_trajectories() const { return num_trajectories_; }
  [[nodiscard]] int horizon() const { return instance_.horizon; }
  [[nodiscard]] std::size_t num_vars() const { return instance_.num_vars(); }

  [[nodiscard]] std::span<const double> state(std::size_t omega, int t) const {
    return {states_.data() + offset(omega, t) * num_vars(), num_vars()};
  }
  [[nodiscard]] double value(std::size_t omega, int t, std::size_t var) const {
    return states_[offset(omega, t) * num_vars() + var];
  }
  [[nodiscard]] double reward(std::size_t omega, int t) const { return rewards_[offset(omega, t)]; }

  /// beta^t * g(t, x(omega, t)); the contribution of stopping at period t.
  [[nodiscard]] double discounted_reward(std::size_t omega, int t) const { return discounted_[offset(omega, t)]; }

  /// beta^t, built by repeated multiplication so every module sees the same bits.
  [[nodiscard]] double discount_factor(int t) const { return discount_powers_[static_cast<std::size_t>(t)]; }

  [[nodiscard]] const std::vector<double>& states() const { return states_; }
  [[nodiscard]] const std::vector<double>& rewards() const { return rewards_; }

  /// The trajectories listed in `omegas`, in that order.
  [[nodiscard]] TrajectorySet subset(std::span<const std::size_t> omegas) const;

 private:
  [[nodiscard]] std::size_t offset(std::size_t omega, int t) const {
    return omega * static_cast<std::size_t>(instance_.horizon) + static_cast<std::size_t>(t);
  }

  StoppingInstance instance_;
  std::size_t num_trajectories_;
  std::vector<double> states_;
  std::vector<double> rewards_;
  std::vector<double> discounted_;
  std::vector<double> discount_powers_;
};

using NodeId = std::size_t;

enum class NodeKind : std::uint8_t { Leaf, Split };

/// A tree node. Splits route left iff state[var] <= threshold; thresholds may be +-infinity.
struct Node {
  NodeKind kind = NodeKind::Leaf;
  Action action = Action::Go;
  std::size_t var = 0;
  double threshold = 0.0;
  NodeId left = 0;
  NodeId right = 0;

  [[nodiscard]] bool is_leaf() const { return kind == NodeKind::Leaf; }
  static Node leaf(Action a) { return Node{NodeKind::Leaf, a, 0, 0.0, 0, 0}; }
  static Node split(std::size_t var, double threshold, NodeId left, NodeId right) {
    return Node{NodeKind::Split, Action::Go, var, threshold, left, right};
  }
};

/// Binary-tree stopping policy. Node ids are indices into nodes(); growing a
/// leaf appends its two children, so existing ids never move.
class TreePolicy {
 public:
  /// Validates topology (single rooted tree, no orphans, distinct children).
  TreePolicy(std::vector<Node> nodes, NodeId root);

  static TreePolicy single_leaf(Action a);

  [[nodiscard]] NodeId root() const { return root_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool is_leaf(NodeId id) const { return node(id).is_leaf(); }

  /// Leaf ids in ascending order.
  [[nodiscard]] std::vector<NodeId> leaves() const;
  /// Depth of a node (root has depth 0).
  [[nodiscard]] std::size_t depth_of(NodeId id) const;
  /// Depth of the deepest leaf.
  [[nodiscard]] std::size_t depth() const;
  [[nodiscard]] std::size_t num_splits() const;

  /// Leaf reached by `state`. No dimension check; see treestop::route for the checked form.
  [[nodiscard]] NodeId route(std::span<const double> state) const {
    NodeId id = root_;
    while (nodes_[id].kind == NodeKind::Split) {
      const Node& s = nodes_[id];
      id = state[s.var] <= s.threshold ? s.left : s.right;
    }
    return id;
  }

  [[nodiscard]] Action action(int /*t*/, std::span<const double> state, double /*reward*/) const {
    return nodes_[route(state)].action;
  }

  /// Turns `leaf` into a split with two fresh leaf children (appended). Returns (left, right).
  std::pair<NodeId, NodeId> grow(NodeId leaf);
  void set_split(NodeId id, std::size_t var, double threshold);
  void set_action(NodeId id, Action a);

  /// Throws InputError if some split references a variable index >= num_vars.
  void check_vars(std::size_t num_vars) const;

  friend bool operator==(const TreePolicy&, const TreePolicy&);

 private:
  std::vector<Node> nodes_;
  NodeId root_ = 0;
};

bool operator==(const Node& a, const Node& b);

/// Anything that can decide stop/go from the period, the state and the reward on offer.
template <class P>
concept StoppingPolicy = requires(const P& p, int t, std::span<const double> s, double g) {
  { p.action(t, s, g) } -> std::same_as<Action>;
};

/// Leaf reached by `state`; throws InputError on a dimension mismatch.
NodeId route(const TreePolicy& policy, std::span<const double> state, std::size_t num_vars);
Action action(const TreePolicy& policy, std::span<const double> state, std::size_t num_vars);

struct PolicyEvaluation {
  double mean_reward = 0.0;
  std::vector<std::optional<int>> per_trajectory_stop;  ///< 0-based period, empty if never stopped
  std::vector<double> per_trajectory_reward;            ///< discounted reward
};

template <StoppingPolicy P>
std::optional<int> stopping_time(const P& policy, const TrajectorySet& data, std::size_t omega) {
  if (omega >= data.num_trajectories()) throw InputError("trajectory index out of range");
  for (int t = 0; t < data.horizon(); ++t) {
    if (policy.action(t, data.state(omega, t), data.reward(omega, t)) == Action::Stop) return t;
  }
  return std::nullopt;
}

/// Sample-average value of `policy` on `data`. The mean is a correctly rounded
/// sum divided by Omega, so it is independent of `threads`.
template <StoppingPolicy P>
PolicyEvaluation evaluate(const P& policy, const TrajectorySet& data, unsigned threads = 1) {
  const std::size_t omega_count = data.num_trajectories();
  PolicyEvaluation out;
  out.per_trajectory_stop.resize(omega_count);
  out.per_trajectory_reward.assign(omega_count, 0.0);
  parallel_for(omega_count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      const auto tau = stopping_time(policy, data, w);
      out.per_trajectory_stop[w] = tau;
      out.per_trajectory_reward[w] = tau ? data.discounted_reward(w, *tau) : 0.0;
    }
  });
  out.mean_reward = exact_sum(out.per_trajectory_reward) / static_cast<double>(omega_count);
  return out;
}

struct EvaluationSummary {
  double mean_reward = 0.0;
  double std_error = 0.0;
  double stop_rate = 0.0;
  double mean_stop_time = 0.0;  ///< 1-based period, over stopped trajectories; 0 if none stopped
};

EvaluationSummary summarize(const PolicyEvaluation& eval);

/// Perfect-foresight value (1/Omega) sum_omega max_t beta^t g; an upper bound for every policy on `data`.
double clairvoyant_value(const TrajectorySet& data);

/// Sample mean and standard error of a set of values.
struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanStderr mean_stderr(std::span<const double> values);

}  // namespace treestop
