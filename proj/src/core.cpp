#include "treestop/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace treestop {

std::string_view to_string(Action a) { return a == Action::Stop ? "stop" : "go"; }

void StoppingInstance::validate() const {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw InputError("discount must lie in (0, 1]");
  if (var_names.empty()) throw InputError("at least one state variable is required");
  std::unordered_set<std::string> seen;
  for (const auto& name : var_names) {
    if (name.empty()) throw InputError("state variable names must be non-empty");
    if (!seen.insert(name).second) throw InputError("duplicate state variable name: " + name);
  }
}

std::optional<std::size_t> StoppingInstance::var_index(std::string_view name) const {
  const auto it = std::find(var_names.begin(), var_names.end(), name);
  if (it == var_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - var_names.begin());
}

TrajectorySet::TrajectorySet(StoppingInstance instance, std::size_t num_trajectories, std::vector<double> states,
                             std::vector<double> rewards)
    : instance_(std::move(instance)),
      num_trajectories_(num_trajectories),
      states_(std::move(states)),
      rewards_(std::move(rewards)) {
  instance_.validate();
  if (num_trajectories_ == 0) throw InputError("a trajectory set needs at least one trajectory");
  const std::size_t cells = num_trajectories_ * static_cast<std::size_t>(instance_.horizon);
  if (rewards_.size() != cells) throw InputError("reward tensor does not match (omega, T) extents");
  if (states_.size() != cells * instance_.num_vars()) throw InputError("state tensor does not match (omega, T, n) extents");
  for (double g : rewards_) {
    if (!std::isfinite(g) || g < 0.0) throw DataError("rewards must be finite and non-negative");
  }
  for (double x : states_) {
    if (std::isnan(x)) throw DataError("state values must not be NaN");
  }
  discount_powers_.resize(static_cast<std::size_t>(instance_.horizon));
  double p = 1.0;
  for (auto& d : discount_powers_) {
    d = p;
    p *= instance_.discount;
  }
  discounted_.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    discounted_[c] = discount_powers_[c % static_cast<std::size_t>(instance_.horizon)] * rewards_[c];
  }
}

TrajectorySet TrajectorySet::subset(std::span<const std::size_t> omegas) const {
  const std::size_t horizon = static_cast<std::size_t>(instance_.horizon);
  const std::size_t n = num_vars();
  std::vector<double> states;
  std::vector<double> rewards;
  states.reserve(omegas.size() * horizon * n);
  rewards.reserve(omegas.size() * horizon);
  for (std::size_t w : omegas) {
    if (w >= num_trajectories_) throw InputError("subset index out of range");
    const auto s0 = states_.begin() + static_cast<std::ptrdiff_t>(w * horizon * n);
    states.insert(states.end(), s0, s0 + static_cast<std::ptrdiff_t>(horizon * n));
    const auto r0 = rewards_.begin() + static_cast<std::ptrdiff_t>(w * horizon);
    rewards.insert(rewards.end(), r0, r0 + static_cast<std::ptrdiff_t>(horizon));
  }
  return TrajectorySet(instance_, omegas.size(), std::move(states), std::move(rewards));
}

// ---------------------------------------------------------------------------

TreePolicy::TreePolicy(std::vector<Node> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {
  if (nodes_.empty()) throw StructuralError("a tree needs at least one node");
  if (root_ >= nodes_.size()) throw StructuralError("root id out of range");
  std::vector<int> parents(nodes_.size(), 0);
  for (const Node& nd : nodes_) {
    if (nd.is_leaf()) continue;
    if (nd.left >= nodes_.size() || nd.right >= nodes_.size()) throw StructuralError("child id out of range");
    if (nd.left == nd.right) throw StructuralError("split children must be distinct");
    if (std::isnan(nd.threshold)) throw StructuralError("split threshold must not be NaN");
    ++parents[nd.left];
    ++parents[nd.right];
  }
  if (parents[root_] != 0) throw StructuralError("root must not have a parent");
  // Every node reachable from the root exactly once: no orphans, no shared children, no cycles.
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{root_};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]) throw StructuralError("node reachable along two paths");
    seen[id] = 1;
    ++visited;
    if (!nodes_[id].is_leaf()) {
      stack.push_back(nodes_[id].right);
      stack.push_back(nodes_[id].left);
    }
  }
  if (visited != nodes_.size()) throw StructuralError("tree contains unreachable nodes");
}

TreePolicy TreePolicy::single_leaf(Action a) { return TreePolicy({Node::leaf(a)}, 0); }

std::vector<NodeId> TreePolicy::leaves() const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].is_leaf()) out.push_back(id);
  }
  return out;
}

std::size_t TreePolicy::depth_of(NodeId target) const {
  if (target >= nodes_.size()) throw StructuralError("node id out of range");
  std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    if (id == target) return d;
    if (!nodes_[id].is_leaf()) {
      stack.emplace_back(nodes_[id].left, d + 1);
      stack.emplace_back(nodes_[id].right, d + 1);
    }
  }
  throw StructuralError("node not reachable from root");
}

std::size_t TreePolicy::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<NodeId, std::size_t>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[id].is_leaf()) {
      stack.emplace_back(nodes_[id].left, d + 1);
      stack.emplace_back(nodes_[id].right, d + 1);
    }
  }
  return best;
}

std::size_t TreePolicy::num_splits() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return !n.is_leaf(); }));
}

std::pair<NodeId, NodeId> TreePolicy::grow(NodeId leaf) {
  if (leaf >= nodes_.size() || !nodes_[leaf].is_leaf()) throw StructuralError("grow: node is not a leaf");
  const NodeId left = nodes_.size();
  const NodeId right = left + 1;
  nodes_.push_back(Node::leaf(Action::Go));
  nodes_.push_back(Node::leaf(Action::Go));
  Node& n = nodes_[leaf];
  n.kind = NodeKind::Split;
  n.action = Action::Go;
  n.left = left;
  n.right = right;
  // Until set_split is called the split sends everything left.
  n.var = 0;
  n.threshold = std::numeric_limits<double>::infinity();
  return {left, right};
}

void TreePolicy::set_split(NodeId id, std::size_t var, double threshold) {
  if (id >= nodes_.size() || nodes_[id].is_leaf()) throw StructuralError("set_split: node is not a split");
  if (std::isnan(threshold)) throw StructuralError("split threshold must not be NaN");
  nodes_[id].var = var;
  nodes_[id].threshold = threshold;
}

void TreePolicy::set_action(NodeId id, Action a) {
  if (id >= nodes_.size() || !nodes_[id].is_leaf()) throw StructuralError("set_action: node is not a leaf");
  nodes_[id].action = a;
}

void TreePolicy::check_vars(std::size_t num_vars) const {
  for (const Node& n : nodes_) {
    if (!n.is_leaf() && n.var >= num_vars) throw InputError("split variable index out of range");
  }
}

bool operator==(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  if (a.is_leaf()) return a.action == b.action;
  return a.var == b.var && a.threshold == b.threshold && a.left == b.left && a.right == b.right;
}

bool operator==(const TreePolicy& a, const TreePolicy& b) { return a.root_ == b.root_ && a.nodes_ == b.nodes_; }

NodeId route(const TreePolicy& policy, std::span<const double> state, std::size_t num_vars) {
  if (state.size() != num_vars) throw InputError("state dimension does not match the instance");
  policy.check_vars(num_vars);
  return policy.route(state);
}

Action action(const TreePolicy& policy, std::span<const double> state, std::size_t num_vars) {
  return policy.node(route(policy, state, num_vars)).action;
}

EvaluationSummary summarize(const PolicyEvaluation& eval) {
  EvaluationSummary s;
  const auto ms = mean_stderr(eval.per_trajectory_reward);
  s.mean_reward = eval.mean_reward;
  s.std_error = ms.std_error;
  std::size_t stopped = 0;
  double total_time = 0.0;
  for (const auto& tau : eval.per_trajectory_stop) {
    if (tau) {
      ++stopped;
      total_time += static_cast<double>(*tau + 1);
    }
  }
  const auto count = eval.per_trajectory_stop.size();
  s.stop_rate = count == 0 ? 0.0 : static_cast<double>(stopped) / static_cast<double>(count);
  s.mean_stop_time = stopped == 0 ? 0.0 : total_time / static_cast<double>(stopped);
  return s;
}

double clairvoyant_value(const TrajectorySet& data) {
  ExactSum acc;
  for (std::size_t w = 0; w < data.num_trajectories(); ++w) {
    double best = 0.0;
    for (int t = 0; t < data.horizon(); ++t) best = std::max(best, data.discounted_reward(w, t));
    acc.add(best);
  }
  return acc.value() / static_cast<double>(data.num_trajectories());
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = exact_sum(values) / n;
  if (values.size() < 2) return out;
  ExactSum sq;
  for (double v : values) sq.add((v - out.mean) * (v - out.mean));
  out.std_error = std::sqrt(sq.value() / (n - 1.0) / n);
  return out;
}

}  // namespace treestop
