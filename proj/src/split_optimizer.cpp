#include "treestop/split_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace treestop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Event {
  double breakpoint;
  double old_value;
  double new_value;
};

// Strict running max (right-stop) or min (left-stop) filter over in-leaf periods.
template <class Periods, class Value>
void permissible_filter(const Periods& periods, Direction dir, Value&& value_at, std::vector<int>& out) {
  double extreme = dir == Direction::Right ? -kInf : kInf;
  for (int t : periods) {
    const double x = value_at(t);
    if (dir == Direction::Right ? x > extreme : x < extreme) {
      out.push_back(t);
      extreme = x;
    }
  }
}

void check_leaf(const TreePolicy& policy, const TrajectorySet& data, NodeId leaf, std::size_t var) {
  if (leaf >= policy.size() || !policy.is_leaf(leaf)) throw StructuralError("candidate node is not a leaf");
  if (var >= data.num_vars()) throw InputError("split variable index out of range");
  policy.check_vars(data.num_vars());
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Left ? "left" : "right"; }

double StepFunction::operator()(double theta) const {
  const auto idx = std::upper_bound(breakpoints.begin(), breakpoints.end(), theta) - breakpoints.begin();
  return values[static_cast<std::size_t>(idx)];
}

LeafContext leaf_context(const TreePolicy& policy, const TrajectorySet& data, std::size_t omega, NodeId leaf,
                         std::size_t var, Direction dir) {
  check_leaf(policy, data, leaf, var);
  if (omega >= data.num_trajectories()) throw InputError("trajectory index out of range");
  LeafContext ctx;
  std::vector<NodeId> leaf_at(static_cast<std::size_t>(data.horizon()));
  for (int t = 0; t < data.horizon(); ++t) {
    const NodeId at = policy.route(data.state(omega, t));
    leaf_at[static_cast<std::size_t>(t)] = at;
    if (!ctx.no_stop_time && at != leaf && policy.node(at).action == Action::Stop) ctx.no_stop_time = t;
  }
  ctx.no_stop_value = ctx.no_stop_time ? data.discounted_reward(omega, *ctx.no_stop_time) : 0.0;
  const int end = ctx.no_stop_time.value_or(data.horizon());
  for (int t = 0; t < end; ++t) {
    if (leaf_at[static_cast<std::size_t>(t)] == leaf) ctx.in_leaf_periods.push_back(t);
  }
  permissible_filter(ctx.in_leaf_periods, dir, [&](int t) { return data.value(omega, t, var); },
                     ctx.permissible_stop_periods);
  return ctx;
}

StepFunction trajectory_step_function(const LeafContext& ctx, const TrajectorySet& data, std::size_t omega,
                                      std::size_t var, Direction dir) {
  StepFunction f;
  const auto& periods = ctx.permissible_stop_periods;
  for (int t : periods) f.breakpoints.push_back(data.value(omega, t, var));
  for (int t : periods) f.values.push_back(data.discounted_reward(omega, t));
  if (dir == Direction::Right) {
    // Stops at the first period whose value exceeds theta.
    f.values.push_back(ctx.no_stop_value);
  } else {
    // Stops at the first period whose value is <= theta; breakpoints arrive in decreasing order.
    std::reverse(f.breakpoints.begin(), f.breakpoints.end());
    std::reverse(f.values.begin(), f.values.end());
    f.values.insert(f.values.begin(), ctx.no_stop_value);
  }
  return f;
}

TreePolicy splice(const TreePolicy& policy, NodeId leaf, std::size_t var, double threshold, Direction dir) {
  TreePolicy out = policy;
  const auto [left, right] = out.grow(leaf);
  out.set_split(leaf, var, threshold);
  out.set_action(left, dir == Direction::Left ? Action::Stop : Action::Go);
  out.set_action(right, dir == Direction::Left ? Action::Go : Action::Stop);
  return out;
}

SplitResult argmax_split(const StepFunction& f) {
  if (f.values.size() != f.breakpoints.size() + 1) throw StructuralError("malformed step function");
  const auto best = std::max_element(f.values.begin(), f.values.end());  // first maximum
  const std::size_t first = static_cast<std::size_t>(best - f.values.begin());
  std::size_t last = first;
  while (last + 1 < f.values.size() && f.values[last + 1] == *best) ++last;

  SplitResult r;
  r.objective = *best;
  r.interval_lower = first == 0 ? -kInf : f.breakpoints[first - 1];
  r.interval_upper = last == f.breakpoints.size() ? kInf : f.breakpoints[last];
  const bool open_below = std::isinf(r.interval_lower);
  const bool open_above = std::isinf(r.interval_upper);
  if (open_below && open_above) {
    r.threshold = kInf;
  } else if (open_below) {
    r.threshold = -kInf;
  } else if (open_above) {
    r.threshold = kInf;
  } else {
    // The maximizing run is [lower, upper); the rounded midpoint of two
    // adjacent doubles can land on upper, in which case lower is used.
    double mid = std::midpoint(r.interval_lower, r.interval_upper);
    if (mid >= r.interval_upper) mid = r.interval_lower;
    r.threshold = mid;
  }
  return r;
}

// ---------------------------------------------------------------------------

SplitSearch::SplitSearch(const TreePolicy& policy, const TrajectorySet& data) : policy_(&policy), data_(&data) {
  policy.check_vars(data.num_vars());
  const std::size_t omega_count = data.num_trajectories();
  const int horizon = data.horizon();
  first_stop_.resize(omega_count);
  first_stop_leaf_.assign(omega_count, 0);
  second_stop_.resize(omega_count);
  leaf_index_.resize(policy.size());
  for (NodeId id : policy.leaves()) leaf_index_[id].emplace();

  ExactSum first_total;
  std::vector<NodeId> leaf_at(static_cast<std::size_t>(horizon));
  for (std::size_t w = 0; w < omega_count; ++w) {
    for (int t = 0; t < horizon; ++t) {
      const NodeId at = policy.route(data.state(w, t));
      leaf_at[static_cast<std::size_t>(t)] = at;
      if (policy.node(at).action != Action::Stop) continue;
      if (!first_stop_[w]) {
        first_stop_[w] = t;
        first_stop_leaf_[w] = at;
      } else if (!second_stop_[w] && at != first_stop_leaf_[w]) {
        second_stop_[w] = t;
      }
    }
    if (first_stop_[w]) first_total.add(data.discounted_reward(w, *first_stop_[w]));
    // In-leaf periods: before the first stop, or before the second stop for the leaf that stops first.
    const int first_end = first_stop_[w].value_or(horizon);
    const int second_end = second_stop_[w].value_or(horizon);
    for (int t = 0; t < horizon; ++t) {
      const NodeId at = leaf_at[static_cast<std::size_t>(t)];
      const bool own = first_stop_[w] && at == first_stop_leaf_[w];
      if (t < (own ? second_end : first_end)) leaf_index_[at]->cells.push_back({w, t});
    }
  }

  current_objective_ = first_total.value() / static_cast<double>(omega_count);
  for (NodeId id : policy.leaves()) leaf_index_[id]->no_stop_total = first_total;
  for (std::size_t w = 0; w < omega_count; ++w) {
    if (!first_stop_[w]) continue;
    auto& acc = leaf_index_[first_stop_leaf_[w]]->no_stop_total;
    acc.subtract(data.discounted_reward(w, *first_stop_[w]));
    if (second_stop_[w]) acc.add(data.discounted_reward(w, *second_stop_[w]));
  }
}

const SplitSearch::LeafIndex& SplitSearch::index_for(NodeId leaf) const {
  if (leaf >= leaf_index_.size() || !leaf_index_[leaf]) throw StructuralError("candidate node is not a leaf");
  return *leaf_index_[leaf];
}

std::size_t SplitSearch::in_leaf_cells(NodeId leaf) const { return index_for(leaf).cells.size(); }

double SplitSearch::no_stop_value(std::size_t omega, NodeId leaf) const {
  const auto& first = first_stop_[omega];
  if (!first) return 0.0;
  if (first_stop_leaf_[omega] != leaf) return data_->discounted_reward(omega, *first);
  const auto& second = second_stop_[omega];
  return second ? data_->discounted_reward(omega, *second) : 0.0;
}

StepFunction SplitSearch::objective_function(NodeId leaf, std::size_t var, Direction dir) const {
  const LeafIndex& index = index_for(leaf);
  if (var >= data_->num_vars()) throw InputError("split variable index out of range");
  const TrajectorySet& data = *data_;

  ExactSum acc = index.no_stop_total;
  std::vector<Event> events;
  events.reserve(index.cells.size());
  std::vector<int> periods;
  std::vector<int> permissible;

  const auto& cells = index.cells;
  for (std::size_t i = 0; i < cells.size();) {
    const std::size_t w = cells[i].omega;
    periods.clear();
    for (; i < cells.size() && cells[i].omega == w; ++i) periods.push_back(cells[i].t);
    permissible.clear();
    permissible_filter(periods, dir, [&](int t) { return data.value(w, t, var); }, permissible);

    const double f_ns = no_stop_value(w, leaf);
    const std::size_t m = permissible.size();
    if (dir == Direction::Right) {
      // theta below every breakpoint stops at the first permissible period.
      acc.subtract(f_ns);
      acc.add(data.discounted_reward(w, permissible[0]));
      for (std::size_t k = 0; k < m; ++k) {
        const double next = k + 1 < m ? data.discounted_reward(w, permissible[k + 1]) : f_ns;
        events.push_back({data.value(w, permissible[k], var), data.discounted_reward(w, permissible[k]), next});
      }
    } else {
      for (std::size_t k = 0; k < m; ++k) {
        const double prev = k + 1 < m ? data.discounted_reward(w, permissible[k + 1]) : f_ns;
        events.push_back({data.value(w, permissible[k], var), prev, data.discounted_reward(w, permissible[k])});
      }
    }
  }

  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.breakpoint < b.breakpoint; });

  const double omega_count = static_cast<double>(data.num_trajectories());
  StepFunction f;
  f.values.push_back(acc.value() / omega_count);
  for (std::size_t i = 0; i < events.size();) {
    const double b = events[i].breakpoint;
    for (; i < events.size() && events[i].breakpoint == b; ++i) {
      if (events[i].old_value == events[i].new_value) continue;
      acc.subtract(events[i].old_value);
      acc.add(events[i].new_value);
    }
    f.breakpoints.push_back(b);
    f.values.push_back(acc.value() / omega_count);
  }
  return f;
}

SplitResult SplitSearch::optimize(NodeId leaf, std::size_t var, Direction dir) const {
  return argmax_split(objective_function(leaf, var, dir));
}

SplitResult optimize_split_point(const TreePolicy& policy, const TrajectorySet& data, NodeId leaf, std::size_t var,
                                 Direction dir) {
  check_leaf(policy, data, leaf, var);
  return SplitSearch(policy, data).optimize(leaf, var, dir);
}

}  // namespace treestop
