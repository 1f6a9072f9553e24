#include "treestop/tree_builder.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "treestop/csv_format.hpp"

namespace treestop {
namespace {

std::vector<std::size_t> node_depths(const TreePolicy& policy) {
  std::vector<std::size_t> depth(policy.size(), 0);
  std::vector<NodeId> stack{policy.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = policy.node(id);
    if (n.is_leaf()) continue;
    depth[n.left] = depth[id] + 1;
    depth[n.right] = depth[id] + 1;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return depth;
}

}  // namespace

void BuildConfig::validate(std::size_t num_vars) const {
  if (!(gamma >= 0.0)) throw InputError("gamma must be >= 0");
  for (std::size_t v : allowed_vars) {
    if (v >= num_vars) throw InputError("allowed variable index out of range");
  }
  if (max_iterations == 0) throw InputError("max_iterations must be >= 1");
}

void BuildTrace::write_csv(std::ostream& os, const std::vector<std::string>& var_names) const {
  os << "iteration,leaf,var,direction,theta,objective,rel_improvement\n";
  for (const BuildStep& s : steps) {
    os << s.iteration << ',' << s.leaf << ',' << (s.var < var_names.size() ? var_names[s.var] : std::to_string(s.var))
       << ',' << to_string(s.direction) << ',' << format_double(s.threshold) << ',' << format_double(s.objective) << ','
       << format_double(s.rel_improvement) << '\n';
  }
}

std::pair<NodeId, NodeId> grow_tree(TreePolicy& policy, NodeId leaf) { return policy.grow(leaf); }

std::optional<Candidate> best_split(const TreePolicy& policy, const TrajectorySet& data, const BuildConfig& config) {
  std::vector<std::size_t> vars = config.allowed_vars;
  if (vars.empty()) {
    for (std::size_t v = 0; v < data.num_vars(); ++v) vars.push_back(v);
  }
  const auto depth = node_depths(policy);
  std::vector<Candidate> candidates;
  for (NodeId leaf : policy.leaves()) {
    if (config.max_depth && depth[leaf] >= *config.max_depth) continue;
    for (std::size_t v : vars) {
      candidates.push_back({leaf, v, Direction::Left, {}});
      candidates.push_back({leaf, v, Direction::Right, {}});
    }
  }
  if (candidates.empty()) return std::nullopt;

  const SplitSearch search(policy, data);
  parallel_for(candidates.size(), config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Candidate& c = candidates[i];
      c.result = search.optimize(c.leaf, c.var, c.direction);
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].result.objective > candidates[best].result.objective) best = i;
  }
  return candidates[best];
}

BuildResult build(const TrajectorySet& data, const BuildConfig& config, const StepObserver& observer) {
  config.validate(data.num_vars());
  BuildResult out;
  double z = 0.0;
  for (std::size_t iteration = 1;; ++iteration) {
    const auto cand = best_split(out.policy, data, config);
    if (!cand) break;
    const double best = cand->result.objective;
    // Requiring a strict gain keeps gamma = 0 from looping on a plateau.
    const bool exists_improvement = best > z && best >= (1.0 + config.gamma) * z;
    if (best > z) {
      if (iteration > config.max_iterations) throw DataError("tree growth exceeded max_iterations");
      out.policy = splice(out.policy, cand->leaf, cand->var, cand->result.threshold, cand->direction);
      BuildStep step;
      step.iteration = iteration;
      step.leaf = cand->leaf;
      step.var = cand->var;
      step.direction = cand->direction;
      step.threshold = cand->result.threshold;
      step.objective = best;
      step.rel_improvement = z > 0.0 ? best / z - 1.0 : std::numeric_limits<double>::infinity();
      out.trace.steps.push_back(step);
      if (observer) observer(out.policy, step);
      z = best;
      if (!exists_improvement) out.trace.final_step_below_tolerance = true;
    }
    if (!exists_improvement) break;
  }
  out.objective = z;
  return out;
}

}  // namespace treestop
