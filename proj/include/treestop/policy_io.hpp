#pragma once

#include <filesystem>
#include <string>

#include "treestop/core.hpp"

namespace treestop {

/// A tree policy together with the instance it was fitted on.
struct PolicyFile {
  TreePolicy policy = TreePolicy::single_leaf(Action::Go);
  StoppingInstance instance;
};

inline constexpr int kPolicyFormatVersion = 1;

/// JSON text; infinite thresholds are written as "+inf" / "-inf".
std::string policy_to_json(const PolicyFile& file);
/// Throws DataError on malformed documents and StructuralError on invalid trees.
PolicyFile policy_from_json(const std::string& text);

void write_policy(const std::filesystem::path& path, const PolicyFile& file);
PolicyFile read_policy(const std::filesystem::path& path);

/// Graphviz digraph: splits labelled "name ≤ θ" (4 significant figures), leaves "stop" / "go".
std::string export_dot(const TreePolicy& policy, const std::vector<std::string>& var_names);

}  // namespace treestop
