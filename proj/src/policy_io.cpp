#include "treestop/policy_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace treestop {
namespace {

using nlohmann::json;

json threshold_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  return x;
}

double threshold_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw DataError("threshold must be a number, \"+inf\" or \"-inf\"");
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string four_sig(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

std::string policy_to_json(const PolicyFile& file) {
  json doc;
  doc["format_version"] = kPolicyFormatVersion;
  doc["instance"] = {{"horizon", file.instance.horizon},
                     {"discount", file.instance.discount},
                     {"var_names", file.instance.var_names},
                     {"reward_kind", file.instance.reward_kind}};
  doc["root"] = file.policy.root();
  json nodes = json::array();
  for (NodeId id = 0; id < file.policy.size(); ++id) {
    const Node& n = file.policy.node(id);
    json jn;
    jn["id"] = id;
    if (n.is_leaf()) {
      jn["kind"] = "leaf";
      jn["action"] = std::string(to_string(n.action));
    } else {
      jn["kind"] = "split";
      jn["var"] = n.var;
      if (n.var < file.instance.var_names.size()) jn["var_name"] = file.instance.var_names[n.var];
      jn["threshold"] = threshold_to_json(n.threshold);
      jn["left"] = n.left;
      jn["right"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

PolicyFile policy_from_json(const std::string& text) {
  PolicyFile out;
  std::vector<Node> nodes;
  NodeId root = 0;
  try {
    const json doc = json::parse(text);
    if (doc.at("format_version").get<int>() != kPolicyFormatVersion) throw DataError("unsupported policy format version");
    const json& inst = doc.at("instance");
    out.instance.horizon = inst.at("horizon").get<int>();
    out.instance.discount = inst.at("discount").get<double>();
    out.instance.var_names = inst.at("var_names").get<std::vector<std::string>>();
    out.instance.reward_kind = inst.value("reward_kind", std::string("external"));
    root = doc.at("root").get<NodeId>();
    const json& jn = doc.at("nodes");
    nodes.resize(jn.size());
    std::vector<char> seen(jn.size(), 0);
    for (const json& n : jn) {
      const auto id = n.at("id").get<NodeId>();
      if (id >= nodes.size() || seen[id]) throw DataError("node ids must be unique and dense");
      seen[id] = 1;
      const auto kind = n.at("kind").get<std::string>();
      if (kind == "leaf") {
        const auto a = n.at("action").get<std::string>();
        if (a != "stop" && a != "go") throw DataError("leaf action must be \"stop\" or \"go\"");
        nodes[id] = Node::leaf(a == "stop" ? Action::Stop : Action::Go);
      } else if (kind == "split") {
        std::size_t var = 0;
        if (n.contains("var")) {
          var = n.at("var").get<std::size_t>();
        } else {
          const auto idx = out.instance.var_index(n.at("var_name").get<std::string>());
          if (!idx) throw DataError("split references an unknown variable name");
          var = *idx;
        }
        nodes[id] = Node::split(var, threshold_from_json(n.at("threshold")), n.at("left").get<NodeId>(),
                                n.at("right").get<NodeId>());
      } else {
        throw DataError("node kind must be \"split\" or \"leaf\"");
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed policy file: ") + e.what());
  }
  out.instance.validate();
  out.policy = TreePolicy(std::move(nodes), root);
  out.policy.check_vars(out.instance.num_vars());
  return out;
}

void write_policy(const std::filesystem::path& path, const PolicyFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << policy_to_json(file);
}

PolicyFile read_policy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return policy_from_json(ss.str());
}

std::string export_dot(const TreePolicy& policy, const std::vector<std::string>& var_names) {
  policy.check_vars(var_names.size());
  std::ostringstream os;
  os << "digraph policy {\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  std::vector<NodeId> stack{policy.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = policy.node(id);
    if (n.is_leaf()) {
      os << "  n" << id << " [label=\"" << to_string(n.action) << "\", shape=ellipse"
         << (n.action == Action::Stop ? ", style=filled, fillcolor=\"#f4cccc\"" : "") << "];\n";
      continue;
    }
    os << "  n" << id << " [label=\"" << dot_escape(var_names[n.var]) << " ≤ " << four_sig(n.threshold)
       << "\", shape=box];\n";
    os << "  n" << id << " -> n" << n.left << " [label=\"yes\"];\n";
    os << "  n" << id << " -> n" << n.right << " [label=\"no\"];\n";
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  os << "}\n";
  return os.str();
}

}  // namespace treestop
