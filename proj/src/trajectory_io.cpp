#include "treestop/trajectory_io.hpp"

#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "treestop/csv_format.hpp"

namespace treestop {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t parse_index(std::string_view field, std::size_t line_no) {
  std::size_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad integer '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".json");
  if (p == csv) p += ".json";
  return p;
}

std::string instance_to_json(const StoppingInstance& instance) {
  json j;
  j["horizon"] = instance.horizon;
  j["discount"] = instance.discount;
  j["var_names"] = instance.var_names;
  j["reward_kind"] = instance.reward_kind;
  return j.dump(2) + "\n";
}

StoppingInstance instance_from_json(const std::string& text) {
  StoppingInstance inst;
  try {
    const json j = json::parse(text);
    inst.horizon = j.at("horizon").get<int>();
    inst.discount = j.at("discount").get<double>();
    inst.var_names = j.at("var_names").get<std::vector<std::string>>();
    inst.reward_kind = j.value("reward_kind", std::string("external"));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed instance metadata: ") + e.what());
  }
  inst.validate();
  return inst;
}

void write_trajectory_csv(std::ostream& os, const TrajectorySet& data) {
  os << "omega,t";
  for (const auto& name : data.instance().var_names) os << ',' << name;
  os << ",reward\n";
  std::string line;
  for (std::size_t w = 0; w < data.num_trajectories(); ++w) {
    for (int t = 0; t < data.horizon(); ++t) {
      line = std::to_string(w + 1);
      line += ',';
      line += std::to_string(t + 1);
      for (double x : data.state(w, t)) {
        line += ',';
        line += format_double(x);
      }
      line += ',';
      line += format_double(data.reward(w, t));
      line += '\n';
      os << line;
    }
  }
}

TrajectorySet read_trajectory_csv(std::istream& is, const StoppingInstance& instance) {
  instance.validate();
  std::string line;
  if (!std::getline(is, line)) throw DataError("trajectory file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected = "omega,t";
  for (const auto& name : instance.var_names) expected += "," + name;
  expected += ",reward";
  if (line != expected) throw DataError("trajectory header '" + line + "' does not match metadata '" + expected + "'");

  const std::size_t n = instance.num_vars();
  const auto horizon = static_cast<std::size_t>(instance.horizon);
  std::vector<double> states;
  std::vector<double> rewards;
  std::size_t line_no = 1;
  std::size_t row = 0;
  std::vector<std::string_view> fields;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != n + 3) throw DataError("line " + std::to_string(line_no) + ": wrong number of fields");
    const std::size_t omega = parse_index(fields[0], line_no);
    const std::size_t t = parse_index(fields[1], line_no);
    if (omega != row / horizon + 1 || t != row % horizon + 1) {
      throw DataError("line " + std::to_string(line_no) + ": rows must be sorted by (omega, t) without gaps");
    }
    try {
      for (std::size_t i = 0; i < n; ++i) states.push_back(parse_double(fields[2 + i]));
      rewards.push_back(parse_double(fields[n + 2]));
    } catch (const InputError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    ++row;
  }
  if (row == 0 || row % horizon != 0) throw DataError("trajectory file ends in the middle of a trajectory");
  return TrajectorySet(instance, row / horizon, std::move(states), std::move(rewards));
}

void write_trajectories(const std::filesystem::path& csv, const TrajectorySet& data) {
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw InputError("cannot write " + csv.string());
    write_trajectory_csv(out, data);
  }
  std::ofstream meta(sidecar_path(csv), std::ios::binary);
  if (!meta) throw InputError("cannot write " + sidecar_path(csv).string());
  meta << instance_to_json(data.instance());
}

TrajectorySet read_trajectories(const std::filesystem::path& csv) {
  const StoppingInstance instance = instance_from_json(read_file(sidecar_path(csv)));
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw InputError("cannot open " + csv.string());
  return read_trajectory_csv(in, instance);
}

}  // namespace treestop
