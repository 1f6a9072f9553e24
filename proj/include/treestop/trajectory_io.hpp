#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "treestop/core.hpp"

namespace treestop {

/// Sidecar metadata path: the CSV path with its extension replaced by ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

std::string instance_to_json(const StoppingInstance& instance);
StoppingInstance instance_from_json(const std::string& text);

/// Header omega,t,<vars>,reward; omega and t 1-based; shortest round-trip floats.
void write_trajectory_csv(std::ostream& os, const TrajectorySet& data);
/// Rows must be sorted by (omega, t) and complete. Throws DataError on malformed content.
TrajectorySet read_trajectory_csv(std::istream& is, const StoppingInstance& instance);

/// Writes the CSV and its sidecar.
void write_trajectories(const std::filesystem::path& csv, const TrajectorySet& data);
/// Reads the CSV and its sidecar. Throws InputError if either file is missing.
TrajectorySet read_trajectories(const std::filesystem::path& csv);

}  // namespace treestop
