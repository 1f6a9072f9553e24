#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace treestop {

struct BenchmarkRow {
  std::string instance;
  std::string method;
  std::string variables;  ///< state variables (tree) or basis (regression)
  double mean = 0.0;
  double std_error = 0.0;
  double seconds = 0.0;  ///< mean fitting time per replication
};

/// Scale knobs; unset fields take the suite's defaults.
struct BenchmarkOptions {
  std::optional<std::size_t> omega_train;
  std::optional<std::size_t> omega_test;
  std::optional<std::size_t> replications;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Suite ids: uniform1d, maxcall-desk, maxcall-full, cv-desk.
const std::vector<std::string>& benchmark_suites();

/// Runs a suite. Each row averages its replications; std_error is taken
/// across replications when there are at least two, otherwise it is the
/// per-trajectory standard error of the single evaluation.
std::vector<BenchmarkRow> run_benchmark(const std::string& suite, const BenchmarkOptions& options);

/// instance,method,variables,mean,stderr,seconds
void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows);

}  // namespace treestop
