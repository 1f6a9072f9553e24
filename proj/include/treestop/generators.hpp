#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treestop/core.hpp"

namespace treestop {

/// Correlated geometric Brownian motion max-call with a knock-out barrier.
struct MaxCallParams {
  std::size_t n_assets = 8;
  double initial_price = 90.0;
  double strike = 100.0;
  double barrier = 170.0;
  double rate = 0.05;        ///< annual
  double volatility = 0.2;   ///< annual
  double correlation = 0.0;  ///< common pairwise correlation
  double years = 3.0;
  int periods = 54;

  void validate() const;
  /// exp(-rate * years / periods).
  [[nodiscard]] double discount() const;
};

/// Which derived variables appear in the state vector, in the order t, p1..pn, payoff, ko.
struct StateLayout {
  bool time = true;
  bool prices = true;
  bool payoff = true;
  bool ko_ind = true;

  void validate() const;
  /// Parses a comma list drawn from {time, prices, payoff, koind}.
  static StateLayout parse(const std::string& list);
};

/// Canonical variable names.
inline constexpr const char* kTimeVar = "t";
inline constexpr const char* kPayoffVar = "payoff";
inline constexpr const char* kKoVar = "ko";
std::string price_var(std::size_t j);  ///< "p1", "p2", ...

/// Omega trajectories of T periods. p(1) is the initial price for every asset;
/// T - 1 steps of length years / T follow. Draws depend only on (seed, omega, t, asset).
TrajectorySet simulate_maxcall(const MaxCallParams& params, const StateLayout& layout, std::size_t omega_count,
                               std::uint64_t seed, unsigned threads = 1);

/// i.i.d. Uniform(0, 1) states with reward equal to the state. Only the time and payoff flags are used.
TrajectorySet simulate_uniform_1d(int horizon, double discount, const StateLayout& layout, std::size_t omega_count,
                                  std::uint64_t seed, unsigned threads = 1);

/// Daily closing prices, one column per ticker.
struct PriceTable {
  std::vector<std::string> tickers;
  std::vector<std::vector<double>> rows;  ///< rows[day][ticker]

  /// First column is a date (ignored beyond ordering); the rest are prices. Throws InputError on missing values.
  static PriceTable read_csv(std::istream& in);
};

struct IngestConfig {
  std::size_t assets_per_instance = 4;
  std::size_t window_len = 30;
  double strike = 105.0;
  double rescale_to = 100.0;
  std::size_t n_train = 100;  ///< leading windows used for training; the rest are test
  double rate = 0.05;         ///< annual
  double day_fraction = 1.0 / 252.0;
  std::optional<std::uint64_t> seed;  ///< random asset subset; the first columns when absent
  StateLayout layout{true, true, true, false};
};

/// Consecutive non-overlapping windows of the price table become trajectories.
std::pair<TrajectorySet, TrajectorySet> ingest_price_windows(const PriceTable& table, const IngestConfig& config);

/// Indices of p1..pn in the instance, in asset order (empty if prices are not emitted).
std::vector<std::size_t> price_var_indices(const StoppingInstance& instance);

}  // namespace treestop
