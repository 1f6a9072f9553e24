#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treestop/core.hpp"

namespace treestop {

enum class BasisTag {
  One,
  Prices,
  PricesKo,
  KoInd,
  Payoff,
  MaxPriceKo,
  Max2PriceKo,
  Prices2Ko,
  MaxPrice,
  Prices2,
};

std::string to_string(BasisTag tag);
BasisTag parse_basis_tag(const std::string& name);

/// Regression basis: an ordered list of families expanded against an instance's variables.
class BasisSpec {
 public:
  BasisSpec() = default;
  explicit BasisSpec(std::vector<BasisTag> tags);
  /// Comma list of tag names, case-insensitive ("one,pricesko,koind,payoff").
  static BasisSpec parse(const std::string& list);

  [[nodiscard]] const std::vector<BasisTag>& tags() const { return tags_; }

  /// Binds the basis to an instance; throws InputError when a needed variable is missing.
  void bind(const StoppingInstance& instance);
  [[nodiscard]] std::size_t dimension() const { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& column_names() const { return names_; }

  /// Writes the basis expansion of (state, reward) into `out` (size dimension()).
  void expand(std::span<const double> state, double reward, std::span<double> out) const;

 private:
  std::vector<BasisTag> tags_;
  std::vector<std::size_t> price_idx_;
  std::optional<std::size_t> ko_idx_;
  std::vector<std::string> names_;
  bool bound_ = false;
};

/// Regression policy: at period t < T stop iff g > 0 and g >= phi(x) . r_t; at T stop iff g > 0.
class LsPolicy {
 public:
  LsPolicy(BasisSpec basis, int horizon, std::vector<std::vector<double>> coefficients);

  [[nodiscard]] Action action(int t, std::span<const double> state, double reward) const;
  [[nodiscard]] double continuation(int t, std::span<const double> state, double reward) const;

  [[nodiscard]] const BasisSpec& basis() const { return basis_; }
  [[nodiscard]] int horizon() const { return horizon_; }
  /// coefficients()[t] for periods t = 0 .. T-2.
  [[nodiscard]] const std::vector<std::vector<double>>& coefficients() const { return coef_; }

  /// Header t,<basis columns>; one row per period 1..T-1.
  void write_csv(std::ostream& os) const;

 private:
  BasisSpec basis_;
  int horizon_;
  std::vector<std::vector<double>> coef_;
};

/// Backward-induction least squares on every trajectory (minimum-norm solution).
LsPolicy fit_longstaff_schwartz(const TrajectorySet& data, BasisSpec basis);

/// Stop at period t iff the reward on offer is >= thresholds[t].
struct ThresholdPolicy {
  std::vector<double> thresholds;

  [[nodiscard]] Action action(int t, std::span<const double> /*state*/, double reward) const {
    return reward >= thresholds.at(static_cast<std::size_t>(t)) ? Action::Stop : Action::Go;
  }
};

struct UniformDpSolution {
  ThresholdPolicy policy;
  double optimal_value = 0.0;
};

/// Exact backward recursion for i.i.d. Uniform(0, 1) rewards over T periods with discount beta.
UniformDpSolution exact_uniform_dp(int horizon, double discount);

}  // namespace treestop
