#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "treestop/core.hpp"
#include "treestop/tree_builder.hpp"

namespace treestop {

struct CvPoint {
  double gamma_bar = 0.0;  ///< running minimum relative improvement when recorded
  double holdout = 0.0;    ///< hold-out objective of the tree at that moment
};

struct CvBreakpointSet {
  std::size_t fold = 0;
  std::vector<CvPoint> points;  ///< gamma_bar strictly decreasing
  /// Hold-out objective of the final tree of the fold's build. Applies to
  /// tolerances at or below the last recorded gamma_bar; when absent the last
  /// point's value is used there.
  std::optional<double> terminal_holdout;
};

/// Hold-out objective nu_i(gamma) of one fold: pieces (g_{j+1}, g_j] are left-open, right-closed.
double fold_value(const CvBreakpointSet& set, double gamma);

/// Averaged cross-validation curve over [gamma_min, +inf).
class CvCurve {
 public:
  CvCurve(std::vector<CvBreakpointSet> folds, double gamma_min);

  [[nodiscard]] const std::vector<CvBreakpointSet>& folds() const { return folds_; }
  [[nodiscard]] double gamma_min() const { return gamma_min_; }
  /// Union of recorded gamma_bar values, strictly decreasing.
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] bool has_signal() const { return !breakpoints_.empty(); }

  /// nu(gamma) = mean over folds of fold_value, correctly rounded sum / k.
  [[nodiscard]] double value(double gamma) const;

  /// gamma_breakpoint, nu_fold_1..k, nu_mean; one row per breakpoint, value taken at the breakpoint.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<CvBreakpointSet> folds_;
  double gamma_min_;
  std::vector<double> breakpoints_;
};

struct GammaSelection {
  double gamma = 0.0;
  double lower = 0.0;  ///< argmax interval (lower, upper]; lower is gamma_min when the piece is clipped
  double upper = 0.0;  ///< +inf for the unbounded top piece
  double value = 0.0;  ///< nu on the interval
};

/// Maximizer of nu over [gamma_min, +inf). Among tied intervals the one with
/// the largest gamma wins. Bounded intervals give their midpoint; the
/// unbounded top piece gives twice the largest breakpoint. Throws DataError
/// when no fold recorded a breakpoint.
GammaSelection select_gamma(const CvCurve& curve);

struct CvConfig {
  std::size_t k = 5;
  double gamma_min = 1e-4;
  std::optional<std::uint64_t> shuffle_seed;  ///< folds are contiguous blocks when absent
};

/// Trajectory indices of each fold. Sizes differ by at most one, larger folds first.
std::vector<std::vector<std::size_t>> make_folds(std::size_t omega_count, std::size_t k,
                                                 std::optional<std::uint64_t> shuffle_seed);

/// Per-fold breakpoint harvesting with one build per fold at tolerance gamma_min.
/// `build_config.gamma` is ignored; `build_config.threads` also bounds fold parallelism.
std::vector<CvBreakpointSet> compute_breakpoints(const TrajectorySet& data, const CvConfig& cv,
                                                 const BuildConfig& build_config);

struct CvFit {
  BuildResult fit;
  GammaSelection selection;
  bool no_signal = false;  ///< no breakpoints were recorded; gamma fell back to gamma_min
  CvCurve curve;
};

/// Selects gamma by cross-validation and rebuilds on all trajectories with it.
CvFit fit_with_cv(const TrajectorySet& data, const CvConfig& cv, const BuildConfig& build_config);

}  // namespace treestop
