#include "treestop/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "treestop/csv_format.hpp"
#include "treestop/rng.hpp"

namespace treestop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double fold_value(const CvBreakpointSet& set, double gamma) {
  const auto& pts = set.points;
  if (pts.empty()) return set.terminal_holdout.value_or(0.0);
  // Number of recorded gamma_bar values >= gamma; gamma_bar is decreasing.
  const auto covering = static_cast<std::size_t>(
      std::partition_point(pts.begin(), pts.end(), [gamma](const CvPoint& p) { return p.gamma_bar >= gamma; }) -
      pts.begin());
  if (covering == 0) return pts.front().holdout;
  if (covering < pts.size()) return pts[covering].holdout;
  return set.terminal_holdout.value_or(pts.back().holdout);
}

CvCurve::CvCurve(std::vector<CvBreakpointSet> folds, double gamma_min) : folds_(std::move(folds)), gamma_min_(gamma_min) {
  if (folds_.empty()) throw InputError("a cross-validation curve needs at least one fold");
  for (const auto& f : folds_) {
    for (std::size_t j = 0; j < f.points.size(); ++j) {
      if (std::isnan(f.points[j].gamma_bar)) throw InputError("breakpoint gamma must not be NaN");
      if (j > 0 && !(f.points[j].gamma_bar < f.points[j - 1].gamma_bar)) {
        throw InputError("breakpoints of a fold must be strictly decreasing");
      }
      breakpoints_.push_back(f.points[j].gamma_bar);
    }
  }
  std::sort(breakpoints_.begin(), breakpoints_.end(), std::greater<>());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

double CvCurve::value(double gamma) const {
  ExactSum acc;
  for (const auto& f : folds_) acc.add(fold_value(f, gamma));
  return acc.value() / static_cast<double>(folds_.size());
}

void CvCurve::write_csv(std::ostream& os) const {
  os << "gamma_breakpoint";
  for (std::size_t i = 0; i < folds_.size(); ++i) os << ",nu_fold_" << (i + 1);
  os << ",nu_mean\n";
  for (double b : breakpoints_) {
    os << format_double(b);
    for (const auto& f : folds_) os << ',' << format_double(fold_value(f, b));
    os << ',' << format_double(value(b)) << '\n';
  }
}

GammaSelection select_gamma(const CvCurve& curve) {
  if (!curve.has_signal()) throw DataError("no signal: no fold recorded a cross-validation breakpoint");
  const auto& b = curve.breakpoints();
  const double gmin = curve.gamma_min();

  // Top piece (b[0], inf) first, then (b[i+1], b[i]] downward; strict > keeps the largest gamma on ties.
  GammaSelection best;
  best.lower = std::max(b.front(), gmin);
  best.upper = kInf;
  best.value = curve.value(kInf);
  best.gamma = 2.0 * best.lower;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] < gmin) break;
    const double lower = i + 1 < b.size() ? std::max(b[i + 1], gmin) : gmin;
    const double v = curve.value(b[i]);
    if (v > best.value) {
      best.value = v;
      best.lower = lower;
      best.upper = b[i];
      best.gamma = std::midpoint(lower, b[i]);
    }
  }
  return best;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t omega_count, std::size_t k,
                                                 std::optional<std::uint64_t> shuffle_seed) {
  if (k < 2 || k > omega_count) throw InputError("fold count must satisfy 2 <= k <= number of trajectories");
  std::vector<std::size_t> order(omega_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    for (std::size_t i = omega_count - 1; i > 0; --i) {
      const std::size_t j = uniform_index(*shuffle_seed, Stream::FoldShuffle, i, i + 1);
      std::swap(order[i], order[j]);
    }
  }
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = omega_count / k;
  const std::size_t extra = omega_count % k;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    folds[i].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[i].begin(), folds[i].end());
    pos += len;
  }
  return folds;
}

std::vector<CvBreakpointSet> compute_breakpoints(const TrajectorySet& data, const CvConfig& cv,
                                                 const BuildConfig& build_config) {
  if (!(cv.gamma_min > 0.0)) throw InputError("gamma_min must be > 0");
  const auto folds = make_folds(data.num_trajectories(), cv.k, cv.shuffle_seed);
  BuildConfig config = build_config;
  config.gamma = cv.gamma_min;
  config.threads = 1;
  config.validate(data.num_vars());

  std::vector<CvBreakpointSet> sets(cv.k);
  parallel_for(cv.k, build_config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::vector<char> held(data.num_trajectories(), 0);
      for (std::size_t w : folds[i]) held[w] = 1;
      std::vector<std::size_t> train;
      for (std::size_t w = 0; w < data.num_trajectories(); ++w) {
        if (!held[w]) train.push_back(w);
      }
      const TrajectorySet train_data = data.subset(train);
      const TrajectorySet holdout = data.subset(folds[i]);

      CvBreakpointSet& set = sets[i];
      set.fold = i;
      double gamma_bar = kInf;
      const auto result = build(train_data, config, [&](const TreePolicy& tree, const BuildStep& step) {
        if (step.rel_improvement < gamma_bar) {
          gamma_bar = step.rel_improvement;
          set.points.push_back({gamma_bar, evaluate(tree, holdout).mean_reward});
        }
      });
      set.terminal_holdout = evaluate(result.policy, holdout).mean_reward;
    }
  });
  return sets;
}

CvFit fit_with_cv(const TrajectorySet& data, const CvConfig& cv, const BuildConfig& build_config) {
  CvCurve curve(compute_breakpoints(data, cv, build_config), cv.gamma_min);
  GammaSelection selection;
  bool no_signal = !curve.has_signal();
  if (no_signal) {
    selection.gamma = cv.gamma_min;
    selection.lower = cv.gamma_min;
    selection.upper = kInf;
    selection.value = curve.value(kInf);
  } else {
    selection = select_gamma(curve);
  }
  BuildConfig config = build_config;
  config.gamma = selection.gamma;
  BuildResult fit = build(data, config);
  return CvFit{std::move(fit), selection, no_signal, std::move(curve)};
}

}  // namespace treestop
