#include "treestop/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "treestop/csv_format.hpp"
#include "treestop/generators.hpp"

namespace treestop {
namespace {

struct TagName {
  BasisTag tag;
  const char* name;
};

constexpr TagName kTagNames[] = {
    {BasisTag::One, "one"},           {BasisTag::Prices, "prices"},         {BasisTag::PricesKo, "pricesko"},
    {BasisTag::KoInd, "koind"},       {BasisTag::Payoff, "payoff"},         {BasisTag::MaxPriceKo, "maxpriceko"},
    {BasisTag::Max2PriceKo, "max2priceko"}, {BasisTag::Prices2Ko, "prices2ko"}, {BasisTag::MaxPrice, "maxprice"},
    {BasisTag::Prices2, "prices2"},
};

bool needs_prices(BasisTag t) { return t != BasisTag::One && t != BasisTag::KoInd && t != BasisTag::Payoff; }

bool needs_ko(BasisTag t) {
  return t == BasisTag::PricesKo || t == BasisTag::KoInd || t == BasisTag::MaxPriceKo || t == BasisTag::Max2PriceKo ||
         t == BasisTag::Prices2Ko;
}

}  // namespace

std::string to_string(BasisTag tag) {
  for (const auto& tn : kTagNames) {
    if (tn.tag == tag) return tn.name;
  }
  return "?";
}

BasisTag parse_basis_tag(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& tn : kTagNames) {
    if (lower == tn.name) return tn.tag;
  }
  throw InputError("unknown basis function family: " + name);
}

BasisSpec::BasisSpec(std::vector<BasisTag> tags) : tags_(std::move(tags)) {
  if (tags_.empty()) throw InputError("basis must contain at least one family");
}

BasisSpec BasisSpec::parse(const std::string& list) {
  std::vector<BasisTag> tags;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) tags.push_back(parse_basis_tag(item));
  }
  return BasisSpec(std::move(tags));
}

void BasisSpec::bind(const StoppingInstance& instance) {
  if (tags_.empty()) throw InputError("basis must contain at least one family");
  price_idx_ = price_var_indices(instance);
  ko_idx_ = instance.var_index(kKoVar);
  names_.clear();
  const std::size_t n = price_idx_.size();
  for (BasisTag tag : tags_) {
    if (needs_prices(tag) && n == 0) throw InputError("basis " + to_string(tag) + " needs price variables");
    if (needs_ko(tag) && !ko_idx_) throw InputError("basis " + to_string(tag) + " needs the knock-out indicator");
    switch (tag) {
      case BasisTag::One: names_.emplace_back("one"); break;
      case BasisTag::KoInd: names_.emplace_back("ko"); break;
      case BasisTag::Payoff: names_.emplace_back("payoff"); break;
      case BasisTag::MaxPrice: names_.emplace_back("maxprice"); break;
      case BasisTag::MaxPriceKo: names_.emplace_back("maxprice_ko"); break;
      case BasisTag::Max2PriceKo:
        if (n < 2) throw InputError("basis max2priceko needs at least two assets");
        names_.emplace_back("max2price_ko");
        break;
      case BasisTag::Prices:
      case BasisTag::PricesKo:
        for (std::size_t i = 0; i < n; ++i) names_.push_back(price_var(i) + (tag == BasisTag::PricesKo ? "_ko" : ""));
        break;
      case BasisTag::Prices2:
      case BasisTag::Prices2Ko:
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i; j < n; ++j) {
            names_.push_back(price_var(i) + "*" + price_var(j) + (tag == BasisTag::Prices2Ko ? "_ko" : ""));
          }
        }
        break;
    }
  }
  bound_ = true;
}

void BasisSpec::expand(std::span<const double> state, double reward, std::span<double> out) const {
  if (!bound_) throw StructuralError("basis used before bind()");
  const std::size_t n = price_idx_.size();
  const double ko = ko_idx_ ? state[*ko_idx_] : 1.0;
  double top = -std::numeric_limits<double>::infinity();
  double second = top;
  for (std::size_t i : price_idx_) {
    const double p = state[i];
    if (p > top) {
      second = top;
      top = p;
    } else if (p > second) {
      second = p;
    }
  }
  std::size_t k = 0;
  for (BasisTag tag : tags_) {
    switch (tag) {
      case BasisTag::One: out[k++] = 1.0; break;
      case BasisTag::KoInd: out[k++] = ko; break;
      case BasisTag::Payoff: out[k++] = reward; break;
      case BasisTag::MaxPrice: out[k++] = top; break;
      case BasisTag::MaxPriceKo: out[k++] = top * ko; break;
      case BasisTag::Max2PriceKo: out[k++] = second * ko; break;
      case BasisTag::Prices:
      case BasisTag::PricesKo: {
        const double m = tag == BasisTag::PricesKo ? ko : 1.0;
        for (std::size_t i = 0; i < n; ++i) out[k++] = state[price_idx_[i]] * m;
        break;
      }
      case BasisTag::Prices2:
      case BasisTag::Prices2Ko: {
        const double m = tag == BasisTag::Prices2Ko ? ko : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i; j < n; ++j) out[k++] = state[price_idx_[i]] * state[price_idx_[j]] * m;
        }
        break;
      }
    }
  }
}

LsPolicy::LsPolicy(BasisSpec basis, int horizon, std::vector<std::vector<double>> coefficients)
    : basis_(std::move(basis)), horizon_(horizon), coef_(std::move(coefficients)) {
  if (horizon_ < 1) throw InputError("horizon must be >= 1");
  if (coef_.size() != static_cast<std::size_t>(horizon_ - 1)) throw InputError("need one coefficient vector per period before T");
  for (const auto& r : coef_) {
    if (r.size() != basis_.dimension()) throw InputError("coefficient vector length differs from basis dimension");
    for (double c : r) {
      if (!std::isfinite(c)) throw DataError("regression produced a non-finite coefficient");
    }
  }
}

double LsPolicy::continuation(int t, std::span<const double> state, double reward) const {
  if (t < 0 || t >= horizon_ - 1) return 0.0;
  const auto& r = coef_[static_cast<std::size_t>(t)];
  thread_local std::vector<double> phi;
  phi.resize(r.size());
  basis_.expand(state, reward, phi);
  double c = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) c += phi[k] * r[k];
  return c;
}

Action LsPolicy::action(int t, std::span<const double> state, double reward) const {
  if (!(reward > 0.0)) return Action::Go;
  if (t >= horizon_ - 1) return Action::Stop;
  return reward >= continuation(t, state, reward) ? Action::Stop : Action::Go;
}

void LsPolicy::write_csv(std::ostream& os) const {
  os << 't';
  for (const auto& name : basis_.column_names()) os << ',' << name;
  os << '\n';
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    os << (t + 1);
    for (double c : coef_[t]) os << ',' << format_double(c);
    os << '\n';
  }
}

LsPolicy fit_longstaff_schwartz(const TrajectorySet& data, BasisSpec basis) {
  basis.bind(data.instance());
  const std::size_t omega_count = data.num_trajectories();
  const int horizon = data.horizon();
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  const auto rows = static_cast<Eigen::Index>(omega_count);
  const double beta = data.instance().discount;

  // Value of the fitted policy from period t onward, in period-t money.
  Eigen::VectorXd value(rows);
  for (std::size_t w = 0; w < omega_count; ++w) {
    const double g = data.reward(w, horizon - 1);
    value(static_cast<Eigen::Index>(w)) = g > 0.0 ? g : 0.0;
  }

  std::vector<std::vector<double>> coef(static_cast<std::size_t>(std::max(horizon - 1, 0)));
  Eigen::MatrixXd x(rows, d);
  std::vector<double> phi(basis.dimension());
  for (int t = horizon - 2; t >= 0; --t) {
    for (std::size_t w = 0; w < omega_count; ++w) {
      basis.expand(data.state(w, t), data.reward(w, t), phi);
      for (Eigen::Index k = 0; k < d; ++k) x(static_cast<Eigen::Index>(w), k) = phi[static_cast<std::size_t>(k)];
    }
    const Eigen::VectorXd y = beta * value;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x.rows(), x.cols());
    // Relative pivot cutoff eps * max(m, n), so exactly collinear columns count as dependent.
    cod.setThreshold(std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, d)));
    cod.compute(x);
    const Eigen::VectorXd r = cod.solve(y);
    for (std::size_t w = 0; w < omega_count; ++w) {
      const auto i = static_cast<Eigen::Index>(w);
      // Same summation order as LsPolicy::continuation, so training decisions match the policy.
      double fitted = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) fitted += x(i, k) * r(k);
      const double g = data.reward(w, t);
      value(i) = (g > 0.0 && g >= fitted) ? g : y(i);
    }
    coef[static_cast<std::size_t>(t)].assign(r.data(), r.data() + r.size());
  }
  return LsPolicy(std::move(basis), horizon, std::move(coef));
}

UniformDpSolution exact_uniform_dp(int horizon, double discount) {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw InputError("discount must lie in (0, 1]");
  UniformDpSolution out;
  out.policy.thresholds.assign(static_cast<std::size_t>(horizon), 0.0);
  double expected = 0.5;  // E[J_T] = E[x]
  for (int t = horizon - 2; t >= 0; --t) {
    const double c = discount * expected;
    out.policy.thresholds[static_cast<std::size_t>(t)] = c;
    expected = 0.5 * (1.0 + c * c);
  }
  out.optimal_value = expected;
  return out;
}

}  // namespace treestop
