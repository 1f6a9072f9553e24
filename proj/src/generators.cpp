#include "treestop/generators.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "treestop/csv_format.hpp"
#include "treestop/rng.hpp"

namespace treestop {

void MaxCallParams::validate() const {
  if (n_assets == 0) throw InputError("need at least one asset");
  if (!(initial_price > 0.0)) throw InputError("initial price must be > 0");
  if (!(strike > 0.0) || !(barrier > 0.0)) throw InputError("strike and barrier must be > 0");
  if (!(volatility >= 0.0)) throw InputError("volatility must be >= 0");
  if (!std::isfinite(rate) || !(years > 0.0)) throw InputError("rate must be finite and years > 0");
  if (periods < 1) throw InputError("periods must be >= 1");
  if (!(correlation >= -1.0 && correlation <= 1.0)) throw InputError("correlation must lie in [-1, 1]");
}

double MaxCallParams::discount() const { return std::exp(-rate * years / periods); }

void StateLayout::validate() const {
  if (!time && !prices && !payoff && !ko_ind) throw InputError("state layout emits no variables");
}

StateLayout StateLayout::parse(const std::string& list) {
  StateLayout l{false, false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::transform(item.begin(), item.end(), item.begin(), [](unsigned char c) { return std::tolower(c); });
    if (item == "time" || item == "t") {
      l.time = true;
    } else if (item == "prices") {
      l.prices = true;
    } else if (item == "payoff") {
      l.payoff = true;
    } else if (item == "koind" || item == "ko") {
      l.ko_ind = true;
    } else if (!item.empty()) {
      throw InputError("unknown state variable family: " + item);
    }
  }
  l.validate();
  return l;
}

std::string price_var(std::size_t j) { return "p" + std::to_string(j + 1); }

std::vector<std::size_t> price_var_indices(const StoppingInstance& instance) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0;; ++j) {
    const auto idx = instance.var_index(price_var(j));
    if (!idx) break;
    out.push_back(*idx);
  }
  return out;
}

namespace {

std::vector<std::string> layout_names(const StateLayout& layout, std::size_t n_assets) {
  std::vector<std::string> names;
  if (layout.time) names.emplace_back(kTimeVar);
  if (layout.prices) {
    for (std::size_t j = 0; j < n_assets; ++j) names.push_back(price_var(j));
  }
  if (layout.payoff) names.emplace_back(kPayoffVar);
  if (layout.ko_ind) names.emplace_back(kKoVar);
  return names;
}

// Appends one state vector in layout order.
void push_state(std::vector<double>& states, const StateLayout& layout, int t, const std::vector<double>& prices,
                double payoff, double ko) {
  if (layout.time) states.push_back(static_cast<double>(t + 1));
  if (layout.prices) states.insert(states.end(), prices.begin(), prices.end());
  if (layout.payoff) states.push_back(payoff);
  if (layout.ko_ind) states.push_back(ko);
}

std::vector<double> cholesky_factor(std::size_t n, double rho) {
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), rho);
  corr.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) throw InputError("correlation matrix is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) out[i * n + j] = l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace

TrajectorySet simulate_maxcall(const MaxCallParams& params, const StateLayout& layout, std::size_t omega_count,
                               std::uint64_t seed, unsigned threads) {
  params.validate();
  layout.validate();
  if (omega_count == 0) throw InputError("need at least one trajectory");
  const std::size_t n = params.n_assets;
  if (n > 2 * ((1u << 24) - 1)) throw InputError("too many assets");
  const std::vector<double> chol = cholesky_factor(n, params.correlation);

  StoppingInstance instance;
  instance.horizon = params.periods;
  instance.discount = params.discount();
  instance.var_names = layout_names(layout, n);
  instance.reward_kind = "maxcall";

  const auto horizon = static_cast<std::size_t>(params.periods);
  const std::size_t width = instance.num_vars();
  std::vector<double> states(omega_count * horizon * width);
  std::vector<double> rewards(omega_count * horizon);

  const double dt = params.years / params.periods;
  const double drift = (params.rate - 0.5 * params.volatility * params.volatility) * dt;
  const double diffusion = params.volatility * std::sqrt(dt);
  const double log_p0 = std::log(params.initial_price);

  parallel_for(omega_count, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> log_p(n), prices(n), eps(n), row;
    row.reserve(width);
    for (std::size_t w = begin; w < end; ++w) {
      std::fill(log_p.begin(), log_p.end(), log_p0);
      double running_max = 0.0;
      for (int t = 0; t < params.periods; ++t) {
        if (t > 0) {
          for (std::size_t j = 0; j < n; j += 2) {
            const auto b = random_block(seed, Stream::GbmShock, w, static_cast<std::uint32_t>(t),
                                        static_cast<std::uint32_t>(j / 2));
            eps[j] = to_normal(b[0], b[1]);
            if (j + 1 < n) eps[j + 1] = to_normal(b[2], b[3]);
          }
          for (std::size_t i = 0; i < n; ++i) {
            double z = 0.0;
            for (std::size_t j = 0; j <= i; ++j) z += chol[i * n + j] * eps[j];
            log_p[i] += drift + diffusion * z;
          }
        }
        double best = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          prices[j] = t == 0 ? params.initial_price : std::exp(log_p[j]);
          best = std::max(best, prices[j]);
        }
        running_max = std::max(running_max, best);
        const double ko = running_max < params.barrier ? 1.0 : 0.0;
        const double payoff = std::max(0.0, best - params.strike) * ko;
        row.clear();
        push_state(row, layout, t, prices, payoff, ko);
        std::copy(row.begin(), row.end(), states.begin() + static_cast<std::ptrdiff_t>((w * horizon + t) * width));
        rewards[w * horizon + static_cast<std::size_t>(t)] = payoff;
      }
    }
  });
  return TrajectorySet(std::move(instance), omega_count, std::move(states), std::move(rewards));
}

TrajectorySet simulate_uniform_1d(int horizon, double discount, const StateLayout& layout, std::size_t omega_count,
                                  std::uint64_t seed, unsigned threads) {
  if (!layout.time && !layout.payoff) throw InputError("uniform instance needs the time or payoff variable");
  if (omega_count == 0) throw InputError("need at least one trajectory");
  StoppingInstance instance;
  instance.horizon = horizon;
  instance.discount = discount;
  if (layout.time) instance.var_names.emplace_back(kTimeVar);
  if (layout.payoff) instance.var_names.emplace_back(kPayoffVar);
  instance.reward_kind = "uniform1d";
  instance.validate();

  const auto T = static_cast<std::size_t>(horizon);
  const std::size_t width = instance.num_vars();
  std::vector<double> states(omega_count * T * width);
  std::vector<double> rewards(omega_count * T);
  parallel_for(omega_count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      for (std::size_t t = 0; t < T; ++t) {
        const double x = uniform01(seed, Stream::Uniform1d, w, static_cast<std::uint32_t>(t));
        double* s = states.data() + (w * T + t) * width;
        if (layout.time) *s++ = static_cast<double>(t + 1);
        if (layout.payoff) *s = x;
        rewards[w * T + t] = x;
      }
    }
  });
  return TrajectorySet(std::move(instance), omega_count, std::move(states), std::move(rewards));
}

PriceTable PriceTable::read_csv(std::istream& in) {
  PriceTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("price table is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2) throw InputError("price table needs a date column and at least one ticker");
  table.tickers.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InputError("price table line " + std::to_string(line_no) + " has the wrong number of fields");
    }
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].find_first_not_of(" \t") == std::string::npos) {
        throw InputError("missing price on line " + std::to_string(line_no));
      }
      const double p = parse_double(cells[c]);
      if (!std::isfinite(p)) throw InputError("non-finite price on line " + std::to_string(line_no));
      row.push_back(p);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::pair<TrajectorySet, TrajectorySet> ingest_price_windows(const PriceTable& table, const IngestConfig& config) {
  const std::size_t n_tickers = table.tickers.size();
  if (config.layout.ko_ind) throw InputError("price windows carry no knock-out indicator");
  config.layout.validate();
  if (config.assets_per_instance == 0 || config.assets_per_instance > n_tickers) {
    throw InputError("assets_per_instance must lie in [1, number of tickers]");
  }
  if (config.window_len == 0 || config.window_len > table.rows.size()) {
    throw InputError("window length exceeds the number of price rows");
  }
  const std::size_t windows = table.rows.size() / config.window_len;
  if (config.n_train == 0 || config.n_train >= windows) {
    throw InputError("n_train must leave at least one training and one test window");
  }
  if (!(config.day_fraction > 0.0) || !std::isfinite(config.rate)) throw InputError("invalid rate or day fraction");

  std::vector<std::size_t> assets(n_tickers);
  std::iota(assets.begin(), assets.end(), std::size_t{0});
  if (config.seed) {
    // Partial Fisher-Yates: the first assets_per_instance slots are the sample.
    for (std::size_t i = 0; i < config.assets_per_instance; ++i) {
      const std::size_t j = i + uniform_index(*config.seed, Stream::AssetSelect, i, n_tickers - i);
      std::swap(assets[i], assets[j]);
    }
  }
  assets.resize(config.assets_per_instance);

  StoppingInstance instance;
  instance.horizon = static_cast<int>(config.window_len);
  instance.discount = std::exp(-config.rate * config.day_fraction);
  instance.var_names = layout_names(config.layout, assets.size());
  instance.reward_kind = "price_windows";
  instance.validate();

  auto make = [&](std::size_t first, std::size_t count) {
    const std::size_t width = instance.num_vars();
    std::vector<double> states;
    std::vector<double> rewards;
    states.reserve(count * config.window_len * width);
    rewards.reserve(count * config.window_len);
    std::vector<double> prices(assets.size());
    for (std::size_t w = first; w < first + count; ++w) {
      const auto& day1 = table.rows[w * config.window_len];
      for (std::size_t d = 0; d < config.window_len; ++d) {
        const auto& row = table.rows[w * config.window_len + d];
        double best = 0.0;
        for (std::size_t j = 0; j < assets.size(); ++j) {
          const double base = day1[assets[j]];
          if (!(base > 0.0)) throw InputError("window start price must be positive");
          prices[j] = row[assets[j]] / base * config.rescale_to;
          best = std::max(best, prices[j]);
        }
        const double payoff = std::max(0.0, best - config.strike);
        push_state(states, config.layout, static_cast<int>(d), prices, payoff, 1.0);
        rewards.push_back(payoff);
      }
    }
    return TrajectorySet(instance, count, std::move(states), std::move(rewards));
  };
  return {make(0, config.n_train), make(config.n_train, windows - config.n_train)};
}

}  // namespace treestop
