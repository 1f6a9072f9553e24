#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "treestop/generators.hpp"

using namespace treestop;

namespace {

MaxCallParams small_params() {
  MaxCallParams p;
  p.n_assets = 3;
  p.periods = 10;
  return p;
}

}  // namespace

TEST_CASE("max-call layout and naming") {
  const auto d = simulate_maxcall(small_params(), StateLayout{}, 5, 1);
  const auto& names = d.instance().var_names;
  CHECK(names == std::vector<std::string>{"t", "p1", "p2", "p3", "payoff", "ko"});
  CHECK(d.instance().reward_kind == "maxcall");
  CHECK(d.horizon() == 10);
  CHECK(d.instance().discount == doctest::Approx(std::exp(-0.05 * 3.0 / 10.0)));
  CHECK(price_var_indices(d.instance()) == std::vector<std::size_t>{1, 2, 3});

  const auto no_ko = simulate_maxcall(small_params(), StateLayout{false, true, false, false}, 5, 1);
  CHECK(no_ko.instance().var_names == std::vector<std::string>{"p1", "p2", "p3"});
  // layout changes the columns, never the paths
  CHECK(no_ko.value(3, 4, 1) == d.value(3, 4, 2));
  CHECK(no_ko.reward(3, 4) == d.reward(3, 4));
  CHECK_THROWS_AS(StateLayout({false, false, false, false}).validate(), InputError);
}

TEST_CASE("max-call path structure") {
  const auto p = small_params();
  const auto d = simulate_maxcall(p, StateLayout{}, 200, 3);
  for (std::size_t w = 0; w < d.num_trajectories(); ++w) {
    double ko_prev = 1.0;
    double running_max = 0.0;
    for (int t = 0; t < d.horizon(); ++t) {
      CHECK(d.value(w, t, 0) == t + 1);
      double top = 0.0;
      for (std::size_t j = 1; j <= 3; ++j) {
        const double x = d.value(w, t, j);
        if (t == 0) CHECK(x == p.initial_price);
        CHECK(x > 0.0);
        top = std::max(top, x);
      }
      running_max = std::max(running_max, top);
      const double ko = d.value(w, t, 5);
      CHECK(ko == (running_max < p.barrier ? 1.0 : 0.0));
      CHECK(ko <= ko_prev);
      ko_prev = ko;
      CHECK(d.value(w, t, 4) == std::max(0.0, top - p.strike) * ko);
      CHECK(d.reward(w, t) == d.value(w, t, 4));
    }
  }
}

TEST_CASE("max-call draws are reproducible, prefix-stable and thread independent") {
  const auto a = simulate_maxcall(small_params(), StateLayout{}, 50, 7, 1);
  const auto b = simulate_maxcall(small_params(), StateLayout{}, 80, 7, 4);
  const auto c = simulate_maxcall(small_params(), StateLayout{}, 50, 8, 1);
  bool differs = false;
  for (std::size_t w = 0; w < 50; ++w) {
    for (int t = 0; t < 10; ++t) {
      for (std::size_t v = 0; v < 6; ++v) {
        CHECK(a.value(w, t, v) == b.value(w, t, v));
        differs = differs || a.value(w, t, v) != c.value(w, t, v);
      }
    }
  }
  CHECK(differs);
}

TEST_CASE("max-call marginal moments follow risk-neutral GBM") {
  MaxCallParams p;
  p.n_assets = 2;
  p.periods = 5;
  p.barrier = 1e9;
  p.correlation = 0.5;
  const std::size_t n = 40000;
  const auto d = simulate_maxcall(p, StateLayout{false, true, false, false}, n, 11);
  const double dt = p.years / p.periods;
  const double horizon_time = dt * (p.periods - 1);
  double m = 0, s = 0, cxy = 0, sx = 0, sy = 0;
  for (std::size_t w = 0; w < n; ++w) {
    const double x = std::log(d.value(w, 4, 0) / p.initial_price);
    const double y = std::log(d.value(w, 4, 1) / p.initial_price);
    m += d.value(w, 4, 0);
    s += x * x;
    sx += x;
    sy += y;
    cxy += x * y;
  }
  const double mean_log = sx / n;
  const double var_log = s / n - mean_log * mean_log;
  const double cov = cxy / n - mean_log * (sy / n);
  CHECK(m / n == doctest::Approx(p.initial_price * std::exp(p.rate * horizon_time)).epsilon(0.01));
  CHECK(mean_log == doctest::Approx((p.rate - 0.5 * p.volatility * p.volatility) * horizon_time).epsilon(0.05));
  CHECK(var_log == doctest::Approx(p.volatility * p.volatility * horizon_time).epsilon(0.03));
  CHECK(cov / var_log == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("max-call parameter validation") {
  auto p = small_params();
  p.correlation = -0.9;  // not positive definite for three assets
  CHECK_THROWS_AS(simulate_maxcall(p, StateLayout{}, 5, 1), InputError);
  p = small_params();
  p.volatility = -0.1;
  CHECK_THROWS_AS(simulate_maxcall(p, StateLayout{}, 5, 1), InputError);
  p = small_params();
  p.periods = 0;
  CHECK_THROWS_AS(simulate_maxcall(p, StateLayout{}, 5, 1), InputError);
  p = small_params();
  p.n_assets = 0;
  CHECK_THROWS_AS(simulate_maxcall(p, StateLayout{}, 5, 1), InputError);
}

TEST_CASE("uniform instance") {
  const auto d = simulate_uniform_1d(6, 0.9, StateLayout{true, false, true, false}, 30000, 2);
  CHECK(d.instance().var_names == std::vector<std::string>{"t", "payoff"});
  CHECK(d.instance().reward_kind == "uniform1d");
  double sum = 0;
  for (std::size_t w = 0; w < d.num_trajectories(); ++w) {
    for (int t = 0; t < 6; ++t) {
      CHECK(d.value(w, t, 0) == t + 1);
      CHECK(d.reward(w, t) == d.value(w, t, 1));
      CHECK(d.reward(w, t) >= 0.0);
      CHECK(d.reward(w, t) < 1.0);
      sum += d.reward(w, t);
    }
  }
  CHECK(sum / (30000.0 * 6) == doctest::Approx(0.5).epsilon(0.01));
  const auto again = simulate_uniform_1d(6, 0.9, StateLayout{false, false, true, false}, 10, 2);
  CHECK(again.value(9, 5, 0) == d.reward(9, 5));
  CHECK_THROWS_AS(simulate_uniform_1d(6, 0.9, StateLayout{false, false, false, false}, 10, 2), InputError);
}

TEST_CASE("price table parsing") {
  std::istringstream in("date,A,B\n2020-01-01,1,2\r\n2020-01-02,3,4\n\n");
  const auto t = PriceTable::read_csv(in);
  CHECK(t.tickers == std::vector<std::string>{"A", "B"});
  CHECK(t.rows == std::vector<std::vector<double>>{{1, 2}, {3, 4}});
  std::istringstream missing("date,A,B\n2020-01-01,1,\n");
  CHECK_THROWS_AS(PriceTable::read_csv(missing), InputError);
  std::istringstream ragged("date,A,B\n2020-01-01,1\n");
  CHECK_THROWS_AS(PriceTable::read_csv(ragged), InputError);
  std::istringstream empty("");
  CHECK_THROWS_AS(PriceTable::read_csv(empty), InputError);
}

TEST_CASE("price windows") {
  PriceTable t;
  t.tickers = {"A", "B", "C"};
  for (int d = 0; d < 20; ++d) t.rows.push_back({100.0 + d, 50.0 + 2 * d, 10.0});
  IngestConfig cfg;
  cfg.assets_per_instance = 2;
  cfg.window_len = 5;
  cfg.n_train = 3;
  cfg.strike = 105.0;
  const auto [train, test] = ingest_price_windows(t, cfg);
  CHECK(train.num_trajectories() == 3);
  CHECK(test.num_trajectories() == 1);
  CHECK(train.instance().var_names == std::vector<std::string>{"t", "p1", "p2", "payoff"});
  CHECK(train.instance().discount == doctest::Approx(std::exp(-0.05 / 252.0)));
  // window 2 starts at day 5: A = 105, B = 60
  CHECK(train.value(1, 0, 1) == 100.0);
  CHECK(train.value(1, 4, 1) == doctest::Approx(109.0 / 105.0 * 100.0));
  CHECK(train.value(1, 4, 2) == doctest::Approx(68.0 / 60.0 * 100.0));
  CHECK(train.reward(1, 4) == doctest::Approx(68.0 / 60.0 * 100.0 - 105.0));
  CHECK(train.reward(1, 0) == 0.0);
  CHECK(test.value(0, 0, 0) == 1.0);

  cfg.seed = 5;
  const auto [s1, s2] = ingest_price_windows(t, cfg);
  CHECK(s1.num_vars() == 4);
  (void)s2;

  cfg.layout.ko_ind = true;
  CHECK_THROWS_AS(ingest_price_windows(t, cfg), InputError);
  cfg.layout.ko_ind = false;
  cfg.n_train = 4;
  CHECK_THROWS_AS(ingest_price_windows(t, cfg), InputError);
  cfg.n_train = 3;
  cfg.assets_per_instance = 4;
  CHECK_THROWS_AS(ingest_price_windows(t, cfg), InputError);
}

TEST_CASE("deterministic limit") {
  MaxCallParams p;
  p.n_assets = 3;
  p.periods = 6;
  p.volatility = 0.0;
  p.rate = 0.0;
  const auto d = simulate_maxcall(p, StateLayout{}, 4, 1);
  for (std::size_t w = 0; w < 4; ++w) {
    for (int t = 0; t < 6; ++t) {
      for (std::size_t j = 1; j <= 3; ++j) CHECK(d.value(w, t, j) == doctest::Approx(90.0).epsilon(1e-14));
      CHECK(d.reward(w, t) == 0.0);
    }
  }
}

TEST_CASE("option discount per period") {
  MaxCallParams p;
  CHECK(std::round(p.discount() * 1e5) / 1e5 == 0.99723);
}

TEST_CASE("single asset one-step log returns") {
  MaxCallParams p;
  p.n_assets = 1;
  p.periods = 2;
  p.barrier = 1e9;
  const std::size_t n = 100000;
  const auto d = simulate_maxcall(p, StateLayout{false, true, false, false}, n, 12);
  const double dt = p.years / p.periods;
  std::vector<double> r(n), r2(n);
  for (std::size_t w = 0; w < n; ++w) r[w] = std::log(d.value(w, 1, 0) / d.value(w, 0, 0));
  const auto m = mean_stderr(r);
  CHECK(std::abs(m.mean - (p.rate - 0.5 * p.volatility * p.volatility) * dt) < 4.0 * m.std_error);
  for (std::size_t w = 0; w < n; ++w) r2[w] = (r[w] - m.mean) * (r[w] - m.mean);
  const auto v = mean_stderr(r2);
  CHECK(std::abs(v.mean - p.volatility * p.volatility * dt) < 4.0 * v.std_error);
}

TEST_CASE("knock-out frequency agrees with an independent simulator") {
  MaxCallParams p;
  p.initial_price = 110.0;
  const std::size_t n = 100000;
  const auto d = simulate_maxcall(p, StateLayout{false, false, false, true}, n, 13);
  std::vector<double> ours(n), ref(n);
  for (std::size_t w = 0; w < n; ++w) ours[w] = d.value(w, p.periods - 1, 0) == 0.0 ? 1.0 : 0.0;

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  const double dt = p.years / p.periods;
  const double drift = (p.rate - 0.5 * p.volatility * p.volatility) * dt;
  const double vol = p.volatility * std::sqrt(dt);
  for (std::size_t w = 0; w < n; ++w) {
    std::vector<double> logp(p.n_assets, std::log(p.initial_price));
    bool out = p.initial_price >= p.barrier;
    for (int t = 1; t < p.periods; ++t) {
      for (auto& x : logp) {
        x += drift + vol * z(rng);
        if (std::exp(x) >= p.barrier) out = true;
      }
    }
    ref[w] = out ? 1.0 : 0.0;
  }
  const auto a = mean_stderr(ours);
  const auto b = mean_stderr(ref);
  CHECK(a.mean > 0.05);
  CHECK(std::abs(a.mean - b.mean) < 4.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("uniform state mean over a million draws") {
  const auto d = simulate_uniform_1d(1, 1.0, StateLayout{false, false, true, false}, 1000000, 14);
  std::vector<double> x(d.num_trajectories());
  for (std::size_t w = 0; w < x.size(); ++w) x[w] = d.reward(w, 0);
  const auto m = mean_stderr(x);
  CHECK(std::abs(m.mean - 0.5) < 4.0 * m.std_error);
}

TEST_CASE("price windows: constant series, split sizes and hand-computed growth") {
  PriceTable flat;
  flat.tickers = {"A", "B"};
  flat.rows.assign(150 * 3, {20.0, 40.0});
  IngestConfig cfg;
  cfg.assets_per_instance = 2;
  cfg.window_len = 3;
  cfg.n_train = 100;
  const auto [tr, te] = ingest_price_windows(flat, cfg);
  CHECK(tr.num_trajectories() == 100);
  CHECK(te.num_trajectories() == 50);
  for (std::size_t w = 0; w < tr.num_trajectories(); ++w) {
    for (int t = 0; t < 3; ++t) CHECK(tr.reward(w, t) == 0.0);
  }

  // A grows 1% a day, B is flat; strike 102, rescale 100
  PriceTable grow;
  grow.tickers = {"A", "B"};
  for (int day = 0; day < 8; ++day) grow.rows.push_back({50.0 * std::pow(1.01, day), 7.0});
  cfg.window_len = 4;
  cfg.n_train = 1;
  cfg.strike = 102.0;
  const auto [g1, g2] = ingest_price_windows(grow, cfg);
  const double expected[4] = {0.0, 0.0, 100 * 1.01 * 1.01 - 102.0, 100 * 1.01 * 1.01 * 1.01 - 102.0};
  for (int t = 0; t < 4; ++t) {
    CHECK(g1.reward(0, t) == doctest::Approx(std::max(0.0, expected[t])));
    CHECK(g2.reward(0, t) == doctest::Approx(std::max(0.0, expected[t])));
  }
}
