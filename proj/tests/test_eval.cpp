#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gaitbac/error.hpp"
#include "gaitbac/eval.hpp"

using namespace gaitbac;

TEST_CASE("metrics on small examples") {
  const std::vector<double> t{1.0, 2.0, 3.0, 4.0};
  const auto perfect = metrics(t, t);
  CHECK(perfect.mse == 0.0);
  CHECK(perfect.r == doctest::Approx(1.0));
  CHECK(*perfect.rae_percent == 0.0);
  CHECK(*perfect.rrse_percent == 0.0);

  const std::vector<double> p{2.0, 3.0, 4.0, 5.0};
  const auto shifted = metrics(p, t);
  CHECK(shifted.mse == 1.0);
  CHECK(shifted.mae == 1.0);
  CHECK(shifted.rmse == 1.0);
  CHECK(shifted.r == doctest::Approx(1.0));
  CHECK(*shifted.rae_percent == doctest::Approx(100.0));
  CHECK(*shifted.rrse_percent == doctest::Approx(100.0 / std::sqrt(1.25)));

  const std::vector<double> mean(4, 2.5);
  const auto flat = metrics(mean, t);
  CHECK(flat.r == 0.0);
  CHECK(*flat.rae_percent == doctest::Approx(100.0));
  CHECK(*flat.rrse_percent == doctest::Approx(100.0));

  const auto constant = metrics(t, mean);
  CHECK(constant.zero_variance_target);
  CHECK_FALSE(constant.rae_percent);
  CHECK_FALSE(constant.rrse_percent);

  CHECK_THROWS_AS(metrics(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(metrics(std::vector<double>{1.0, 2.0}, t), Error);
}

TEST_CASE("metrics are invariant to joint permutation") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> p(100), t(100);
  for (std::size_t i = 0; i < 100; ++i) {
    t[i] = g(rng);
    p[i] = t[i] + 0.3 * g(rng);
  }
  const auto a = metrics(p, t);
  std::vector<std::size_t> order(100);
  for (std::size_t i = 0; i < 100; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> p2, t2;
  for (auto i : order) {
    p2.push_back(p[i]);
    t2.push_back(t[i]);
  }
  const auto b = metrics(p2, t2);
  CHECK(b.mse == doctest::Approx(a.mse).epsilon(1e-13));
  CHECK(b.r == doctest::Approx(a.r).epsilon(1e-13));
  CHECK(b.mae == doctest::Approx(a.mae).epsilon(1e-13));
  CHECK(b.rmse * b.rmse == doctest::Approx(b.mse).epsilon(1e-13));
}

TEST_CASE("histogram on a regular grid") {
  std::vector<double> e(200);
  for (std::size_t i = 0; i < 200; ++i) e[i] = static_cast<double>(i) / 199.0;
  const auto h = histogram(e, 20);
  REQUIRE(h.edges.size() == 21);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  const auto& c = h.counts.at("all");
  for (auto v : c) CHECK(v == 10);
  CHECK(h.total() == 200);

  const auto deg = histogram(std::vector<double>(5, 2.0), 4);
  CHECK(deg.edges.front() == 1.5);
  CHECK(deg.edges.back() == 2.5);
  CHECK(deg.total() == 5);
}

TEST_CASE("histogram shares edges across splits") {
  const auto h = histogram({{"train", {-1.0, 0.0, 0.2}}, {"test", {0.5, 3.0}}}, 4);
  CHECK(h.edges.front() == -1.0);
  CHECK(h.edges.back() == 3.0);
  CHECK(h.counts.at("train") == std::vector<std::size_t>{1, 2, 0, 0});
  CHECK(h.counts.at("test") == std::vector<std::size_t>{0, 1, 0, 1});
  CHECK(h.total() == 5);
}

TEST_CASE("best fit line") {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> p{1.0, 3.0, 5.0, 7.0};
  const auto f = best_fit(t, p);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("tables list every row") {
  MetricsReport m;
  m.n = 10;
  m.mse = 1.25e-4;
  m.r = 0.97;
  m.rae_percent = 20.0;
  m.rrse_percent = 24.0;
  const auto two = format_mse_r_table("Test", {{"BR", m}, {"LM", m}});
  CHECK(two.find("Test") != std::string::npos);
  CHECK(two.find("BR") != std::string::npos);
  CHECK(two.find("LM") != std::string::npos);
  MetricsReport flat = m;
  flat.rae_percent.reset();
  flat.rrse_percent.reset();
  const auto five = format_five_metric_table("All", {{"MLP", m}, {"Linear", flat}});
  CHECK(five.find("MLP") != std::string::npos);
  CHECK(five.find("Linear") != std::string::npos);
}
