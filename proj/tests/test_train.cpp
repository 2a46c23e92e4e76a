#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/train.hpp"

using namespace gaitbac;

namespace {

double sse(const MlpModel& m, const Dataset& d) { return (d.targets - predict(m, d.inputs)).squaredNorm(); }

Dataset grouped(std::size_t n_groups, std::size_t per_group) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(n_groups * per_group);
  d.inputs = Eigen::MatrixXd::Zero(n, 2);
  d.targets = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.inputs(r, 0) = static_cast<double>(r);
    d.targets(r) = static_cast<double>(r) * 0.01;
    d.groups.push_back({"S" + std::to_string(r / static_cast<Eigen::Index>(per_group)), "2017-10-06", 21});
  }
  return d;
}

}  // namespace

TEST_CASE("LM fits a one-unit network to its own outputs") {
  const auto net = fixtures::teacher(2, 1, 7);
  const auto data = fixtures::sample(net, 50, 0.0, 7);
  const auto start = init_model(2, 1, 8, Scaling::identity(2));
  const auto res = train_lm(start, data, LmConfig{});
  CHECK(sse(res.model, data) < 1e-10);
  CHECK(res.report.algorithm == "lm");
  CHECK(res.model.metadata.epochs == res.report.iterations);
}

TEST_CASE("lm_step limits") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd jac(30, 6);
  for (Eigen::Index i = 0; i < jac.size(); ++i) jac.data()[i] = g(rng);
  Eigen::VectorXd rhs(6);
  for (auto& v : rhs) v = g(rng);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;

  const auto gn = lm_step(jtj, rhs, 1e-14);
  REQUIRE(gn);
  const Eigen::VectorXd exact = jtj.ldlt().solve(rhs);
  CHECK((*gn - exact).norm() < 1e-9 * exact.norm());

  const auto steep = lm_step(jtj, rhs, 1e8);
  REQUIRE(steep);
  CHECK(steep->dot(rhs) / (steep->norm() * rhs.norm()) > 1.0 - 1e-9);
  CHECK((*steep * 1e8 - rhs).norm() < 1e-5 * rhs.norm());

  CHECK_FALSE(lm_step(-Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3), 0.5));
}

TEST_CASE("BR first pass matches plain LM") {
  const auto net = fixtures::teacher(4, 3, 11);
  const auto data = fixtures::sample(net, 80, 0.05, 11);
  const auto start = init_model(4, 3, 12, Scaling::identity(4));
  LmConfig lm;
  lm.max_iters = 5;
  BrConfig br;
  br.max_outer = 1;
  br.inner_iters = 5;
  const auto a = train_lm(start, data, lm);
  const auto b = train_br(start, data, lm, br);
  CHECK(flatten(a.model) == flatten(b.model));
}

TEST_CASE("BR beta grows on noiseless data") {
  const auto net = fixtures::teacher(3, 4, 21);
  const auto data = fixtures::sample(net, 120, 0.0, 21);
  const auto start = init_model(3, 4, 22, Scaling::identity(3));
  std::vector<double> betas;
  for (int outer = 1; outer <= 3; ++outer) {
    BrConfig br;
    br.max_outer = outer;
    br.rel_tol = 1e-12;
    const auto res = train_br(start, data, LmConfig{}, br);
    REQUIRE(res.br);
    betas.push_back(res.br->beta);
  }
  CHECK(betas[0] < betas[1]);
  CHECK(betas[1] < betas[2]);
}

TEST_CASE("BR on pure noise uses few effective parameters") {
  Dataset data;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  data.inputs.resize(200, 5);
  data.targets.resize(200);
  for (Eigen::Index i = 0; i < data.inputs.size(); ++i) data.inputs.data()[i] = g(rng);
  for (auto& v : data.targets) v = g(rng);
  auto start = init_model(5, 10, 32, fit_scaling(data));
  const auto res = train_br(start, data, LmConfig{}, BrConfig{});
  REQUIRE(res.br);
  const auto n_params = static_cast<double>(start.parameter_count());
  CHECK(res.br->gamma >= 0.0);
  CHECK(res.br->gamma < 0.25 * n_params);
}

TEST_CASE("BR state is self-consistent") {
  const auto net = fixtures::teacher(4, 5, 41);
  const auto data = fixtures::sample(net, 150, 0.02, 41);
  const auto res = train_br(init_model(4, 5, 42, Scaling::identity(4)), data);
  REQUIRE(res.br);
  const auto& s = *res.br;
  CHECK(s.e_w == doctest::Approx(flatten(res.model).squaredNorm()).epsilon(1e-12));
  CHECK(s.e_d == doctest::Approx(sse(res.model, data)).epsilon(1e-9));
  CHECK(s.objective == doctest::Approx(s.beta * s.e_d + s.alpha * s.e_w).epsilon(1e-12));
  CHECK(s.gamma <= static_cast<double>(s.n_params));
  CHECK(res.model.metadata.alpha == s.alpha);
  CHECK(res.model.metadata.beta == s.beta);
  CHECK(res.model.metadata.gamma == s.gamma);
}

TEST_CASE("CG solves the convex output-layer problem") {
  const auto net = fixtures::teacher(3, 6, 51);
  const auto data = fixtures::sample(net, 100, 0.1, 51);
  auto start = fixtures::teacher(3, 4, 52);
  start.hidden_weights *= 4.0;
  start.output_weights.setZero();
  start.output_bias = 0.0;
  CgConfig cfg;
  cfg.max_iters = 5000;
  cfg.tol = 1e-12;
  cfg.trainable.assign(start.parameter_count(), false);
  std::fill(cfg.trainable.end() - 5, cfg.trainable.end(), true);
  const auto res = train_cg(start, data, cfg);

  CHECK(res.model.hidden_weights == start.hidden_weights);
  CHECK(res.model.hidden_bias == start.hidden_bias);

  Eigen::MatrixXd design(data.size(), 5);
  Eigen::MatrixXd pre = data.inputs * start.hidden_weights.transpose();
  pre.rowwise() += start.hidden_bias.transpose();
  design.leftCols(4) = ((-pre).array().exp() + 1.0).inverse().matrix();
  design.col(4).setOnes();
  const Eigen::VectorXd ls = design.colPivHouseholderQr().solve(data.targets);
  const double best = (data.targets - design * ls).squaredNorm();
  CHECK(sse(res.model, data) <= best * (1.0 + 1e-8));
  CHECK((res.model.output_weights - ls.head(4)).norm() < 1e-4 * ls.norm());

  for (std::size_t i = 1; i < res.report.trace.size(); ++i) {
    CHECK(res.report.trace[i].mse <= res.report.trace[i - 1].mse);
  }
}

TEST_CASE("CG stops at a zero-gradient start") {
  const auto net = fixtures::teacher(3, 2, 61);
  const auto data = fixtures::sample(net, 40, 0.0, 61);
  const auto res = train_cg(net, data);
  CHECK(res.report.stop_reason == "min_grad");
  CHECK(flatten(res.model) == flatten(net));
}

TEST_CASE("training is deterministic") {
  const auto net = fixtures::teacher(4, 3, 71);
  const auto data = fixtures::sample(net, 60, 0.05, 71);
  const auto start = init_model(4, 3, 72, Scaling::identity(4));
  TrainerConfig cfg;
  cfg.lm.max_iters = 50;
  cfg.cg.max_iters = 50;
  for (auto algo : {Algorithm::cg, Algorithm::lm, Algorithm::br}) {
    CHECK(flatten(train_mlp(algo, start, data, cfg).model) == flatten(train_mlp(algo, start, data, cfg).model));
  }
  CHECK_THROWS_AS(train_mlp(Algorithm::svr, start, data, cfg), Error);
}

TEST_CASE("random window split") {
  auto data = grouped(10, 10);
  const auto idx = split_indices(data, 0.7, SplitMode::random_window, 5);
  CHECK(idx.train.size() == 70);
  CHECK(idx.test.size() == 30);
  std::set<std::size_t> all(idx.train.begin(), idx.train.end());
  all.insert(idx.test.begin(), idx.test.end());
  CHECK(all.size() == 100);
  CHECK(*all.rbegin() == 99);
  const auto again = split_indices(data, 0.7, SplitMode::random_window, 5);
  CHECK(again.train == idx.train);
  CHECK(split_indices(data, 0.7, SplitMode::random_window, 6).train != idx.train);
  CHECK_THROWS_AS(split_indices(data, 1.0, SplitMode::random_window, 5), Error);
}

TEST_CASE("episode split keeps groups together") {
  auto data = grouped(10, 7);
  const auto [train, test] = split(data, 0.7, SplitMode::by_episode, 9);
  CHECK(train.size() == 49);
  CHECK(test.size() == 21);
  std::set<EpisodeKey> a(train.groups.begin(), train.groups.end()), b(test.groups.begin(), test.groups.end());
  CHECK(a.size() == 7);
  CHECK(b.size() == 3);
  for (const auto& k : b) CHECK(a.count(k) == 0);

  auto one = grouped(1, 5);
  try {
    split_indices(one, 0.7, SplitMode::by_episode, 1);
    FAIL("expected TooFewGroups");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_few_groups);
  }
}

TEST_CASE("sweep") {
  const auto net = fixtures::teacher(3, 3, 81);
  const auto data = fixtures::sample(net, 90, 0.05, 81);
  SweepOptions opt;
  opt.trainer.lm.max_iters = 30;
  const auto single = sweep_hidden(data, {4}, 3, Algorithm::lm, 1, opt);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.selected_hidden == 4);
  CHECK(single.rows[0].fold_mse.size() == 3);

  const auto serial = sweep_hidden(data, {1, 2, 3}, 3, Algorithm::lm, 2, opt);
  opt.threads = 3;
  const auto parallel = sweep_hidden(data, {3, 1, 2}, 3, Algorithm::lm, 2, opt);
  REQUIRE(parallel.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(parallel.rows[i].hidden == i + 1);
    CHECK(parallel.rows[i].fold_mse == serial.rows[i].fold_mse);
  }
  CHECK(parallel.selected_hidden == serial.selected_hidden);
  CHECK_THROWS_AS(sweep_hidden(data, {2}, 1, Algorithm::lm, 1), Error);
  CHECK_THROWS_AS(sweep_hidden(data, {2}, 3, Algorithm::linreg, 1), Error);
}
