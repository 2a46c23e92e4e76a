#pragma once

#include <cstdint>
#include <random>

#include "gaitbac/mlp.hpp"
#include "gaitbac/seed.hpp"

namespace fixtures {

// A random n_in-H-1 "teacher" network with identity scaling.
inline gaitbac::MlpModel teacher(std::size_t n_in, std::size_t hidden, std::uint64_t seed) {
  auto m = gaitbac::zero_model(n_in, hidden);
  std::mt19937_64 rng(gaitbac::derive_seed(seed, {101}));
  std::normal_distribution<double> in_w(0.0, 1.5 / std::sqrt(static_cast<double>(n_in)));
  std::normal_distribution<double> out_w(0.0, 1.0);
  for (Eigen::Index j = 0; j < m.hidden_weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < m.hidden_weights.cols(); ++i) m.hidden_weights(j, i) = in_w(rng);
    m.hidden_bias(j) = 0.5 * out_w(rng);
    m.output_weights(j) = out_w(rng);
  }
  m.output_bias = 0.1 * out_w(rng);
  return m;
}

// n rows with inputs uniform in [-1, 1] and targets teacher(x) + N(0, noise_sd).
inline gaitbac::Dataset sample(const gaitbac::MlpModel& net, std::size_t n, double noise_sd, std::uint64_t seed) {
  std::mt19937_64 rng(gaitbac::derive_seed(seed, {202}));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  gaitbac::Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(net.n_in));
  for (Eigen::Index r = 0; r < d.inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.inputs.cols(); ++c) d.inputs(r, c) = u(rng);
  }
  d.targets = gaitbac::predict(net, d.inputs);
  if (noise_sd > 0.0) {
    for (Eigen::Index r = 0; r < d.targets.size(); ++r) d.targets(r) += noise_sd * noise(rng);
  }
  return d;
}

inline double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).squaredNorm() / a.size(); }

}  // namespace fixtures
