#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "gaitbac/error.hpp"
#include "gaitbac/features.hpp"

using namespace gaitbac;

namespace {

std::vector<double> random_window(std::mt19937_64& rng, std::size_t n, double offset = 0.0) {
  std::normal_distribution<double> g(offset, 2.0);
  std::vector<double> w(n);
  for (auto& v : w) v = g(rng);
  return w;
}

double brute_energy(const std::vector<double>& w, bool dc) {
  const std::size_t n = w.size();
  double sum = 0.0;
  for (std::size_t k = dc ? 0 : 1; k < n; ++k) {
    std::complex<double> x = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      x += w[t] * std::complex<double>(std::cos(a), std::sin(a));
    }
    sum += std::norm(x);
  }
  return sum / static_cast<double>(n);
}

GaitRecording recording(std::size_t n, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  GaitRecording r{"S01", "2017-10-06", 21, 100.0, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 100.0;
    r.samples.push_back({t, {g(rng), g(rng), 2.0 + g(rng)}, {0.1 * g(rng), std::sin(t), 0.3 * g(rng)}});
  }
  return r;
}

}  // namespace

TEST_CASE("window_mean") {
  CHECK(window_mean(std::vector<double>(128, 0.5)) == 0.5);
  std::vector<double> alt(128);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  CHECK(window_mean(alt) == 0.0);
  std::vector<double> s(128);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 128.0);
  CHECK(std::abs(window_mean(s)) < 1e-12);
}

TEST_CASE("window_std is the population deviation") {
  CHECK(window_std(std::vector<double>(64, 3.0)) == 0.0);
  std::vector<double> alt(128);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  CHECK(window_std(alt) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> s(128);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(4.0 * std::numbers::pi * static_cast<double>(i) / 128.0);
  CHECK(std::abs(window_std(s) - std::sqrt(2.0) / 2.0) < 1e-9);
  CHECK(window_std(std::vector<double>{1.0, 3.0}) == 1.0);
}

TEST_CASE("window_corr") {
  std::mt19937_64 rng(1);
  const auto a = random_window(rng, 128);
  auto neg = a;
  for (auto& v : neg) v = -v;
  CHECK(window_corr(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(window_corr(a, neg) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(window_corr(std::vector<double>(128, 2.0), a) == 0.0);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_window(rng, 128), y = random_window(rng, 128);
    CHECK(window_corr(x, y) == window_corr(y, x));
    CHECK(std::abs(window_corr(x, y)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("window_energy") {
  CHECK(window_energy(std::vector<double>(128, 0.0)) == 0.0);
  CHECK(window_energy(std::vector<double>(128, 1.0)) == doctest::Approx(128.0).epsilon(1e-14));
  CHECK(window_energy(std::vector<double>(128, 1.0), false) == doctest::Approx(0.0));

  std::mt19937_64 rng(2);
  for (std::size_t n : {std::size_t{2}, std::size_t{16}, std::size_t{100}, std::size_t{128}, std::size_t{256}}) {
    const auto w = random_window(rng, n, 1.5);
    double sum_sq = 0.0, mean = 0.0;
    for (double v : w) {
      sum_sq += v * v;
      mean += v;
    }
    mean /= static_cast<double>(n);
    const double e = window_energy(w);
    CHECK(std::abs(e - brute_energy(w, true)) <= 1e-9 * e);
    CHECK(std::abs(e - sum_sq) <= 1e-9 * sum_sq);
    const double no_dc = window_energy(w, false);
    CHECK(std::abs(no_dc - brute_energy(w, false)) <= 1e-9 * no_dc);
    CHECK(std::abs(no_dc - (sum_sq - static_cast<double>(n) * mean * mean)) <= 1e-9 * sum_sq);
  }

  const auto w = random_window(rng, 128);
  auto scaled = w;
  for (auto& v : scaled) v *= 3.0;
  CHECK(window_energy(scaled) == doctest::Approx(9.0 * window_energy(w)).epsilon(1e-13));
}

TEST_CASE("window counts") {
  const WindowConfig cfg;
  CHECK(window_count(3000, cfg) == 45);
  CHECK(window_count(128, cfg) == 1);
  CHECK(window_count(127, cfg) == 0);
  CHECK(extract(recording(3000), 0.05).size() == 45);
  CHECK(extract(recording(128), 0.05).size() == 1);
  try {
    extract(recording(127), 0.05);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_short);
  }
  CHECK_THROWS_AS((WindowConfig{128, 0, true}.validate()), Error);
  CHECK_THROWS_AS((WindowConfig{128, 129, true}.validate()), Error);
  CHECK_THROWS_AS((WindowConfig{1, 1, true}.validate()), Error);
}

TEST_CASE("extract uses the canonical feature order") {
  const auto rec = recording(400);
  const auto rows = extract(rec, 0.07);
  REQUIRE(rows.size() == 5);
  const auto& names = feature_names();
  CHECK(names[0] == "acc_mean_x");
  CHECK(names[23] == "att_corr_yz");
  for (std::size_t w = 0; w < rows.size(); ++w) {
    const auto& fv = rows[w];
    CHECK(fv.window_index == w);
    CHECK(fv.label == 0.07);
    CHECK(fv.key() == rec.key());
    for (int sensor = 0; sensor < 2; ++sensor) {
      std::array<std::vector<double>, 3> axis;
      for (std::size_t i = w * 64; i < w * 64 + 128; ++i) {
        const auto& v = sensor == 0 ? rec.samples[i].lin_acc : rec.samples[i].attitude;
        for (int a = 0; a < 3; ++a) axis[a].push_back(v[a]);
      }
      const std::size_t base = sensor * 12;
      for (int a = 0; a < 3; ++a) {
        CHECK(fv.values[base + a] == window_mean(axis[a]));
        CHECK(fv.values[base + 3 + a] == window_std(axis[a]));
        CHECK(fv.values[base + 6 + a] == window_energy(axis[a]));
      }
      CHECK(fv.values[base + 9] == window_corr(axis[0], axis[1]));
      CHECK(fv.values[base + 10] == window_corr(axis[0], axis[2]));
      CHECK(fv.values[base + 11] == window_corr(axis[1], axis[2]));
    }
  }
  CHECK(extract(rec, 0.07) == rows);
}

TEST_CASE("offset invariance of std and corr") {
  auto rec = recording(256);
  const auto base = extract(rec, 0.0);
  for (auto& s : rec.samples) s.lin_acc[0] += 5.0;
  const auto shifted = extract(rec, 0.0);
  for (std::size_t w = 0; w < base.size(); ++w) {
    CHECK(shifted[w].values[0] == doctest::Approx(base[w].values[0] + 5.0).epsilon(1e-13));
    CHECK(shifted[w].values[3] == doctest::Approx(base[w].values[3]).epsilon(1e-12));
    CHECK(shifted[w].values[9] == doctest::Approx(base[w].values[9]).epsilon(1e-10));
  }
}

TEST_CASE("features CSV round trip") {
  const auto rows = extract(recording(512), 0.125);
  std::stringstream buf;
  write_features_csv(rows, buf);
  std::string header;
  std::getline(std::istringstream(buf.str()), header);
  CHECK(header.rfind("subject_id,session_date,hour,window_index,acc_mean_x,", 0) == 0);
  CHECK(header.size() > 6);
  CHECK(header.substr(header.size() - 6) == ",label");
  buf.seekg(0);
  CHECK(read_features_csv(buf) == rows);
}
