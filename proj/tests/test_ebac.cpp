#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gaitbac/ebac.hpp"
#include "gaitbac/error.hpp"

using namespace gaitbac;

namespace {
const SubjectProfile man180 = make_profile("m", kGenderConstantMale, 180.0);
const SubjectProfile woman120 = make_profile("w", kGenderConstantFemale, 120.0);
}  // namespace

TEST_CASE("ebac_instant hand-evaluated values") {
  CHECK(ebac_instant(0.0, woman120, 0.0) == 0.0);
  CHECK(ebac_instant(4.0, man180, 2.0) == doctest::Approx(0.0493333333333333).epsilon(1e-13));
  CHECK(ebac_instant(1.0, woman120, 10.0) == 0.0);
  CHECK(ebac_instant(1.0, woman120, 0.0) == doctest::Approx(0.0375).epsilon(1e-14));
}

TEST_CASE("ebac_instant rejects bad input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ebac_instant(nan, man180, 1.0), Error);
  try {
    ebac_instant(1.0, man180, std::numeric_limits<double>::infinity());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_finite_input);
  }
  CHECK_THROWS_AS(ebac_instant(-1.0, man180, 1.0), Error);
}

TEST_CASE("ebac_instant monotonicity and clamp") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> drinks(0.0, 10.0), hours(0.0, 5.0), weight(100.0, 250.0);
  for (int i = 0; i < 500; ++i) {
    const double c = drinks(rng), t = hours(rng), w = weight(rng);
    const auto p = make_profile("x", kGenderConstantMale, w);
    const auto pf = make_profile("x", kGenderConstantFemale, w);
    const auto heavier = make_profile("x", kGenderConstantMale, w + 10.0);
    const double v = ebac_instant(c, p, t);
    CHECK(v >= 0.0);
    CHECK(ebac_instant(c + 1.0, p, t) >= v);
    CHECK(ebac_instant(c, pf, t) >= v);
    CHECK(ebac_instant(c, heavier, t) <= v);
    CHECK(ebac_instant(c, p, t + 0.5) <= v);
  }
}

TEST_CASE("ebac_timeline: no drinking evening is all zeros") {
  EmaTimeline tl{"m", "2017-10-06", {{20, 0}, {21, 0}, {22, 0}, {23, 0}, {24, 0}}};
  const auto trace = ebac_timeline(tl, man180);
  CHECK_FALSE(trace.drinking_start.has_value());
  CHECK(trace.values.size() == 5);
  for (const auto& [h, v] : trace.values) CHECK(v == 0.0);
}

TEST_CASE("ebac_timeline: cumulative drinks with clearance") {
  // c/2 applies to cumulative drinks: 2 drinks -> 0.0416667, 4 drinks after 1 h -> 0.0663333.
  EmaTimeline tl{"m", "2017-10-06", {{20, 2}, {21, 2}}};
  const auto trace = ebac_timeline(tl, man180);
  REQUIRE(trace.drinking_start == 20);
  CHECK(trace.values.at(20) == doctest::Approx(0.041666666666666664).epsilon(1e-13));
  CHECK(trace.values.at(21) == doctest::Approx(0.066333333333333333).epsilon(1e-13));
  CHECK(trace.values.at(24) == doctest::Approx(4.0 / 2.0 * 7.5 / 180.0 - 0.017 * 4).epsilon(1e-13));
}

TEST_CASE("ebac_timeline: clearance to zero") {
  EmaTimeline tl{"w", "2017-10-06", {{20, 1}}};
  const auto trace = ebac_timeline(tl, woman120);
  CHECK(trace.values.at(20) == doctest::Approx(0.0375));
  CHECK(trace.values.at(21) == doctest::Approx(0.0205));
  CHECK(trace.values.at(23) == 0.0);
  CHECK(trace.values.at(24) == 0.0);
}

TEST_CASE("ebac_timeline: a fresh episode restarts the clock") {
  EmaTimeline tl{"w", "2017-10-06", {{20, 1}, {23, 2}}};
  const auto trace = ebac_timeline(tl, woman120);
  REQUIRE(trace.episode_starts.size() == 2);
  CHECK(trace.episode_starts[1] == 23);
  CHECK(trace.values.at(23) == doctest::Approx(2.0 / 2.0 * 9.0 / 120.0));
  CHECK(trace.values.at(24) == doctest::Approx(0.075 - 0.017));
}

TEST_CASE("ebac_timeline: missing hours count as zero drinks") {
  EmaTimeline sparse{"m", "d", {{20, 3}, {23, 0}}};
  EmaTimeline dense{"m", "d", {{20, 3}, {21, 0}, {22, 0}, {23, 0}, {24, 0}}};
  CHECK(ebac_timeline(sparse, man180).values == ebac_timeline(dense, man180).values);
}

TEST_CASE("ebac_timeline: adding a drink never lowers later hours") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 3), hour(20, 24);
  for (int trial = 0; trial < 300; ++trial) {
    EmaTimeline tl{"m", "d", {}};
    for (int h = 20; h <= 24; ++h) tl.reports[h] = d(rng);
    const auto before = ebac_timeline(tl, man180).values;
    const int h = hour(rng);
    tl.reports[h] += 1;
    const auto after = ebac_timeline(tl, man180).values;
    for (int k = h; k <= 24; ++k) CHECK(after.at(k) >= before.at(k) - 1e-15);
  }
}

TEST_CASE("ebac_at_hour covers off-schedule hours") {
  EmaTimeline tl{"m", "d", {{20, 4}}};
  CHECK(ebac_at_hour(tl, man180, 22) == doctest::Approx(4.0 / 2 * 7.5 / 180 - 0.034));
  CHECK(ebac_at_hour(tl, man180, 25) == doctest::Approx(std::max(0.0, 4.0 / 2 * 7.5 / 180 - 0.085)));
  CHECK(ebac_at_hour(tl, man180, 18) == 0.0);
}
