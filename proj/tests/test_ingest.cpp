#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gaitbac/ebac.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/ingest.hpp"

using namespace gaitbac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

GaitRecording make_recording(const std::string& subject, const std::string& date, int hour, std::size_t n,
                             std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  GaitRecording r{subject, date, hour, 100.0, {}};
  for (std::size_t i = 0; i < n; ++i) {
    r.samples.push_back({static_cast<double>(i) / 100.0, {g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)}});
  }
  return r;
}

std::string to_csv(const GaitRecording& r) {
  std::ostringstream out;
  write_sensor_log(r, out);
  return out.str();
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::invalid_argument;
}

json ema_record(const std::string& subject, const std::string& gender, double weight, const std::string& date,
                std::vector<std::pair<int, int>> reports) {
  json r = json::array();
  for (auto [h, d] : reports) r.push_back({{"hour", h}, {"drinks", d}});
  return {{"subject_id", subject}, {"gender", gender}, {"weight_lb", weight}, {"session_date", date}, {"reports", r}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("gaitbac_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("recording filenames") {
  const auto key = parse_recording_filename("S_01_2017-10-06_21.csv");
  CHECK(key.subject_id == "S_01");
  CHECK(key.session_date == "2017-10-06");
  CHECK(key.hour_slot == 21);
  CHECK(recording_filename(key) == "S_01_2017-10-06_21.csv");
  CHECK(code_of([] { parse_recording_filename("nodate_21.csv"); }) == Errc::malformed_filename);
  CHECK(code_of([] { parse_recording_filename("S01_2017-13-06_21.csv"); }) == Errc::malformed_filename);
}

TEST_CASE("3000-row sensor log at 100 Hz") {
  const auto rec = make_recording("S01", "2017-10-06", 20, 3000);
  std::istringstream in(to_csv(rec));
  const auto parsed = parse_sensor_log(in, rec.key());
  CHECK(parsed.samples.size() == 3000);
  CHECK(parsed.duration() == doctest::Approx(29.99).epsilon(1e-12));
  CHECK(parsed.sample_rate_hz == doctest::Approx(100.0));
}

TEST_CASE("sensor log round trip is exact") {
  const auto rec = make_recording("S01", "2017-10-06", 22, 500, 9);
  std::istringstream in(to_csv(rec));
  const auto parsed = parse_sensor_log(in, rec.key());
  CHECK(parsed.key() == rec.key());
  CHECK(parsed.samples == rec.samples);
  CHECK(parsed.sample_rate_hz == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(to_csv(parsed) == to_csv(rec));
}

TEST_CASE("sensor log errors") {
  const std::string header = "t,lax,lay,laz,roll,pitch,yaw\n";
  const EpisodeKey key{"S01", "2017-10-06", 20};
  SUBCASE("NaN cell names the line") {
    std::istringstream in(header + "0,1,2,3,4,5,6\n0.01,nan,2,3,4,5,6\n");
    try {
      parse_sensor_log(in, key, "log.csv");
      FAIL("expected MalformedRow");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_row);
      CHECK(std::string(e.what()).find("log.csv:3") != std::string::npos);
    }
  }
  SUBCASE("equal timestamps") {
    std::istringstream in(header + "0,1,2,3,4,5,6\n0,1,2,3,4,5,6\n");
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::non_monotonic_time);
  }
  SUBCASE("wrong column count") {
    std::istringstream in(header + "0,1,2,3,4,5\n");
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::malformed_row);
  }
  SUBCASE("header only") {
    std::istringstream in(header);
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::empty_recording);
  }
  SUBCASE("missing header") {
    std::istringstream in("0,1,2,3,4,5,6\n");
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::malformed_row);
  }
  SUBCASE("sample rate out of tolerance") {
    auto rec = make_recording("S01", "2017-10-06", 20, 100);
    for (auto& s : rec.samples) s.t *= 3.0;
    std::istringstream in(to_csv(rec));
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::bad_sample_rate);
  }
  SUBCASE("longer than 60 s") {
    auto rec = make_recording("S01", "2017-10-06", 20, 6200);
    std::istringstream in(to_csv(rec));
    CHECK(code_of([&] { parse_sensor_log(in, key); }) == Errc::schema_violation);
  }
}

TEST_CASE("EMA parsing") {
  SUBCASE("female maps to 9.0") {
    const auto ema = parse_ema(json::array({ema_record("A", "female", 130, "2017-10-06", {{20, 1}})}));
    REQUIRE(ema.profiles.size() == 1);
    CHECK(ema.profiles[0].gender_constant == 9.0);
    CHECK(ema.timelines[0].drinks_at(20) == 1);
  }
  SUBCASE("drinks out of range") {
    const json doc = json::array({ema_record("A", "male", 180, "2017-10-06", {{20, 31}})});
    CHECK(code_of([&] { parse_ema(doc); }) == Errc::schema_violation);
  }
  SUBCASE("unknown gender") {
    const json doc = json::array({ema_record("A", "other", 180, "2017-10-06", {{20, 1}})});
    CHECK(code_of([&] { parse_ema(doc); }) == Errc::invalid_gender_constant);
  }
  SUBCASE("duplicate hour") {
    const json doc = json::array({ema_record("A", "male", 180, "2017-10-06", {{20, 1}, {20, 2}})});
    CHECK(code_of([&] { parse_ema(doc); }) == Errc::duplicate_hour_slot);
  }
  SUBCASE("missing field") {
    json rec = ema_record("A", "male", 180, "2017-10-06", {{20, 1}});
    rec.erase("weight_lb");
    CHECK(code_of([&] { parse_ema(json::array({rec})); }) == Errc::schema_violation);
  }
  SUBCASE("two files, one subject, disjoint dates") {
    TempDir dir("ema_merge");
    std::ofstream(dir.path / "a.json") << json::array({ema_record("A", "male", 180, "2017-10-06", {{20, 1}})});
    std::ofstream(dir.path / "b.json") << json::array({ema_record("A", "male", 180, "2017-10-07", {{21, 2}})});
    const auto ema = parse_ema(std::vector<fs::path>{dir.path / "a.json", dir.path / "b.json"});
    CHECK(ema.profiles.size() == 1);
    CHECK(ema.timelines.size() == 2);
  }
  SUBCASE("conflicting profiles across files") {
    EmaData a = parse_ema(json::array({ema_record("A", "male", 180, "2017-10-06", {{20, 1}})}));
    const EmaData b = parse_ema(json::array({ema_record("A", "male", 181, "2017-10-07", {{20, 1}})}));
    CHECK(code_of([&] { merge_ema(a, b); }) == Errc::schema_violation);
  }
  SUBCASE("round trip") {
    const json doc = json::array({ema_record("B", "female", 150.5, "2017-10-07", {{20, 0}, {22, 3}}),
                                  ema_record("A", "male", 180, "2017-10-06", {{21, 2}})});
    const auto ema = parse_ema(doc);
    const auto again = parse_ema(to_json(ema));
    CHECK(again.profiles == ema.profiles);
    CHECK(again.timelines == ema.timelines);
  }
}

TEST_CASE("align") {
  const auto ema = parse_ema(json::array({ema_record("A", "male", 180, "2017-10-06", {{20, 4}, {21, 0}}),
                                          ema_record("B", "female", 120, "2017-10-06", {{20, 0}, {21, 0}})}));
  std::vector<GaitRecording> recs = {make_recording("A", "2017-10-06", 22, 200),
                                     make_recording("B", "2017-10-06", 21, 200),
                                     make_recording("C", "2017-10-06", 21, 200),
                                     make_recording("A", "2017-10-06", 19, 200)};
  const auto result = align(recs, ema);
  CHECK(result.dropped == 1);
  CHECK(result.off_schedule == 1);
  REQUIRE(result.labeled.size() == 3);
  for (const auto& l : result.labeled) {
    CHECK(l.label >= 0.0);
    CHECK(std::isfinite(l.label));
    const auto* tl = ema.find_timeline(l.recording.subject_id, l.recording.session_date);
    CHECK(l.label == ebac_at_hour(*tl, *ema.find_profile(l.recording.subject_id), l.recording.hour_slot));
  }
  const auto b = std::find_if(result.labeled.begin(), result.labeled.end(),
                              [](const auto& l) { return l.recording.subject_id == "B"; });
  CHECK(b->label == 0.0);

  std::reverse(recs.begin(), recs.end());
  const auto shuffled = align(recs, ema);
  REQUIRE(shuffled.labeled.size() == result.labeled.size());
  for (std::size_t i = 0; i < result.labeled.size(); ++i) {
    CHECK(shuffled.labeled[i].recording == result.labeled[i].recording);
    CHECK(shuffled.labeled[i].label == result.labeled[i].label);
  }
}

TEST_CASE("load_recordings reads a directory in key order") {
  TempDir dir("load");
  for (int h : {22, 20, 21}) {
    const auto r = make_recording("S1", "2017-10-06", h, 150, static_cast<std::uint64_t>(h));
    write_sensor_log(r, dir.path / recording_filename(r.key()));
  }
  const auto recs = load_recordings(dir.path);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].hour_slot == 20);
  CHECK(recs[2].hour_slot == 22);
  CHECK(recs[1].samples == make_recording("S1", "2017-10-06", 21, 150, 21).samples);
}
