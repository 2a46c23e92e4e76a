#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "gaitbac/ebac.hpp"
#include "gaitbac/features.hpp"
#include "gaitbac/ingest.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/synth.hpp"

using namespace gaitbac;

namespace {

SynthConfig small(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_subjects = 3;
  cfg.sessions_per_subject = 2;
  cfg.seed = seed;
  cfg.recording_completion = 1.0;
  return cfg;
}

double lateral_std(const GaitRecording& r) {
  std::vector<double> y;
  for (const auto& s : r.samples) y.push_back(s.lin_acc[0]);
  return window_std(y);
}

}  // namespace

TEST_CASE("generation is deterministic and thread independent") {
  const auto a = generate(small(5), 1);
  const auto b = generate(small(5), 3);
  CHECK(a.recordings == b.recordings);
  CHECK(a.recordings.size() == 30);
  const auto c = generate(small(6), 1);
  CHECK(c.recordings != a.recordings);
}

TEST_CASE("recordings pass validation and align with their truth") {
  const auto data = generate(small(7));
  for (const auto& r : data.recordings) {
    CHECK(validate_recording(r) == doctest::Approx(100.0));
    CHECK(r.samples.size() == 3000);
  }
  const auto aligned = align(data.recordings, data.ema);
  REQUIRE(aligned.labeled.size() == data.truth.rows.size());
  for (std::size_t i = 0; i < aligned.labeled.size(); ++i) {
    CHECK(aligned.labeled[i].recording.key() == data.truth.rows[i].key);
    CHECK(aligned.labeled[i].label == doctest::Approx(data.truth.rows[i].ebac).epsilon(1e-12));
  }
}

TEST_CASE("zero drinking gives zero labels") {
  auto cfg = small(8);
  cfg.zero_drinking = true;
  const auto data = generate(cfg);
  for (const auto& row : data.truth.rows) CHECK(row.ebac == 0.0);
}

TEST_CASE("mean eBAC over many sessions is plausible") {
  SynthConfig cfg;
  cfg.n_subjects = 40;
  cfg.sessions_per_subject = 10;
  double sum = 0.0, peak = 0.0;
  int count = 0;
  for (int s = 0; s < cfg.n_subjects; ++s) {
    const auto profile = gen_subject(cfg, s);
    for (int k = 0; k < cfg.sessions_per_subject; ++k) {
      const auto trace = ebac_timeline(gen_timeline(cfg, profile, s, k), profile);
      for (const auto& [hour, v] : trace.values) {
        sum += v;
        peak = std::max(peak, v);
        ++count;
      }
    }
  }
  CHECK(sum / count >= 0.02);
  CHECK(sum / count <= 0.07);
  CHECK(peak <= cfg.peak_cap);
}

TEST_CASE("intoxication widens lateral sway") {
  const SynthConfig cfg;
  const auto profile = gen_subject(cfg, 0);
  const EpisodeKey key{subject_name(0), session_date(cfg, 0), 21};
  double sober = 0.0, drunk = 0.0;
  for (std::uint64_t stream = 1; stream <= 5; ++stream) {
    sober += lateral_std(gen_recording(profile, key, 0.0, cfg, stream));
    drunk += lateral_std(gen_recording(profile, key, 0.2, cfg, stream));
  }
  CHECK(drunk > 1.5 * sober);
}

TEST_CASE("recording streams are distinct on a grid") {
  const SynthConfig cfg;
  std::set<std::uint64_t> seen;
  for (int s = 0; s < 10; ++s)
    for (int k = 0; k < 8; ++k)
      for (int h = 20; h <= 24; ++h) seen.insert(recording_stream(cfg, s, k, h));
  CHECK(seen.size() == 400);
}

TEST_CASE("session dates alternate Friday and Saturday") {
  const SynthConfig cfg;
  CHECK(session_date(cfg, 0) == "2017-10-06");
  CHECK(session_date(cfg, 1) == "2017-10-07");
  CHECK(session_date(cfg, 2) == "2017-10-13");
  CHECK(subject_name(0) == "S01");
}

TEST_CASE("synth config JSON") {
  SynthConfig cfg;
  cfg.n_subjects = 4;
  cfg.bac_effect.sway_amp = 3.0;
  const auto back = synth_config_from_json(to_json(cfg));
  CHECK(back.n_subjects == 4);
  CHECK(back.bac_effect.sway_amp == 3.0);
  CHECK_THROWS_AS(synth_config_from_json(nlohmann::json{{"n_subject", 4}}), Error);
}

TEST_CASE("write_synth produces loadable files") {
  const auto dir = std::filesystem::temp_directory_path() / "gaitbac_synth_test";
  std::filesystem::remove_all(dir);
  const auto data = generate(small(9));
  write_synth(data, dir);
  const auto loaded = load_recordings(dir / "recordings");
  CHECK(loaded.size() == data.recordings.size());
  const auto ema = parse_ema(dir / "ema.json");
  CHECK(align(loaded, ema).labeled.size() == data.recordings.size());
  CHECK(std::filesystem::exists(dir / "truth.csv"));
  std::filesystem::remove_all(dir);
}
