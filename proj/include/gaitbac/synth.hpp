#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaitbac/ingest.hpp"
#include "gaitbac/types.hpp"
#include "json.hpp"

namespace gaitbac {

// Per unit eBAC (g/dl): stride-interval jitter as a fraction of the step period,
// lateral sway amplitude (m/s^2) and attitude wobble amplitude (rad).
struct BacEffect {
  double jitter_sd = 1.0;
  double sway_amp = 12.0;
  double wobble_amp = 0.8;
};

struct SynthConfig {
  int n_subjects = 10;
  int sessions_per_subject = 8;
  std::uint64_t seed = 20171006;
  double step_freq_hz = 1.8;
  double base_noise_sd = 0.6;
  BacEffect bac_effect;

  double sample_rate_hz = 100.0;
  double duration_s = 30.0;
  double recording_completion = 0.32;  // share of prompted hours with a gait recording
  double drinking_probability = 0.75;  // share of sessions with any drinks
  double mean_drinks = 3.6;
  double sd_drinks = 2.2;
  int max_drinks = 10;
  double peak_cap = 0.25;
  double weight_mean_lb = 179.0;
  double weight_sd_lb = 35.0;
  bool zero_drinking = false;
  std::string start_date = "2017-10-06";  // a Friday; sessions alternate Friday/Saturday

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
// Missing keys keep their defaults; unknown keys are a SchemaViolation.
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct SynthRecordingTruth {
  EpisodeKey key;
  double ebac = 0.0;
  double jitter_sd = 0.0;
  double sway_amp = 0.0;
  double wobble_amp = 0.0;
  std::uint64_t stream = 0;
};

struct SynthTruth {
  std::vector<SynthRecordingTruth> rows;  // sorted by key
};

struct SynthData {
  EmaData ema;
  std::vector<GaitRecording> recordings;
  SynthTruth truth;
};

std::string subject_name(int subject);
std::string session_date(const SynthConfig& cfg, int session);

SubjectProfile gen_subject(const SynthConfig& cfg, int subject);
EmaTimeline gen_timeline(const SynthConfig& cfg, const SubjectProfile& profile, int subject, int session);

GaitRecording gen_recording(const SubjectProfile& profile, const EpisodeKey& key, double ebac, const SynthConfig& cfg,
                            std::uint64_t stream);
std::uint64_t recording_stream(const SynthConfig& cfg, int subject, int session, int hour);

SynthData generate(const SynthConfig& cfg, unsigned threads = 1);

// recordings/<subject>_<date>_<hour>.csv, ema.json, truth.csv
void write_synth(const SynthData& data, const std::filesystem::path& dir);
void write_truth_csv(const SynthTruth& truth, const std::filesystem::path& path);

}  // namespace gaitbac
