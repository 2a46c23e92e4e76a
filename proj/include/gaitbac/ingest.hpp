#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gaitbac/types.hpp"
#include "json.hpp"

namespace gaitbac {

inline constexpr std::string_view kSensorLogHeader = "t,lax,lay,laz,roll,pitch,yaw";
inline constexpr double kMaxRecordingSeconds = 60.0;
inline constexpr double kMinMedianGap = 0.005;
inline constexpr double kMaxMedianGap = 0.020;
inline constexpr int kMaxDrinksPerHour = 30;

bool is_iso_date(std::string_view s);

// "<subject>_<date>_<hour>.csv" <-> key. The subject id may itself contain '_'.
EpisodeKey parse_recording_filename(std::string_view filename);
std::string recording_filename(const EpisodeKey& key);

// Checks ordering, finiteness, duration and nominal rate; returns the estimated
// sample rate (1 / median gap, or 100 Hz for a single-sample trace).
double validate_recording(const GaitRecording& rec);

GaitRecording parse_sensor_log(const std::filesystem::path& path);
GaitRecording parse_sensor_log(std::istream& in, const EpisodeKey& key, std::string_view source = "<stream>");
void write_sensor_log(const GaitRecording& rec, std::ostream& out);
void write_sensor_log(const GaitRecording& rec, const std::filesystem::path& path);

// Every *.csv under dir, sorted by episode key.
std::vector<GaitRecording> load_recordings(const std::filesystem::path& dir);

struct EmaData {
  std::vector<SubjectProfile> profiles;   // one per subject, sorted by id
  std::vector<EmaTimeline> timelines;     // one per (subject, session), sorted

  const SubjectProfile* find_profile(std::string_view subject_id) const;
  const EmaTimeline* find_timeline(std::string_view subject_id, std::string_view session_date) const;
};

EmaData parse_ema(const nlohmann::json& doc);
EmaData parse_ema(const std::filesystem::path& path);
EmaData parse_ema(const std::vector<std::filesystem::path>& paths);

// Folds `other` into `into`; conflicting profiles and repeated hour slots are errors.
void merge_ema(EmaData& into, const EmaData& other);

nlohmann::json to_json(const EmaData& ema);
void write_ema(const EmaData& ema, const std::filesystem::path& path);

struct LabeledRecording {
  GaitRecording recording;
  double label = 0.0;  // eBAC at the recording's hour, g/dl
};

struct AlignResult {
  std::vector<LabeledRecording> labeled;  // sorted by episode key
  std::size_t dropped = 0;                // recordings without a timeline or profile
  std::size_t off_schedule = 0;           // kept, but hour outside 20..24
};

AlignResult align(std::vector<GaitRecording> recordings, const EmaData& ema, const EbacParams& params = {});

}  // namespace gaitbac
