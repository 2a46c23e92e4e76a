#pragma once

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

namespace gaitbac {

inline constexpr double kGenderConstantFemale = 9.0;
inline constexpr double kGenderConstantMale = 7.5;

// Scheduled prompt hours on the local clock: 8pm through midnight.
inline constexpr int kFirstScheduledHour = 20;
inline constexpr int kLastScheduledHour = 24;

struct SubjectProfile {
  std::string subject_id;
  double gender_constant = kGenderConstantFemale;  // 9.0 women, 7.5 men
  double weight_lb = 0.0;

  bool operator==(const SubjectProfile&) const = default;
};

// Validates and builds a profile; throws InvalidGenderConstant / SchemaViolation.
SubjectProfile make_profile(std::string subject_id, double gender_constant, double weight_lb);

using Vec3 = std::array<double, 3>;

struct ImuSample {
  double t = 0.0;    // seconds since recording start
  Vec3 lin_acc{};    // m/s^2, gravity removed
  Vec3 attitude{};   // Euler angles, rad

  bool operator==(const ImuSample&) const = default;
};

// Identifies one prompt: who, which evening, which hour.
struct EpisodeKey {
  std::string subject_id;
  std::string session_date;  // YYYY-MM-DD
  int hour_slot = 0;

  auto operator<=>(const EpisodeKey&) const = default;
};

struct GaitRecording {
  std::string subject_id;
  std::string session_date;
  int hour_slot = 0;
  double sample_rate_hz = 100.0;
  std::vector<ImuSample> samples;

  EpisodeKey key() const { return {subject_id, session_date, hour_slot}; }
  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
  bool off_schedule() const { return hour_slot < kFirstScheduledHour || hour_slot > kLastScheduledHour; }

  bool operator==(const GaitRecording&) const = default;
};

struct EmaReport {
  std::string subject_id;
  std::string session_date;
  int hour_slot = 0;
  int drinks = 0;
};

struct EmaTimeline {
  std::string subject_id;
  std::string session_date;
  std::map<int, int> reports;  // hour slot -> standard drinks in the past hour

  int drinks_at(int hour) const {
    auto it = reports.find(hour);
    return it == reports.end() ? 0 : it->second;
  }

  bool operator==(const EmaTimeline&) const = default;
};

struct EbacParams {
  double beta60 = 0.017;       // g/dl cleared per hour
  double drink_divisor = 2.0;  // the "2" in c/2
};

}  // namespace gaitbac
