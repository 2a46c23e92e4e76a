#include "gaitbac/ebac.hpp"

#include <algorithm>
#include <cmath>

#include "gaitbac/error.hpp"

namespace gaitbac {

double ebac_instant(double drinks, const SubjectProfile& profile, double hours, const EbacParams& params) {
  if (!std::isfinite(drinks) || !std::isfinite(hours) || !std::isfinite(profile.weight_lb) ||
      !std::isfinite(profile.gender_constant)) {
    throw Error(Errc::non_finite_input, "ebac_instant received a non-finite argument");
  }
  if (drinks < 0.0 || hours < 0.0) {
    throw Error(Errc::invalid_argument, "drinks and hours must be non-negative");
  }
  if (profile.weight_lb <= 0.0 || params.beta60 <= 0.0 || params.drink_divisor <= 0.0) {
    throw Error(Errc::invalid_argument, "weight, beta60 and drink divisor must be positive");
  }
  const double raw =
      (drinks / params.drink_divisor) * (profile.gender_constant / profile.weight_lb) - params.beta60 * hours;
  return std::max(0.0, raw);
}

EbacTrace ebac_timeline(const EmaTimeline& timeline, const SubjectProfile& profile, const EbacParams& params) {
  int first = kFirstScheduledHour;
  int last = kLastScheduledHour;
  if (!timeline.reports.empty()) {
    first = std::min(first, timeline.reports.begin()->first);
    last = std::max(last, timeline.reports.rbegin()->first);
  }

  EbacTrace trace;
  std::vector<int> drink_hours;
  for (int hour = first; hour <= last; ++hour) {
    const int drinks = timeline.drinks_at(hour);
    if (drinks > 0) {
      drink_hours.push_back(hour);
      if (!trace.drinking_start) trace.drinking_start = hour;
    }

    // Best start over every hour that reported drinks: a residue that has
    // cleared (or nearly cleared) gives way to a fresh episode.
    double value = 0.0;
    int start = 0;
    for (auto it = drink_hours.rbegin(); it != drink_hours.rend(); ++it) {
      int cumulative = 0;
      for (int h = *it; h <= hour; ++h) cumulative += timeline.drinks_at(h);
      const double v = ebac_instant(cumulative, profile, hour - *it, params);
      if (v > 0.0 && v >= value) {
        value = v;
        start = *it;
      }
    }
    if (value > 0.0 && (trace.episode_starts.empty() || trace.episode_starts.back() != start)) {
      trace.episode_starts.push_back(start);
    }
    trace.values[hour] = value;
  }
  return trace;
}

double ebac_at_hour(const EmaTimeline& timeline, const SubjectProfile& profile, int hour, const EbacParams& params) {
  EmaTimeline extended = timeline;
  // Extend the walk so an off-schedule hour is covered by the recurrence.
  if (hour < kFirstScheduledHour || hour > kLastScheduledHour) extended.reports.try_emplace(hour, 0);
  const auto trace = ebac_timeline(extended, profile, params);
  auto it = trace.values.find(hour);
  return it == trace.values.end() ? 0.0 : it->second;
}

}  // namespace gaitbac
