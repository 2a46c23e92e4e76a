#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gaitbac/types.hpp"

namespace gaitbac {

// Matthews-Miller estimate: max(0, (c / divisor) * (GC / weight) - beta60 * t).
// `drinks` is the cumulative count since drinking started, `hours` the time since then.
double ebac_instant(double drinks, const SubjectProfile& profile, double hours, const EbacParams& params = {});

struct EbacTrace {
  std::map<int, double> values;      // hour slot -> eBAC (g/dl)
  std::optional<int> drinking_start; // first hour with a nonzero report
  std::vector<int> episode_starts;   // every (re)start, including the first
};

// Hourly trace over min(20, first report)..max(24, last report). Missing hours
// count as zero drinks. The value at an hour is the largest ebac_instant over
// every reporting hour s <= hour, fed the drinks from s through the hour and
// t = hour - s. Within one episode that is the cumulative count from the first
// drink; once the clamped value has returned to zero, new drinks start a fresh
// episode. The trace never decreases when a drink is added.
EbacTrace ebac_timeline(const EmaTimeline& timeline, const SubjectProfile& profile, const EbacParams& params = {});

// Value of the trace at one hour; hours before any drinking give 0.
double ebac_at_hour(const EmaTimeline& timeline, const SubjectProfile& profile, int hour,
                    const EbacParams& params = {});

}  // namespace gaitbac
