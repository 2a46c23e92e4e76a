#include "gaitbac/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaitbac/ebac.hpp"
#include "gaitbac/error.hpp"

namespace gaitbac {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void append_double(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, ptr);
}

}  // namespace

SubjectProfile make_profile(std::string subject_id, double gender_constant, double weight_lb) {
  if (gender_constant != kGenderConstantFemale && gender_constant != kGenderConstantMale) {
    throw Error(Errc::invalid_gender_constant, "gender constant must be 9.0 or 7.5");
  }
  if (!std::isfinite(weight_lb) || weight_lb <= 0.0) {
    throw Error(Errc::schema_violation, "weight must be a positive number of pounds");
  }
  if (subject_id.empty()) throw Error(Errc::schema_violation, "empty subject id");
  return {std::move(subject_id), gender_constant, weight_lb};
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

EpisodeKey parse_recording_filename(std::string_view filename) {
  auto fail = [&] {
    return Error(Errc::malformed_filename,
                 "expected <subject>_<date>_<hour>.csv, got '" + std::string(filename) + "'");
  };
  if (filename.size() < 4 || filename.substr(filename.size() - 4) != ".csv") throw fail();
  std::string_view stem = filename.substr(0, filename.size() - 4);
  const auto hour_sep = stem.rfind('_');
  if (hour_sep == std::string_view::npos) throw fail();
  const auto date_sep = stem.rfind('_', hour_sep == 0 ? 0 : hour_sep - 1);
  if (date_sep == std::string_view::npos || date_sep == 0) throw fail();

  EpisodeKey key;
  key.subject_id = std::string(stem.substr(0, date_sep));
  key.session_date = std::string(stem.substr(date_sep + 1, hour_sep - date_sep - 1));
  if (!is_iso_date(key.session_date) || !parse_int(stem.substr(hour_sep + 1), key.hour_slot)) throw fail();
  return key;
}

std::string recording_filename(const EpisodeKey& key) {
  return key.subject_id + "_" + key.session_date + "_" + std::to_string(key.hour_slot) + ".csv";
}

double validate_recording(const GaitRecording& rec) {
  if (rec.samples.empty()) throw Error(Errc::empty_recording, "recording has no samples");
  std::vector<double> gaps;
  gaps.reserve(rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    bool finite = std::isfinite(s.t);
    for (int a = 0; a < 3; ++a) finite = finite && std::isfinite(s.lin_acc[a]) && std::isfinite(s.attitude[a]);
    if (!finite) throw Error(Errc::malformed_row, "sample " + std::to_string(i) + " is not finite");
    if (i > 0) {
      const double gap = s.t - rec.samples[i - 1].t;
      if (!(gap > 0.0)) {
        throw Error(Errc::non_monotonic_time, "timestamp at sample " + std::to_string(i) + " does not increase");
      }
      gaps.push_back(gap);
    }
  }
  if (rec.duration() > kMaxRecordingSeconds) {
    throw Error(Errc::schema_violation, "recording spans more than 60 s");
  }
  if (gaps.empty()) return 100.0;
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  const double median = *mid;
  if (median < kMinMedianGap || median > kMaxMedianGap) {
    throw Error(Errc::bad_sample_rate, "median sample gap outside [5 ms, 20 ms]");
  }
  return 1.0 / median;
}

GaitRecording parse_sensor_log(std::istream& in, const EpisodeKey& key, std::string_view source) {
  const std::string where(source);
  GaitRecording rec;
  rec.subject_id = key.subject_id;
  rec.session_date = key.session_date;
  rec.hour_slot = key.hour_slot;

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!have_header) {
      if (row != kSensorLogHeader) {
        throw Error(Errc::malformed_row, where + ":" + std::to_string(line_no) + ": expected header '" +
                                             std::string(kSensorLogHeader) + "'");
      }
      have_header = true;
      continue;
    }
    std::array<double, 7> v{};
    std::size_t field = 0;
    std::size_t pos = 0;
    bool ok = true;
    while (ok) {
      const auto comma = row.find(',', pos);
      const auto cell = row.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      ok = field < v.size() && parse_double(cell, v[field]) && std::isfinite(v[field]);
      ++field;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!ok || field != v.size()) {
      throw Error(Errc::malformed_row, where + ":" + std::to_string(line_no) + ": bad row '" + std::string(row) + "'");
    }
    if (!rec.samples.empty() && !(v[0] > rec.samples.back().t)) {
      throw Error(Errc::non_monotonic_time,
                  where + ":" + std::to_string(line_no) + ": timestamp does not increase");
    }
    rec.samples.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
  }
  if (!have_header) throw Error(Errc::malformed_row, where + ": missing header");
  if (rec.samples.empty()) throw Error(Errc::empty_recording, where + ": no samples");
  rec.sample_rate_hz = validate_recording(rec);
  return rec;
}

GaitRecording parse_sensor_log(const fs::path& path) {
  const EpisodeKey key = parse_recording_filename(path.filename().string());
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return parse_sensor_log(in, key, path.string());
}

void write_sensor_log(const GaitRecording& rec, std::ostream& out) {
  std::string buf;
  buf.reserve(rec.samples.size() * 96);
  buf.append(kSensorLogHeader);
  buf.push_back('\n');
  for (const auto& s : rec.samples) {
    append_double(buf, s.t);
    for (double v : s.lin_acc) buf.push_back(','), append_double(buf, v);
    for (double v : s.attitude) buf.push_back(','), append_double(buf, v);
    buf.push_back('\n');
  }
  out << buf;
}

void write_sensor_log(const GaitRecording& rec, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  write_sensor_log(rec, out);
}

std::vector<GaitRecording> load_recordings(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GaitRecording> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(parse_sensor_log(f));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
  return out;
}

const SubjectProfile* EmaData::find_profile(std::string_view subject_id) const {
  auto it = std::lower_bound(profiles.begin(), profiles.end(), subject_id,
                             [](const SubjectProfile& p, std::string_view id) { return p.subject_id < id; });
  return it != profiles.end() && it->subject_id == subject_id ? &*it : nullptr;
}

const EmaTimeline* EmaData::find_timeline(std::string_view subject_id, std::string_view session_date) const {
  auto it = std::lower_bound(timelines.begin(), timelines.end(), std::pair{subject_id, session_date},
                             [](const EmaTimeline& t, const auto& k) {
                               return std::pair<std::string_view, std::string_view>{t.subject_id, t.session_date} < k;
                             });
  return it != timelines.end() && it->subject_id == subject_id && it->session_date == session_date ? &*it : nullptr;
}

namespace {

template <typename T>
T require(const json& obj, const char* field, std::size_t index) {
  if (!obj.contains(field)) {
    throw Error(Errc::schema_violation, "record " + std::to_string(index) + ": missing '" + field + "'");
  }
  try {
    return obj.at(field).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::schema_violation, "record " + std::to_string(index) + ": bad type for '" + field + "'");
  }
}

void sort_ema(EmaData& ema) {
  std::sort(ema.profiles.begin(), ema.profiles.end(),
            [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  std::sort(ema.timelines.begin(), ema.timelines.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject_id, a.session_date) < std::tie(b.subject_id, b.session_date);
  });
}

}  // namespace

EmaData parse_ema(const json& doc) {
  if (!doc.is_array()) throw Error(Errc::schema_violation, "EMA document must be a JSON array");
  EmaData result;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object()) throw Error(Errc::schema_violation, "record " + std::to_string(i) + " is not an object");
    const auto subject = require<std::string>(rec, "subject_id", i);
    const auto gender = require<std::string>(rec, "gender", i);
    const auto weight = require<double>(rec, "weight_lb", i);
    const auto date = require<std::string>(rec, "session_date", i);
    if (!is_iso_date(date)) throw Error(Errc::schema_violation, "record " + std::to_string(i) + ": bad session_date");

    double gc = 0.0;
    if (gender == "female") {
      gc = kGenderConstantFemale;
    } else if (gender == "male") {
      gc = kGenderConstantMale;
    } else {
      throw Error(Errc::invalid_gender_constant, "record " + std::to_string(i) + ": gender '" + gender + "'");
    }

    EmaData one;
    one.profiles.push_back(make_profile(subject, gc, weight));
    EmaTimeline timeline{subject, date, {}};
    if (!rec.contains("reports") || !rec["reports"].is_array()) {
      throw Error(Errc::schema_violation, "record " + std::to_string(i) + ": 'reports' must be an array");
    }
    for (const json& r : rec["reports"]) {
      const auto hour = require<int>(r, "hour", i);
      const auto drinks = require<int>(r, "drinks", i);
      if (drinks < 0 || drinks > kMaxDrinksPerHour) {
        throw Error(Errc::schema_violation,
                    "record " + std::to_string(i) + ": drinks " + std::to_string(drinks) + " outside 0..30");
      }
      if (!timeline.reports.emplace(hour, drinks).second) {
        throw Error(Errc::duplicate_hour_slot,
                    subject + " " + date + ": hour " + std::to_string(hour) + " reported twice");
      }
    }
    one.timelines.push_back(std::move(timeline));
    merge_ema(result, one);
  }
  return result;
}

EmaData parse_ema(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema_violation, path.string() + ": " + e.what());
  }
  return parse_ema(doc);
}

EmaData parse_ema(const std::vector<fs::path>& paths) {
  EmaData all;
  for (const auto& p : paths) merge_ema(all, parse_ema(p));
  return all;
}

void merge_ema(EmaData& into, const EmaData& other) {
  for (const auto& p : other.profiles) {
    if (const auto* existing = into.find_profile(p.subject_id)) {
      if (!(*existing == p)) {
        throw Error(Errc::schema_violation, "conflicting profile data for subject " + p.subject_id);
      }
    } else {
      into.profiles.push_back(p);
      sort_ema(into);
    }
  }
  for (const auto& t : other.timelines) {
    auto it = std::find_if(into.timelines.begin(), into.timelines.end(), [&](const EmaTimeline& x) {
      return x.subject_id == t.subject_id && x.session_date == t.session_date;
    });
    if (it == into.timelines.end()) {
      into.timelines.push_back(t);
      continue;
    }
    for (const auto& [hour, drinks] : t.reports) {
      if (!it->reports.emplace(hour, drinks).second) {
        throw Error(Errc::duplicate_hour_slot,
                    t.subject_id + " " + t.session_date + ": hour " + std::to_string(hour) + " reported twice");
      }
    }
  }
  sort_ema(into);
}

json to_json(const EmaData& ema) {
  json doc = json::array();
  for (const auto& t : ema.timelines) {
    const SubjectProfile* p = ema.find_profile(t.subject_id);
    if (p == nullptr) throw Error(Errc::schema_violation, "timeline without profile: " + t.subject_id);
    json reports = json::array();
    for (const auto& [hour, drinks] : t.reports) reports.push_back({{"hour", hour}, {"drinks", drinks}});
    doc.push_back({{"subject_id", t.subject_id},
                   {"gender", p->gender_constant == kGenderConstantFemale ? "female" : "male"},
                   {"weight_lb", p->weight_lb},
                   {"session_date", t.session_date},
                   {"reports", std::move(reports)}});
  }
  return doc;
}

void write_ema(const EmaData& ema, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << to_json(ema).dump(2) << '\n';
}

AlignResult align(std::vector<GaitRecording> recordings, const EmaData& ema, const EbacParams& params) {
  AlignResult result;
  for (auto& rec : recordings) {
    const EmaTimeline* timeline = ema.find_timeline(rec.subject_id, rec.session_date);
    const SubjectProfile* profile = ema.find_profile(rec.subject_id);
    if (timeline == nullptr || profile == nullptr) {
      ++result.dropped;
      continue;
    }
    if (rec.off_schedule()) ++result.off_schedule;
    const double label = ebac_at_hour(*timeline, *profile, rec.hour_slot, params);
    result.labeled.push_back({std::move(rec), label});
  }
  std::stable_sort(result.labeled.begin(), result.labeled.end(),
                   [](const auto& a, const auto& b) { return a.recording.key() < b.recording.key(); });
  return result;
}

}  // namespace gaitbac
