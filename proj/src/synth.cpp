#include "gaitbac/synth.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include "gaitbac/ebac.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/seed.hpp"

namespace gaitbac {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kSubjectStream = 1, kSessionStream = 2, kRecordingStream = 3 };

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_argument, "synth config: " + what);
}

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
  std::normal_distribution<double> dist(mean, sd);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(mean, lo, hi);
}

double peak(const EmaTimeline& tl, const SubjectProfile& p) {
  const auto trace = ebac_timeline(tl, p);
  double m = 0.0;
  for (const auto& [h, v] : trace.values) m = std::max(m, v);
  return m;
}

}  // namespace

void SynthConfig::validate() const {
  require(n_subjects >= 1, "n_subjects must be >= 1");
  require(sessions_per_subject >= 1, "sessions_per_subject must be >= 1");
  require(std::isfinite(step_freq_hz) && step_freq_hz > 0.0, "step_freq_hz must be positive");
  require(std::isfinite(base_noise_sd) && base_noise_sd >= 0.0, "base_noise_sd must be >= 0");
  require(std::isfinite(bac_effect.jitter_sd) && bac_effect.jitter_sd >= 0.0, "jitter_sd must be >= 0");
  require(std::isfinite(bac_effect.sway_amp) && bac_effect.sway_amp >= 0.0, "sway_amp must be >= 0");
  require(std::isfinite(bac_effect.wobble_amp) && bac_effect.wobble_amp >= 0.0, "wobble_amp must be >= 0");
  require(sample_rate_hz >= 50.0 && sample_rate_hz <= 200.0, "sample_rate_hz must be in [50, 200]");
  require(duration_s > 0.0 && duration_s <= kMaxRecordingSeconds, "duration_s must be in (0, 60]");
  require(recording_completion >= 0.0 && recording_completion <= 1.0, "recording_completion must be in [0, 1]");
  require(drinking_probability >= 0.0 && drinking_probability <= 1.0, "drinking_probability must be in [0, 1]");
  require(mean_drinks >= 0.0 && sd_drinks >= 0.0, "drink distribution must be non-negative");
  require(max_drinks >= 1 && max_drinks <= kMaxDrinksPerHour, "max_drinks out of range");
  require(peak_cap > 0.0, "peak_cap must be positive");
  require(weight_mean_lb > 0.0 && weight_sd_lb >= 0.0, "weight distribution invalid");
  require(is_iso_date(start_date), "start_date must be YYYY-MM-DD");
}

json to_json(const SynthConfig& c) {
  return {{"n_subjects", c.n_subjects},
          {"sessions_per_subject", c.sessions_per_subject},
          {"seed", c.seed},
          {"step_freq_hz", c.step_freq_hz},
          {"base_noise_sd", c.base_noise_sd},
          {"bac_effect",
           {{"jitter_sd", c.bac_effect.jitter_sd},
            {"sway_amp", c.bac_effect.sway_amp},
            {"wobble_amp", c.bac_effect.wobble_amp}}},
          {"sample_rate_hz", c.sample_rate_hz},
          {"duration_s", c.duration_s},
          {"recording_completion", c.recording_completion},
          {"drinking_probability", c.drinking_probability},
          {"mean_drinks", c.mean_drinks},
          {"sd_drinks", c.sd_drinks},
          {"max_drinks", c.max_drinks},
          {"peak_cap", c.peak_cap},
          {"weight_mean_lb", c.weight_mean_lb},
          {"weight_sd_lb", c.weight_sd_lb},
          {"zero_drinking", c.zero_drinking},
          {"start_date", c.start_date}};
}

SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::schema_violation, "synth config must be an object");
  SynthConfig c;
  const json defaults = to_json(c);
  for (const auto& [k, v] : j.items()) {
    if (!defaults.contains(k)) throw Error(Errc::schema_violation, "unknown synth config key '" + k + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("n_subjects", c.n_subjects);
    get("sessions_per_subject", c.sessions_per_subject);
    get("seed", c.seed);
    get("step_freq_hz", c.step_freq_hz);
    get("base_noise_sd", c.base_noise_sd);
    if (j.contains("bac_effect")) {
      const auto& b = j.at("bac_effect");
      for (const auto& [k, v] : b.items()) {
        if (!defaults["bac_effect"].contains(k)) throw Error(Errc::schema_violation, "unknown bac_effect key '" + k + "'");
      }
      if (b.contains("jitter_sd")) c.bac_effect.jitter_sd = b.at("jitter_sd").get<double>();
      if (b.contains("sway_amp")) c.bac_effect.sway_amp = b.at("sway_amp").get<double>();
      if (b.contains("wobble_amp")) c.bac_effect.wobble_amp = b.at("wobble_amp").get<double>();
    }
    get("sample_rate_hz", c.sample_rate_hz);
    get("duration_s", c.duration_s);
    get("recording_completion", c.recording_completion);
    get("drinking_probability", c.drinking_probability);
    get("mean_drinks", c.mean_drinks);
    get("sd_drinks", c.sd_drinks);
    get("max_drinks", c.max_drinks);
    get("peak_cap", c.peak_cap);
    get("weight_mean_lb", c.weight_mean_lb);
    get("weight_sd_lb", c.weight_sd_lb);
    get("zero_drinking", c.zero_drinking);
    get("start_date", c.start_date);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string subject_name(int subject) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", subject + 1);
  return buf;
}

std::string session_date(const SynthConfig& cfg, int session) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  std::sscanf(cfg.start_date.c_str(), "%d-%u-%u", &y, &m, &d);
  const sys_days start{year{y} / month{m} / day{d}};
  const year_month_day ymd{start + days{7 * (session / 2) + session % 2}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

SubjectProfile gen_subject(const SynthConfig& cfg, int subject) {
  std::mt19937_64 rng(derive_seed(cfg.seed, {kSubjectStream, static_cast<std::uint64_t>(subject)}));
  const double gc = std::bernoulli_distribution(0.5)(rng) ? kGenderConstantFemale : kGenderConstantMale;
  const double lo = std::max(90.0, cfg.weight_mean_lb - 3.0 * cfg.weight_sd_lb);
  const double hi = cfg.weight_mean_lb + 3.0 * cfg.weight_sd_lb;
  const double w = truncated_normal(rng, cfg.weight_mean_lb, cfg.weight_sd_lb, lo, hi);
  return make_profile(subject_name(subject), gc, std::round(w * 10.0) / 10.0);
}

EmaTimeline gen_timeline(const SynthConfig& cfg, const SubjectProfile& profile, int subject, int session) {
  std::mt19937_64 rng(derive_seed(
      cfg.seed, {kSessionStream, static_cast<std::uint64_t>(subject), static_cast<std::uint64_t>(session)}));
  EmaTimeline tl;
  tl.subject_id = profile.subject_id;
  tl.session_date = session_date(cfg, session);
  for (int h = kFirstScheduledHour; h <= kLastScheduledHour; ++h) tl.reports[h] = 0;

  const bool drinks_tonight = std::bernoulli_distribution(cfg.drinking_probability)(rng);
  const double total_draw = truncated_normal(rng, cfg.mean_drinks, cfg.sd_drinks, 0.5, cfg.max_drinks + 0.49);
  const int start = std::uniform_int_distribution<int>(kFirstScheduledHour, kFirstScheduledHour + 2)(rng);
  const int span = std::min(3, kLastScheduledHour - start + 1);
  std::uniform_int_distribution<int> hour_pick(start, start + span - 1);
  std::vector<int> hours(static_cast<std::size_t>(cfg.max_drinks));
  for (auto& h : hours) h = hour_pick(rng);
  if (cfg.zero_drinking || !drinks_tonight) return tl;

  const int total = std::clamp(static_cast<int>(std::lround(total_draw)), 1, cfg.max_drinks);
  for (int i = 0; i < total; ++i) tl.reports[hours[static_cast<std::size_t>(i)]]++;
  while (peak(tl, profile) > cfg.peak_cap) {
    auto it = std::find_if(tl.reports.rbegin(), tl.reports.rend(), [](const auto& kv) { return kv.second > 0; });
    if (it == tl.reports.rend()) break;
    it->second--;
  }
  return tl;
}

std::uint64_t recording_stream(const SynthConfig& cfg, int subject, int session, int hour) {
  return derive_seed(cfg.seed, {kRecordingStream, static_cast<std::uint64_t>(subject),
                                static_cast<std::uint64_t>(session), static_cast<std::uint64_t>(hour)});
}

GaitRecording gen_recording(const SubjectProfile& profile, const EpisodeKey& key, double ebac, const SynthConfig& cfg,
                            std::uint64_t stream) {
  if (!(ebac >= 0.0) || !std::isfinite(ebac)) throw Error(Errc::invalid_argument, "gen_recording needs ebac >= 0");
  cfg.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(stream);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, two_pi);

  const double period = 1.0 / cfg.step_freq_hz;
  const double jitter = cfg.bac_effect.jitter_sd * ebac;
  const double sway = cfg.bac_effect.sway_amp * ebac;
  const double wobble = cfg.bac_effect.wobble_amp * ebac;
  const double sway_phase = phase(rng);
  const double wobble_phase = phase(rng);
  const double pitch_phase = phase(rng);

  std::vector<double> steps;
  for (double t = -period * std::uniform_real_distribution<double>(0.0, 1.0)(rng); t < cfg.duration_s + period;) {
    steps.push_back(t);
    t += period * std::max(0.2, 1.0 + jitter * unit(rng));
  }

  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz));
  GaitRecording rec;
  rec.subject_id = profile.subject_id.empty() ? key.subject_id : profile.subject_id;
  rec.session_date = key.session_date;
  rec.hour_slot = key.hour_slot;
  rec.sample_rate_hz = cfg.sample_rate_hz;
  rec.samples.resize(n);

  const double att_noise = 0.1 * cfg.base_noise_sd;
  std::size_t first_step = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.sample_rate_hz;
    while (first_step < steps.size() && steps[first_step] < t - 0.5) ++first_step;
    double vertical = 0.0;
    double forward = 0.0;
    for (std::size_t k = first_step; k < steps.size() && steps[k] < t + 0.5; ++k) {
      const double u = (t - steps[k]) / 0.06;
      const double g = std::exp(-0.5 * u * u);
      vertical += 3.0 * g;
      forward -= 1.2 * u * g;
    }
    auto& s = rec.samples[i];
    s.t = t;
    s.lin_acc[0] = sway * std::sin(two_pi * 0.5 * cfg.step_freq_hz * t + sway_phase) + cfg.base_noise_sd * unit(rng);
    s.lin_acc[1] = forward + cfg.base_noise_sd * unit(rng);
    s.lin_acc[2] = vertical + cfg.base_noise_sd * unit(rng);
    s.attitude[0] = wobble * std::sin(two_pi * 1.1 * t + wobble_phase) + att_noise * unit(rng);
    s.attitude[1] = 0.05 * std::sin(two_pi * cfg.step_freq_hz * t + pitch_phase) + att_noise * unit(rng);
    s.attitude[2] = 0.5 * wobble * std::cos(two_pi * 0.55 * t + wobble_phase) + att_noise * unit(rng);
  }
  return rec;
}

SynthData generate(const SynthConfig& cfg, unsigned threads) {
  cfg.validate();
  SynthData out;
  struct Job {
    SubjectProfile profile;
    EpisodeKey key;
    double ebac;
    std::uint64_t stream;
  };
  std::vector<Job> jobs;

  for (int s = 0; s < cfg.n_subjects; ++s) {
    const auto profile = gen_subject(cfg, s);
    out.ema.profiles.push_back(profile);
    for (int k = 0; k < cfg.sessions_per_subject; ++k) {
      auto tl = gen_timeline(cfg, profile, s, k);
      const auto trace = ebac_timeline(tl, profile);
      std::mt19937_64 pick(derive_seed(cfg.seed, {kRecordingStream, static_cast<std::uint64_t>(s),
                                                  static_cast<std::uint64_t>(k), 0xC0FFEEULL}));
      std::bernoulli_distribution done(cfg.recording_completion);
      for (int h = kFirstScheduledHour; h <= kLastScheduledHour; ++h) {
        if (!done(pick)) continue;
        jobs.push_back({profile, {profile.subject_id, tl.session_date, h}, trace.values.at(h),
                        recording_stream(cfg, s, k, h)});
      }
      out.ema.timelines.push_back(std::move(tl));
    }
  }
  std::sort(out.ema.profiles.begin(), out.ema.profiles.end(),
            [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
  std::sort(out.ema.timelines.begin(), out.ema.timelines.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject_id, a.session_date) < std::tie(b.subject_id, b.session_date);
  });
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.key < b.key; });

  out.recordings.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      out.recordings[i] = gen_recording(jobs[i].profile, jobs[i].key, jobs[i].ebac, cfg, jobs[i].stream);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& j : jobs) {
    out.truth.rows.push_back({j.key, j.ebac, cfg.bac_effect.jitter_sd * j.ebac, cfg.bac_effect.sway_amp * j.ebac,
                              cfg.bac_effect.wobble_amp * j.ebac, j.stream});
  }
  return out;
}

void write_truth_csv(const SynthTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  out << "recording_id,subject_id,session_date,hour,ebac,jitter_sd,sway_amp,wobble_amp,stream\n";
  for (const auto& r : truth.rows) {
    auto id = recording_filename(r.key);
    id.resize(id.size() - 4);
    out << id << ',' << r.key.subject_id << ',' << r.key.session_date << ',' << r.key.hour_slot << ',' << num(r.ebac)
        << ',' << num(r.jitter_sd) << ',' << num(r.sway_amp) << ',' << num(r.wobble_amp) << ',' << r.stream << '\n';
  }
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "recordings", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + (dir / "recordings").string() + ": " + ec.message());
  for (const auto& rec : data.recordings) write_sensor_log(rec, dir / "recordings" / recording_filename(rec.key()));
  write_ema(data.ema, dir / "ema.json");
  write_truth_csv(data.truth, dir / "truth.csv");
}

}  // namespace gaitbac
