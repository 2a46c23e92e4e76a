#include "gaitbac/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fftw3.h>

#include "gaitbac/error.hpp"

namespace gaitbac {

void WindowConfig::validate() const {
  if (window_len < 2) throw Error(Errc::invalid_argument, "window_len must be >= 2");
  if (hop < 1 || hop > window_len) throw Error(Errc::invalid_argument, "hop must be in [1, window_len]");
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const auto names = [] {
    std::array<std::string, kFeatureCount> n;
    std::size_t i = 0;
    for (const char* sensor : {"acc", "att"}) {
      for (const char* stat : {"mean", "std", "energy"}) {
        for (const char* axis : {"x", "y", "z"}) n[i++] = std::string(sensor) + "_" + stat + "_" + axis;
      }
      for (const char* pair : {"xy", "xz", "yz"}) n[i++] = std::string(sensor) + "_corr_" + pair;
    }
    return n;
  }();
  return names;
}

double window_mean(std::span<const double> w) {
  if (w.empty()) throw Error(Errc::invalid_argument, "empty window");
  double sum = 0.0;
  for (double v : w) sum += v;
  return sum / static_cast<double>(w.size());
}

double window_std(std::span<const double> w) {
  const double mean = window_mean(w);
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(w.size()));
}

double window_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "correlation windows differ in length");
  const double ma = window_mean(a);
  const double mb = window_mean(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<std::complex<double>> dft(std::span<const double> w) {
  struct Plan {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
  };
  static std::mutex mutex;
  static std::map<std::size_t, Plan> plans;

  const std::size_t n = w.size();
  if (n == 0) return {};
  std::lock_guard lock(mutex);
  auto& p = plans[n];
  if (!p.plan) {
    p.in = fftw_alloc_complex(n);
    p.out = fftw_alloc_complex(n);
    p.plan = fftw_plan_dft_1d(static_cast<int>(n), p.in, p.out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    p.in[i][0] = w[i];
    p.in[i][1] = 0.0;
  }
  fftw_execute(p.plan);
  std::vector<std::complex<double>> spectrum(n);
  for (std::size_t k = 0; k < n; ++k) spectrum[k] = {p.out[k][0], p.out[k][1]};
  return spectrum;
}

double window_energy(std::span<const double> w, bool include_dc) {
  const std::size_t n = w.size();
  if (n < 2) throw Error(Errc::invalid_argument, "energy needs at least 2 samples");
  const auto spectrum = dft(w);
  double sum = 0.0;
  for (std::size_t k = include_dc ? 0 : 1; k < n; ++k) sum += std::norm(spectrum[k]);
  return sum / static_cast<double>(n);
}

std::size_t window_count(std::size_t n_samples, const WindowConfig& cfg) {
  if (n_samples < cfg.window_len) return 0;
  return (n_samples - cfg.window_len) / cfg.hop + 1;
}

std::vector<FeatureVector> extract(const GaitRecording& rec, double label, const WindowConfig& cfg) {
  cfg.validate();
  if (rec.samples.size() < cfg.window_len) {
    throw Error(Errc::too_short, std::to_string(rec.samples.size()) + " samples, window needs " +
                                     std::to_string(cfg.window_len));
  }
  if (!std::isfinite(label) || label < 0.0) throw Error(Errc::invalid_argument, "label must be finite and >= 0");

  // channels[0..2] linear acceleration, [3..5] attitude
  std::array<std::vector<double>, 6> channels;
  for (auto& c : channels) c.reserve(rec.samples.size());
  for (const auto& s : rec.samples) {
    for (int a = 0; a < 3; ++a) {
      channels[a].push_back(s.lin_acc[a]);
      channels[3 + a].push_back(s.attitude[a]);
    }
  }

  const std::size_t count = window_count(rec.samples.size(), cfg);
  std::vector<FeatureVector> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    FeatureVector fv;
    fv.label = label;
    fv.subject_id = rec.subject_id;
    fv.session_date = rec.session_date;
    fv.hour_slot = rec.hour_slot;
    fv.window_index = w;
    std::size_t i = 0;
    for (int sensor = 0; sensor < 2; ++sensor) {
      std::array<std::span<const double>, 3> axis;
      for (int a = 0; a < 3; ++a) axis[a] = std::span(channels[3 * sensor + a]).subspan(w * cfg.hop, cfg.window_len);
      for (int a = 0; a < 3; ++a) fv.values[i++] = window_mean(axis[a]);
      for (int a = 0; a < 3; ++a) fv.values[i++] = window_std(axis[a]);
      for (int a = 0; a < 3; ++a) fv.values[i++] = window_energy(axis[a], cfg.energy_includes_dc);
      fv.values[i++] = window_corr(axis[0], axis[1]);
      fv.values[i++] = window_corr(axis[0], axis[2]);
      fv.values[i++] = window_corr(axis[1], axis[2]);
    }
    out.push_back(std::move(fv));
  }
  return out;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, ptr);
}

std::vector<std::string_view> split_csv(std::string_view row) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = row.find(',', pos);
    cells.push_back(row.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string features_header() {
  std::string h = "subject_id,session_date,hour,window_index";
  for (const auto& n : feature_names()) h += "," + n;
  h += ",label";
  return h;
}

}  // namespace

void write_features_csv(const std::vector<FeatureVector>& rows, std::ostream& out) {
  std::string buf = features_header() + "\n";
  for (const auto& fv : rows) {
    buf += fv.subject_id + "," + fv.session_date + "," + std::to_string(fv.hour_slot) + "," +
           std::to_string(fv.window_index);
    for (double v : fv.values) buf.push_back(','), append_double(buf, v);
    buf.push_back(',');
    append_double(buf, fv.label);
    buf.push_back('\n');
  }
  out << buf;
}

void write_features_csv(const std::vector<FeatureVector>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  write_features_csv(rows, out);
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::malformed_row, "features file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != features_header()) throw Error(Errc::malformed_row, "unexpected features header");

  std::vector<FeatureVector> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    auto fail = [&] { return Error(Errc::malformed_row, "features line " + std::to_string(line_no)); };
    if (cells.size() != 4 + kFeatureCount + 1) throw fail();
    FeatureVector fv;
    fv.subject_id = std::string(cells[0]);
    fv.session_date = std::string(cells[1]);
    if (!parse_number(cells[2], fv.hour_slot) || !parse_number(cells[3], fv.window_index)) throw fail();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!parse_number(cells[4 + i], fv.values[i]) || !std::isfinite(fv.values[i])) throw fail();
    }
    if (!parse_number(cells.back(), fv.label) || !std::isfinite(fv.label) || fv.label < 0.0) throw fail();
    rows.push_back(std::move(fv));
  }
  return rows;
}

std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return read_features_csv(in);
}

}  // namespace gaitbac
