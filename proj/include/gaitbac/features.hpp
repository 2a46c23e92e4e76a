#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gaitbac/types.hpp"

namespace gaitbac {

inline constexpr std::size_t kFeatureCount = 24;

struct WindowConfig {
  std::size_t window_len = 128;
  std::size_t hop = 64;
  bool energy_includes_dc = true;

  void validate() const;
};

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  double label = 0.0;
  std::string subject_id;
  std::string session_date;
  int hour_slot = 0;
  std::size_t window_index = 0;

  EpisodeKey key() const { return {subject_id, session_date, hour_slot}; }
  bool operator==(const FeatureVector&) const = default;
};

// Canonical order, per sensor (acc then att): mean xyz, std xyz, energy xyz, corr xy xz yz.
const std::array<std::string, kFeatureCount>& feature_names();

double window_mean(std::span<const double> w);
double window_std(std::span<const double> w);  // population (1/n)
double window_corr(std::span<const double> a, std::span<const double> b);  // 0 if either is constant

// Unnormalized forward DFT of a real sequence (any length).
std::vector<std::complex<double>> dft(std::span<const double> w);

// Sum of |X_k|^2 over the unnormalized DFT divided by |w|.
double window_energy(std::span<const double> w, bool include_dc = true);

std::size_t window_count(std::size_t n_samples, const WindowConfig& cfg);

std::vector<FeatureVector> extract(const GaitRecording& rec, double label, const WindowConfig& cfg = {});

void write_features_csv(const std::vector<FeatureVector>& rows, std::ostream& out);
void write_features_csv(const std::vector<FeatureVector>& rows, const std::filesystem::path& path);
std::vector<FeatureVector> read_features_csv(std::istream& in);
std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path);

}  // namespace gaitbac
