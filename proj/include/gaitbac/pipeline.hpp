#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaitbac/baselines.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/eval.hpp"
#include "gaitbac/features.hpp"
#include "gaitbac/synth.hpp"
#include "gaitbac/train.hpp"
#include "json.hpp"

namespace gaitbac {

// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause) : Error(cause), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// 2 for usage and configuration problems, 1 for everything else.
int exit_code_for(Errc code);

nlohmann::json error_json(const std::string& stage, const Error& e);
void write_error_json(const std::filesystem::path& dir, const std::string& stage, const Error& e);

std::string sha256_hex(const std::filesystem::path& file);
// Every regular file under dir except manifest.json and timing.json, by relative path.
nlohmann::json build_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

nlohmann::json to_json(const TrainerConfig& cfg);
TrainerConfig trainer_config_from_json(const nlohmann::json& j, TrainerConfig base = {});
nlohmann::json to_json(const SvrParams& p);
SvrParams svr_params_from_json(const nlohmann::json& j, SvrParams base = {});
nlohmann::json to_json(const WindowConfig& w);
WindowConfig window_config_from_json(const nlohmann::json& j, WindowConfig base = {});

struct ReproduceConfig {
  std::uint64_t seed = 20171006;
  SynthConfig synth;
  WindowConfig window;
  std::size_t hidden = 45;
  double train_frac = 0.7;
  SplitMode split = SplitMode::random_window;
  double independent_frac = 0.15;  // share of episodes held out before the split
  TrainerConfig trainer;
  double ridge = 1e-8;
  SvrParams svr;
  std::optional<std::filesystem::path> features_path;  // skip synth and ingest
  unsigned threads = 1;

  ReproduceConfig();
  void validate() const;
};

nlohmann::json to_json(const ReproduceConfig& c);
ReproduceConfig reproduce_config_from_json(const nlohmann::json& j);

struct AlgorithmResult {
  Algorithm algorithm;
  Evaluation evaluation;  // splits "train", "test", "independent" (when non-empty), "all"
};

struct ReproduceSummary {
  std::vector<AlgorithmResult> results;
  std::string tables;
  std::map<std::string, double> stage_seconds;
};

// synth -> ingest -> features -> split -> train (cg, lm, br, linreg, svr) -> evaluate.
// Failures surface as StageError.
ReproduceSummary reproduce(const ReproduceConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace gaitbac
