#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gaitbac/mlp.hpp"
#include "json.hpp"

namespace gaitbac {

enum class Algorithm { cg, lm, br, linreg, svr };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
inline bool is_mlp(Algorithm a) { return a == Algorithm::cg || a == Algorithm::lm || a == Algorithm::br; }

struct LmConfig {
  double lambda0 = 10.0;
  double lambda_up = 10.0;    // multiplier on a rejected step
  double lambda_down = 10.0;  // divisor on an accepted step
  double lambda_max = 1e10;
  int max_iters = 1000;
  double min_grad = 1e-10;
  double min_step = 1e-12;

  void validate() const;
};

// Outer evidence loop of the Bayesian-regularized trainer. LmConfig::max_iters
// caps the total number of LM iterations across all outer passes.
struct BrConfig {
  int max_outer = 50;
  double rel_tol = 1e-3;
  int inner_iters = 10;  // LM iterations per outer pass
};

struct CgConfig {
  int max_iters = 1000;
  double tol = 1e-8;           // gradient 2-norm
  double armijo_c = 1e-4;
  std::vector<bool> trainable; // empty: every parameter; otherwise one flag per parameter
};

struct TrainerConfig {
  LmConfig lm;
  BrConfig br;
  CgConfig cg;
};

struct BrState {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  double e_d = 0.0;        // sum of squared errors, scaled target units
  double e_w = 0.0;        // sum of squared parameters
  double objective = 0.0;  // beta * e_d + alpha * e_w
  std::size_t n_params = 0;
  int outer_iterations = 0;
};

struct TraceEntry {
  double mse = 0.0;  // scaled target units
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
};

struct TrainReport {
  std::string algorithm;
  int iterations = 0;
  double final_mse = 0.0;  // training MSE, scaled target units
  std::vector<TraceEntry> trace;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string stop_reason;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TrainReport& report, bool include_wall_time = true);
nlohmann::json to_json(const BrState& state);

struct TrainResult {
  MlpModel model;
  TrainReport report;
  std::optional<BrState> br;
};

// Solves (jtj + damping I) h = rhs by Cholesky; nullopt if not positive definite.
std::optional<Eigen::VectorXd> lm_step(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& rhs, double damping);

// The model's own scaling is applied to `data`; weights update as w <- w - h.
TrainResult train_lm(MlpModel model, const Dataset& data, const LmConfig& cfg = {});
TrainResult train_br(MlpModel model, const Dataset& data, const LmConfig& cfg = {}, const BrConfig& br = {});
TrainResult train_cg(MlpModel model, const Dataset& data, const CgConfig& cfg = {});

TrainResult train_mlp(Algorithm algo, MlpModel model, const Dataset& data, const TrainerConfig& cfg);

enum class SplitMode { random_window, by_episode };
SplitMode parse_split_mode(std::string_view s);
std::string_view to_string(SplitMode m);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

SplitIndices split_indices(const Dataset& data, double train_frac, SplitMode mode, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, double train_frac, SplitMode mode, std::uint64_t seed);

struct SweepRow {
  std::size_t hidden = 0;
  double cv_mse = 0.0;
  std::vector<double> fold_mse;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by hidden size
  std::size_t selected_hidden = 0;
};

struct SweepOptions {
  TrainerConfig trainer;
  std::size_t threads = 1;
};

// k-fold cross-validated MSE (target units) per hidden size. Scaling is refit on
// each training fold. Trials may run concurrently; results do not depend on the
// thread count.
SweepResult sweep_hidden(const Dataset& data, std::vector<std::size_t> candidates, std::size_t folds,
                         Algorithm trainer, std::uint64_t seed, const SweepOptions& options = {});

}  // namespace gaitbac
