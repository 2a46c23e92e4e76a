#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaitbac/mlp.hpp"
#include "gaitbac/regressor.hpp"
#include "json.hpp"

namespace gaitbac {

struct MetricsReport {
  std::size_t n = 0;
  double mse = 0.0;
  double r = 0.0;  // Pearson(pred, target); 0 when either side is constant
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> rae_percent;   // absent when the target is constant
  std::optional<double> rrse_percent;
  bool zero_variance_target = false;
};

MetricsReport metrics(std::span<const double> pred, std::span<const double> target);
MetricsReport metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

struct ErrorHistogram {
  std::vector<double> edges;                              // bins + 1, shared by all splits
  std::map<std::string, std::vector<std::size_t>> counts; // split tag -> count per bin

  std::size_t total() const;
};

// Equal-width bins over the pooled [min, max]; bins are right-open except the last.
ErrorHistogram histogram(const std::vector<std::pair<std::string, std::vector<double>>>& errors_by_split,
                         std::size_t bins = 20);
ErrorHistogram histogram(std::span<const double> errors, std::size_t bins = 20);

// Least-squares line prediction = slope * target + intercept.
struct BestFit {
  double slope = 0.0;
  double intercept = 0.0;
};
BestFit best_fit(std::span<const double> target, std::span<const double> pred);

struct ScatterRow {
  double target = 0.0;
  double prediction = 0.0;
  std::string split;
};

struct Evaluation {
  std::map<std::string, MetricsReport> metrics;  // per split plus "all"
  std::map<std::string, BestFit> fits;
  ErrorHistogram histogram;                      // errors = target - prediction
  std::vector<ScatterRow> scatter;
};

Evaluation evaluate_splits(const Regressor& model, const std::vector<std::pair<std::string, const Dataset*>>& splits);
Evaluation evaluate(const Regressor& model, const Dataset& train, const Dataset& test);

nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const Evaluation& e);
void write_scatter_csv(const Evaluation& e, const std::filesystem::path& path);
void write_histogram_csv(const ErrorHistogram& h, const std::filesystem::path& path);

struct TableRow {
  std::string name;
  MetricsReport metrics;
};

// Two-column comparison: algorithm, MSE, R.
std::string format_mse_r_table(const std::string& title, const std::vector<TableRow>& rows);
// Correlation, MAE, RMSE, RAE %, RRSE % per method.
std::string format_five_metric_table(const std::string& title, const std::vector<TableRow>& rows);

}  // namespace gaitbac
