#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitbac/features.hpp"
#include "gaitbac/types.hpp"
#include "json.hpp"

namespace gaitbac {

// v' = scale * v + offset. Degenerate inputs (constant columns) use scale 0.
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;
  bool degenerate = false;

  double apply(double v) const { return scale * v + offset; }
  double invert(double v) const { return (v - offset) / scale; }
  bool operator==(const AffineMap&) const = default;
};

struct Scaling {
  std::vector<AffineMap> input;
  AffineMap output;

  static Scaling identity(std::size_t n_in);
  std::size_t n_in() const { return input.size(); }
  bool operator==(const Scaling&) const = default;
};

struct Dataset {
  Eigen::MatrixXd inputs;            // n x d
  Eigen::VectorXd targets;           // n
  std::vector<EpisodeKey> groups;    // per row; empty when unknown

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

Dataset make_dataset(const std::vector<FeatureVector>& rows);

// Min-max to [-1, 1] per input column and for the target.
Scaling fit_scaling(const Dataset& data);
Dataset apply_scaling(const Dataset& data, const Scaling& scaling);

struct TrainingMetadata {
  std::string algorithm;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;

  bool operator==(const TrainingMetadata&) const = default;
};

// n_in - H - 1 network: logistic hidden layer, linear output.
//
// Flattened parameter order (used by the Jacobian, the trainers and the JSON
// file): hidden_weights row-major (unit j, then input i), hidden_bias,
// output_weights, output_bias. N = H*n_in + 2H + 1.
struct MlpModel {
  std::size_t n_in = kFeatureCount;
  std::size_t n_hidden = 0;
  Eigen::MatrixXd hidden_weights;  // H x n_in
  Eigen::VectorXd hidden_bias;     // H
  Eigen::VectorXd output_weights;  // H
  double output_bias = 0.0;
  Scaling scaling;
  TrainingMetadata metadata;

  std::size_t parameter_count() const { return n_hidden * n_in + 2 * n_hidden + 1; }
  bool operator==(const MlpModel& other) const;
};

// All-zero network with identity scaling.
MlpModel zero_model(std::size_t n_in, std::size_t n_hidden);

// Weights and biases uniform in +-0.5/sqrt(fan_in).
MlpModel init_model(std::size_t n_in, std::size_t n_hidden, std::uint64_t seed, Scaling scaling);

Eigen::VectorXd flatten(const MlpModel& model);
void unflatten(MlpModel& model, const Eigen::VectorXd& params);

double sigmoid(double gamma);

// Prediction in target units: scale input, evaluate, invert output scaling.
double forward(const MlpModel& model, std::span<const double> x);
Eigen::VectorXd predict(const MlpModel& model, const Eigen::MatrixXd& inputs);

// Network evaluation on already-scaled inputs (no scaling applied).
Eigen::VectorXd network_outputs(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs);

// Jacobian of e_k = t_k - yhat_k with respect to the flattened parameters, on
// scaled inputs. Target values do not enter.
Eigen::MatrixXd jacobian_scaled(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs);

// Same, applying the model's input scaling to data.inputs first.
Eigen::MatrixXd jacobian(const MlpModel& model, const Dataset& data);

// Gradient of sum_k e_k^2 on scaled data by backpropagation.
Eigen::VectorXd sse_gradient(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs,
                             const Eigen::VectorXd& scaled_targets);

nlohmann::json to_json(const Scaling& scaling);
Scaling scaling_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace gaitbac
