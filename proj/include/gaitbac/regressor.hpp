#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "gaitbac/baselines.hpp"
#include "gaitbac/mlp.hpp"
#include "json.hpp"

namespace gaitbac {

using Regressor = std::variant<MlpModel, LinRegModel, SvrModel>;

// "cg" / "lm" / "br" for MLPs (from training metadata), "linreg", "svr".
std::string algorithm_tag(const Regressor& model);

double predict(const Regressor& model, std::span<const double> x);
Eigen::VectorXd predict(const Regressor& model, const Eigen::MatrixXd& inputs);

// {"format": "gaitbac-model", "version": 1, "algorithm": ..., "model": {...}}
nlohmann::json to_json(const Regressor& model);
Regressor regressor_from_json(const nlohmann::json& j);

void save_model(const Regressor& model, const std::filesystem::path& path);
Regressor load_model(const std::filesystem::path& path);

}  // namespace gaitbac
