#pragma once

#include <Eigen/Dense>
#include <span>
#include <string_view>

#include "gaitbac/mlp.hpp"
#include "json.hpp"

namespace gaitbac {

// Baselines fit on scaling-transformed data (identity by default) and predict in
// target units, so they can share the MLP's preprocessing.

struct LinRegModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double ridge = 1e-8;
  Scaling scaling;
  Eigen::VectorXd fit_residuals;  // target - prediction on the fitting data; not serialized
};

LinRegModel fit_linreg(const Dataset& data, double ridge = 1e-8, const Scaling* scaling = nullptr);

enum class KernelType { linear, rbf };

struct SvrParams {
  KernelType kernel = KernelType::rbf;
  double gamma = 1.0 / 24.0;
  double c = 1.0;
  double epsilon = 1e-3;
  double tol = 1e-3;       // maximal KKT violation at exit
  long max_iter = 0;       // 0: 10 * n pair updates, at least 100000
  double cache_mb = 256.0;
};

struct SvrDiagnostics {
  Eigen::VectorXd coef_all;  // alpha_i - alpha_i^* for every training row
  long iterations = 0;
  double max_violation = 0.0;
};

struct SvrModel {
  KernelType kernel = KernelType::rbf;
  double gamma = 1.0 / 24.0;
  double c = 1.0;
  double epsilon = 1e-3;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> support_vectors;  // scaled inputs
  Eigen::VectorXd dual_coef;        // alpha - alpha^*, |.| <= C
  double bias = 0.0;
  Scaling scaling;
  SvrDiagnostics diagnostics;       // not serialized
  Eigen::VectorXd fit_residuals;    // not serialized
};

double kernel_value(KernelType kernel, double gamma, std::span<const double> a, std::span<const double> b);

SvrModel fit_svr(const Dataset& data, const SvrParams& params = {}, const Scaling* scaling = nullptr);

double predict(const LinRegModel& model, std::span<const double> x);
double predict(const SvrModel& model, std::span<const double> x);

// Value in scaled target units for an already-scaled input (no transforms).
double svr_decision(const SvrModel& model, std::span<const double> scaled_x);

std::string_view to_string(KernelType k);
KernelType parse_kernel(std::string_view s);

nlohmann::json to_json(const LinRegModel& m);
LinRegModel linreg_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SvrModel& m);
SvrModel svr_from_json(const nlohmann::json& j);

}  // namespace gaitbac
