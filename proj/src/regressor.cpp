#include "gaitbac/regressor.hpp"

#include <fstream>

#include "gaitbac/error.hpp"

namespace gaitbac {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "gaitbac-model";
constexpr int kVersion = 1;
}  // namespace

std::string algorithm_tag(const Regressor& model) {
  struct {
    std::string operator()(const MlpModel& m) const { return m.metadata.algorithm.empty() ? "mlp" : m.metadata.algorithm; }
    std::string operator()(const LinRegModel&) const { return "linreg"; }
    std::string operator()(const SvrModel&) const { return "svr"; }
  } tag;
  return std::visit(tag, model);
}

double predict(const Regressor& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>) {
          return forward(m, x);
        } else {
          return gaitbac::predict(m, x);
        }
      },
      model);
}

Eigen::VectorXd predict(const Regressor& model, const Eigen::MatrixXd& inputs) {
  if (const auto* mlp = std::get_if<MlpModel>(&model)) return gaitbac::predict(*mlp, inputs);
  Eigen::VectorXd out(inputs.rows());
  Eigen::RowVectorXd row;
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    row = inputs.row(r);
    out(r) = predict(model, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return out;
}

json to_json(const Regressor& model) {
  json body = std::visit([](const auto& m) { return to_json(m); }, model);
  return {{"format", kFormat}, {"version", kVersion}, {"algorithm", algorithm_tag(model)}, {"model", std::move(body)}};
}

Regressor regressor_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kVersion) {
      throw Error(Errc::schema_violation, "not a gaitbac model file (format/version)");
    }
    const auto algo = j.at("algorithm").get<std::string>();
    const json& body = j.at("model");
    if (algo == "linreg") return linreg_from_json(body);
    if (algo == "svr") return svr_from_json(body);
    return mlp_from_json(body);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("model file: ") + e.what());
  }
}

void save_model(const Regressor& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << to_json(model).dump(1) << '\n';
}

Regressor load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  try {
    return regressor_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema_violation, path.string() + ": " + e.what());
  }
}

}  // namespace gaitbac
