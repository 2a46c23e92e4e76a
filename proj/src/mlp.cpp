#include "gaitbac/mlp.hpp"

#include <cmath>
#include <random>

#include "gaitbac/error.hpp"

namespace gaitbac {

using nlohmann::json;

Scaling Scaling::identity(std::size_t n_in) {
  Scaling s;
  s.input.assign(n_in, AffineMap{});
  return s;
}

void Dataset::validate() const {
  if (inputs.rows() < 1) throw Error(Errc::invalid_argument, "dataset is empty");
  if (targets.size() != inputs.rows()) throw Error(Errc::dimension_mismatch, "inputs and targets differ in length");
  if (!groups.empty() && groups.size() != size()) throw Error(Errc::dimension_mismatch, "group keys per row");
  if (!inputs.allFinite() || !targets.allFinite()) throw Error(Errc::non_finite_input, "dataset has non-finite entries");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  if (!groups.empty()) out.groups.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(src);
    out.targets(static_cast<Eigen::Index>(r)) = targets(src);
    if (!groups.empty()) out.groups.push_back(groups[rows[r]]);
  }
  return out;
}

Dataset make_dataset(const std::vector<FeatureVector>& rows) {
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
  d.targets.resize(static_cast<Eigen::Index>(rows.size()));
  d.groups.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      d.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].values[c];
    }
    d.targets(static_cast<Eigen::Index>(r)) = rows[r].label;
    d.groups.push_back(rows[r].key());
  }
  return d;
}

namespace {

AffineMap minmax_map(double lo, double hi) {
  if (!(hi > lo)) return {0.0, 0.0, true};
  const double scale = 2.0 / (hi - lo);
  return {scale, -1.0 - lo * scale, false};
}

}  // namespace

Scaling fit_scaling(const Dataset& data) {
  data.validate();
  Scaling s;
  for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
    s.input.push_back(minmax_map(data.inputs.col(c).minCoeff(), data.inputs.col(c).maxCoeff()));
  }
  const double lo = data.targets.minCoeff();
  const double hi = data.targets.maxCoeff();
  s.output = minmax_map(lo, hi);
  if (s.output.degenerate) s.output = {1.0, -lo, true};  // output map must stay invertible
  return s;
}

Dataset apply_scaling(const Dataset& data, const Scaling& scaling) {
  if (scaling.n_in() != data.dim()) throw Error(Errc::dimension_mismatch, "scaling width differs from dataset");
  Dataset out = data;
  for (Eigen::Index c = 0; c < out.inputs.cols(); ++c) {
    const auto& m = scaling.input[static_cast<std::size_t>(c)];
    out.inputs.col(c) = (m.scale * data.inputs.col(c).array() + m.offset).matrix();
  }
  out.targets = (scaling.output.scale * data.targets.array() + scaling.output.offset).matrix();
  return out;
}

bool MlpModel::operator==(const MlpModel& o) const {
  auto same = [](const auto& a, const auto& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; };
  return n_in == o.n_in && n_hidden == o.n_hidden && same(hidden_weights, o.hidden_weights) &&
         same(hidden_bias, o.hidden_bias) && same(output_weights, o.output_weights) &&
         output_bias == o.output_bias && scaling == o.scaling && metadata == o.metadata;
}

MlpModel zero_model(std::size_t n_in, std::size_t n_hidden) {
  MlpModel m;
  m.n_in = n_in;
  m.n_hidden = n_hidden;
  const auto h = static_cast<Eigen::Index>(n_hidden);
  m.hidden_weights = Eigen::MatrixXd::Zero(h, static_cast<Eigen::Index>(n_in));
  m.hidden_bias = Eigen::VectorXd::Zero(h);
  m.output_weights = Eigen::VectorXd::Zero(h);
  m.output_bias = 0.0;
  m.scaling = Scaling::identity(n_in);
  return m;
}

MlpModel init_model(std::size_t n_in, std::size_t n_hidden, std::uint64_t seed, Scaling scaling) {
  if (n_in == 0 || n_hidden == 0) throw Error(Errc::invalid_argument, "network needs inputs and hidden units");
  if (scaling.n_in() != n_in) throw Error(Errc::dimension_mismatch, "scaling width differs from n_in");
  MlpModel m = zero_model(n_in, n_hidden);
  m.scaling = std::move(scaling);
  m.metadata.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hidden(-0.5 / std::sqrt(double(n_in)), 0.5 / std::sqrt(double(n_in)));
  std::uniform_real_distribution<double> output(-0.5 / std::sqrt(double(n_hidden)), 0.5 / std::sqrt(double(n_hidden)));
  for (Eigen::Index j = 0; j < m.hidden_weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < m.hidden_weights.cols(); ++i) m.hidden_weights(j, i) = hidden(rng);
    m.hidden_bias(j) = hidden(rng);
  }
  for (Eigen::Index j = 0; j < m.output_weights.size(); ++j) m.output_weights(j) = output(rng);
  m.output_bias = output(rng);
  return m;
}

Eigen::VectorXd flatten(const MlpModel& model) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(model.parameter_count()));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < model.hidden_weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < model.hidden_weights.cols(); ++i) p(k++) = model.hidden_weights(j, i);
  }
  for (Eigen::Index j = 0; j < model.hidden_bias.size(); ++j) p(k++) = model.hidden_bias(j);
  for (Eigen::Index j = 0; j < model.output_weights.size(); ++j) p(k++) = model.output_weights(j);
  p(k) = model.output_bias;
  return p;
}

void unflatten(MlpModel& model, const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != model.parameter_count()) {
    throw Error(Errc::dimension_mismatch, "parameter vector length differs from model");
  }
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < model.hidden_weights.rows(); ++j) {
    for (Eigen::Index i = 0; i < model.hidden_weights.cols(); ++i) model.hidden_weights(j, i) = p(k++);
  }
  for (Eigen::Index j = 0; j < model.hidden_bias.size(); ++j) model.hidden_bias(j) = p(k++);
  for (Eigen::Index j = 0; j < model.output_weights.size(); ++j) model.output_weights(j) = p(k++);
  model.output_bias = p(k);
}

double sigmoid(double gamma) {
  if (gamma >= 0.0) return 1.0 / (1.0 + std::exp(-gamma));
  const double e = std::exp(gamma);
  return e / (1.0 + e);
}

namespace {

// Hidden activations for every row: S = sigmoid(X W^T + 1 b^T).
Eigen::MatrixXd hidden_activations(const MlpModel& m, const Eigen::MatrixXd& xs) {
  Eigen::MatrixXd a = xs * m.hidden_weights.transpose();
  a.rowwise() += m.hidden_bias.transpose();
  return a.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

Eigen::VectorXd network_outputs(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs) {
  if (static_cast<std::size_t>(scaled_inputs.cols()) != model.n_in) {
    throw Error(Errc::dimension_mismatch, "input width differs from model");
  }
  Eigen::VectorXd y = hidden_activations(model, scaled_inputs) * model.output_weights;
  y.array() += model.output_bias;
  return y;
}

double forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.n_in) throw Error(Errc::dimension_mismatch, "input vector has wrong length");
  double y = model.output_bias;
  for (Eigen::Index j = 0; j < model.hidden_weights.rows(); ++j) {
    double a = model.hidden_bias(j);
    for (std::size_t i = 0; i < x.size(); ++i) {
      a += model.hidden_weights(j, static_cast<Eigen::Index>(i)) * model.scaling.input[i].apply(x[i]);
    }
    y += model.output_weights(j) * sigmoid(a);
  }
  return model.scaling.output.invert(y);
}

Eigen::VectorXd predict(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  Dataset tmp;
  tmp.inputs = inputs;
  tmp.targets = Eigen::VectorXd::Zero(inputs.rows());
  const Dataset scaled = apply_scaling(tmp, model.scaling);
  Eigen::VectorXd y = network_outputs(model, scaled.inputs);
  return ((y.array() - model.scaling.output.offset) / model.scaling.output.scale).matrix();
}

Eigen::MatrixXd jacobian_scaled(const MlpModel& model, const Eigen::MatrixXd& xs) {
  if (static_cast<std::size_t>(xs.cols()) != model.n_in) {
    throw Error(Errc::dimension_mismatch, "input width differs from model");
  }
  const Eigen::Index n = xs.rows();
  const auto h = static_cast<Eigen::Index>(model.n_hidden);
  const auto d = static_cast<Eigen::Index>(model.n_in);
  const Eigen::MatrixXd s = hidden_activations(model, xs);
  const Eigen::ArrayXXd ds = s.array() * (1.0 - s.array());

  Eigen::MatrixXd jac(n, static_cast<Eigen::Index>(model.parameter_count()));
  for (Eigen::Index j = 0; j < h; ++j) {
    const Eigen::ArrayXd unit = -model.output_weights(j) * ds.col(j);
    for (Eigen::Index i = 0; i < d; ++i) jac.col(j * d + i) = (unit * xs.col(i).array()).matrix();
    jac.col(h * d + j) = unit.matrix();
    jac.col(h * d + h + j) = -s.col(j);
  }
  jac.col(h * d + 2 * h).setConstant(-1.0);
  return jac;
}

Eigen::MatrixXd jacobian(const MlpModel& model, const Dataset& data) {
  return jacobian_scaled(model, apply_scaling(data, model.scaling).inputs);
}

Eigen::VectorXd sse_gradient(const MlpModel& model, const Eigen::MatrixXd& xs, const Eigen::VectorXd& ts) {
  const Eigen::MatrixXd s = hidden_activations(model, xs);
  Eigen::VectorXd y = s * model.output_weights;
  y.array() += model.output_bias;
  const Eigen::VectorXd delta = -2.0 * (ts - y);  // d(SSE)/d(yhat)

  const auto h = static_cast<Eigen::Index>(model.n_hidden);
  const auto d = static_cast<Eigen::Index>(model.n_in);
  Eigen::MatrixXd back = (s.array() * (1.0 - s.array())).colwise() * delta.array();
  back = back * model.output_weights.asDiagonal();
  const Eigen::MatrixXd gw = back.transpose() * xs;  // H x n_in

  Eigen::VectorXd g(static_cast<Eigen::Index>(model.parameter_count()));
  for (Eigen::Index j = 0; j < h; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(j * d + i) = gw(j, i);
  }
  g.segment(h * d, h) = back.colwise().sum().transpose();
  g.segment(h * d + h, h) = s.transpose() * delta;
  g(h * d + 2 * h) = delta.sum();
  return g;
}

json to_json(const Scaling& scaling) {
  json in = json::array();
  for (const auto& m : scaling.input) in.push_back({{"scale", m.scale}, {"offset", m.offset}, {"degenerate", m.degenerate}});
  return {{"input", in},
          {"output", {{"scale", scaling.output.scale}, {"offset", scaling.output.offset},
                      {"degenerate", scaling.output.degenerate}}}};
}

Scaling scaling_from_json(const json& j) {
  auto map = [](const json& m) {
    return AffineMap{m.at("scale").get<double>(), m.at("offset").get<double>(), m.at("degenerate").get<bool>()};
  };
  Scaling s;
  for (const auto& m : j.at("input")) s.input.push_back(map(m));
  s.output = map(j.at("output"));
  return s;
}

json to_json(const MlpModel& model) {
  const Eigen::VectorXd p = flatten(model);
  json training = {{"algorithm", model.metadata.algorithm},
                   {"seed", model.metadata.seed},
                   {"epochs", model.metadata.epochs}};
  if (model.metadata.alpha) training["alpha"] = *model.metadata.alpha;
  if (model.metadata.beta) training["beta"] = *model.metadata.beta;
  if (model.metadata.gamma) training["gamma"] = *model.metadata.gamma;
  return {{"architecture",
           {{"n_in", model.n_in},
            {"n_hidden", model.n_hidden},
            {"hidden_activation", "logistic"},
            {"output_activation", "linear"},
            {"parameter_count", model.parameter_count()},
            {"parameter_order", "hidden_weights[j][i], hidden_bias[j], output_weights[j], output_bias"}}},
          {"parameters", std::vector<double>(p.data(), p.data() + p.size())},
          {"scaling", to_json(model.scaling)},
          {"training", training}};
}

MlpModel mlp_from_json(const json& j) {
  try {
    const auto& arch = j.at("architecture");
    MlpModel m = zero_model(arch.at("n_in").get<std::size_t>(), arch.at("n_hidden").get<std::size_t>());
    const auto params = j.at("parameters").get<std::vector<double>>();
    unflatten(m, Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size())));
    m.scaling = scaling_from_json(j.at("scaling"));
    if (m.scaling.n_in() != m.n_in) throw Error(Errc::dimension_mismatch, "scaling width differs from n_in");
    const auto& t = j.at("training");
    m.metadata.algorithm = t.at("algorithm").get<std::string>();
    m.metadata.seed = t.at("seed").get<std::uint64_t>();
    m.metadata.epochs = t.at("epochs").get<int>();
    if (t.contains("alpha")) m.metadata.alpha = t["alpha"].get<double>();
    if (t.contains("beta")) m.metadata.beta = t["beta"].get<double>();
    if (t.contains("gamma")) m.metadata.gamma = t["gamma"].get<double>();
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("model JSON: ") + e.what());
  }
}

}  // namespace gaitbac
