#include "gaitbac/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>
#include <vector>

#include "gaitbac/error.hpp"

namespace gaitbac {

using nlohmann::json;

namespace {

std::vector<double> scaled_row(const Scaling& s, std::span<const double> x) {
  if (x.size() != s.n_in()) throw Error(Errc::dimension_mismatch, "input vector has wrong length");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s.input[i].apply(x[i]);
  return out;
}

}  // namespace

std::string_view to_string(KernelType k) { return k == KernelType::linear ? "linear" : "rbf"; }

KernelType parse_kernel(std::string_view s) {
  if (s == "linear") return KernelType::linear;
  if (s == "rbf") return KernelType::rbf;
  throw Error(Errc::invalid_argument, "unknown kernel '" + std::string(s) + "'");
}

LinRegModel fit_linreg(const Dataset& data, double ridge, const Scaling* scaling) {
  data.validate();
  if (data.size() < 2) throw Error(Errc::invalid_argument, "linear regression needs n >= 2");
  if (!(ridge >= 0.0)) throw Error(Errc::invalid_argument, "ridge must be >= 0");
  LinRegModel m;
  m.ridge = ridge;
  m.scaling = scaling ? *scaling : Scaling::identity(data.dim());
  const Dataset s = apply_scaling(data, m.scaling);

  const Eigen::RowVectorXd x_mean = s.inputs.colwise().mean();
  const double y_mean = s.targets.mean();
  const Eigen::MatrixXd xc = s.inputs.rowwise() - x_mean;
  const Eigen::VectorXd yc = s.targets.array() - y_mean;

  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
    if (qr.rank() < xc.cols()) throw Error(Errc::singular_design, "design matrix is rank deficient");
    m.coefficients = qr.solve(yc);
  } else {
    Eigen::MatrixXd normal = xc.transpose() * xc;
    normal.diagonal().array() += ridge;
    m.coefficients = normal.ldlt().solve(xc.transpose() * yc);
  }
  m.intercept = y_mean - x_mean.dot(m.coefficients);

  const Eigen::VectorXd fitted = (s.inputs * m.coefficients).array() + m.intercept;
  m.fit_residuals = data.targets - ((fitted.array() - m.scaling.output.offset) / m.scaling.output.scale).matrix();
  return m;
}

double kernel_value(KernelType kernel, double gamma, std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  if (kernel == KernelType::linear) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * acc);
}

namespace {

// Kernel rows K(r, .) over the training set with an LRU bound on memory.
class KernelCache {
 public:
  KernelCache(const Eigen::MatrixXd& x_rowmajor_t, KernelType kernel, double gamma, double budget_mb)
      : x_(x_rowmajor_t), kernel_(kernel), gamma_(gamma) {
    const double row_bytes = static_cast<double>(x_.cols()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(budget_mb * 1024.0 * 1024.0 / row_bytes));
  }

  const std::vector<double>& row(Eigen::Index r) {
    if (auto it = index_.find(r); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> values(static_cast<std::size_t>(x_.cols()));
    const std::span<const double> xr(x_.col(r).data(), static_cast<std::size_t>(x_.rows()));
    for (Eigen::Index c = 0; c < x_.cols(); ++c) {
      values[static_cast<std::size_t>(c)] =
          kernel_value(kernel_, gamma_, xr, std::span<const double>(x_.col(c).data(), xr.size()));
    }
    lru_.emplace_front(r, std::move(values));
    index_[r] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Eigen::MatrixXd& x_;  // d x n: one column per sample
  KernelType kernel_;
  double gamma_;
  std::size_t capacity_ = 2;
  std::list<std::pair<Eigen::Index, std::vector<double>>> lru_;
  std::unordered_map<Eigen::Index, decltype(lru_)::iterator> index_;
};

}  // namespace

SvrModel fit_svr(const Dataset& data, const SvrParams& params, const Scaling* scaling) {
  data.validate();
  if (data.size() < 2) throw Error(Errc::invalid_argument, "SVR needs n >= 2");
  if (!(params.c > 0.0) || !(params.epsilon >= 0.0) || !(params.tol > 0.0) ||
      (params.kernel == KernelType::rbf && !(params.gamma > 0.0))) {
    throw Error(Errc::invalid_argument, "SVR parameters out of range");
  }
  SvrModel m;
  m.kernel = params.kernel;
  m.gamma = params.gamma;
  m.c = params.c;
  m.epsilon = params.epsilon;
  m.scaling = scaling ? *scaling : Scaling::identity(data.dim());
  const Dataset s = apply_scaling(data, m.scaling);
  const Eigen::MatrixXd xt = s.inputs.transpose();
  const auto l = static_cast<Eigen::Index>(s.size());
  const Eigen::Index two_l = 2 * l;
  const double c = params.c;
  constexpr double tau = 1e-12;

  // Dual over 2l variables: the first l carry y = +1 (alpha), the last l y = -1 (alpha^*).
  KernelCache cache(xt, params.kernel, params.gamma, params.cache_mb);
  std::vector<double> alpha(static_cast<std::size_t>(two_l), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(two_l));
  std::vector<double> qd(static_cast<std::size_t>(two_l));
  std::vector<signed char> y(static_cast<std::size_t>(two_l));
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto k = static_cast<std::size_t>(i);
    y[k] = 1;
    y[k + static_cast<std::size_t>(l)] = -1;
    grad[k] = params.epsilon - s.targets(i);
    grad[k + static_cast<std::size_t>(l)] = params.epsilon + s.targets(i);
    const std::span<const double> xi(xt.col(i).data(), static_cast<std::size_t>(xt.rows()));
    qd[k] = qd[k + static_cast<std::size_t>(l)] = kernel_value(params.kernel, params.gamma, xi, xi);
  }
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  // Q_ij = y_i y_j K(i mod l, j mod l)
  auto q = [&](const std::vector<double>& krow, std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * krow[j % static_cast<std::size_t>(l)];
  };

  const long max_iter = params.max_iter > 0 ? params.max_iter : std::max<long>(10 * l, 100000);
  long iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  for (;; ++iter) {
    // Second-order working-set selection.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i_sel = 0;
    bool found_i = false;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
      if (y[t] == 1 ? !upper(t) : !lower(t)) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) gmax = v, i_sel = t, found_i = true;
      }
    }
    if (!found_i) {
      violation = 0.0;
      break;
    }
    const auto& ki = cache.row(static_cast<Eigen::Index>(i_sel % static_cast<std::size_t>(l)));
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j_sel = 0;
    bool found_j = false;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
      if (!(y[t] == 1 ? !lower(t) : !upper(t))) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double quad = qd[i_sel] + qd[t] - 2.0 * y[i_sel] * q(ki, i_sel, t) * y[t];
        if (quad <= 0.0) quad = tau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) best_obj = obj, j_sel = t, found_j = true;
      }
    }
    violation = gmax + gmax2;
    if (violation < params.tol || !found_j) break;
    if (iter >= max_iter) {
      throw Error(Errc::no_convergence, "SMO did not reach KKT tolerance in " + std::to_string(max_iter) +
                                            " iterations (violation " + std::to_string(violation) + ")");
    }

    const std::size_t i = i_sel, j = j_sel;
    // Row i is the most recent entry, so fetching it after j never evicts j.
    const auto& kj = cache.row(static_cast<Eigen::Index>(j % static_cast<std::size_t>(l)));
    const auto& kii = cache.row(static_cast<Eigen::Index>(i % static_cast<std::size_t>(l)));
    const double old_i = alpha[i], old_j = alpha[j];
    const double qij = q(kii, i, j);
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = diff;
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0, alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = c - diff;
      } else if (alpha[j] > c) {
        alpha[j] = c, alpha[i] = c + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) alpha[i] = c, alpha[j] = sum - c;
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0, alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) alpha[j] = c, alpha[i] = sum - c;
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < alpha.size(); ++t) grad[t] += q(kii, i, t) * di + q(kj, j, t) * dj;
  }

  // rho: average y*G over free variables, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;
  m.bias = -rho;

  m.diagnostics.coef_all.resize(l);
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < l; ++i) {
    const double coef = alpha[static_cast<std::size_t>(i)] - alpha[static_cast<std::size_t>(i + l)];
    m.diagnostics.coef_all(i) = coef;
    if (coef != 0.0) sv.push_back(i);
  }
  m.diagnostics.iterations = iter;
  m.diagnostics.max_violation = violation;
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), s.inputs.cols());
  m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support_vectors.row(static_cast<Eigen::Index>(k)) = s.inputs.row(sv[k]);
    m.dual_coef(static_cast<Eigen::Index>(k)) = m.diagnostics.coef_all(sv[k]);
  }

  m.fit_residuals.resize(l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const Eigen::RowVectorXd xi = data.inputs.row(i);
    m.fit_residuals(i) = data.targets(i) - predict(m, std::span<const double>(xi.data(), data.dim()));
  }
  return m;
}

double svr_decision(const SvrModel& m, std::span<const double> xs) {
  double f = m.bias;
  for (Eigen::Index k = 0; k < m.support_vectors.rows(); ++k) {
    f += m.dual_coef(k) *
         kernel_value(m.kernel, m.gamma, std::span<const double>(m.support_vectors.row(k).data(), xs.size()), xs);
  }
  return f;
}

double predict(const SvrModel& m, std::span<const double> x) {
  const auto xs = scaled_row(m.scaling, x);
  return m.scaling.output.invert(svr_decision(m, xs));
}

double predict(const LinRegModel& m, std::span<const double> x) {
  const auto xs = scaled_row(m.scaling, x);
  double y = m.intercept;
  for (std::size_t i = 0; i < xs.size(); ++i) y += m.coefficients(static_cast<Eigen::Index>(i)) * xs[i];
  return m.scaling.output.invert(y);
}

json to_json(const LinRegModel& m) {
  return {{"coefficients", std::vector<double>(m.coefficients.data(), m.coefficients.data() + m.coefficients.size())},
          {"intercept", m.intercept},
          {"ridge", m.ridge},
          {"scaling", to_json(m.scaling)}};
}

LinRegModel linreg_from_json(const json& j) {
  LinRegModel m;
  const auto coef = j.at("coefficients").get<std::vector<double>>();
  m.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  m.intercept = j.at("intercept").get<double>();
  m.ridge = j.at("ridge").get<double>();
  m.scaling = scaling_from_json(j.at("scaling"));
  if (m.scaling.n_in() != coef.size()) throw Error(Errc::dimension_mismatch, "linreg scaling width");
  return m;
}

json to_json(const SvrModel& m) {
  json sv = json::array();
  for (Eigen::Index k = 0; k < m.support_vectors.rows(); ++k) {
    const double* r = m.support_vectors.row(k).data();
    sv.push_back(std::vector<double>(r, r + m.support_vectors.cols()));
  }
  return {{"kernel", to_string(m.kernel)},
          {"gamma", m.gamma},
          {"C", m.c},
          {"epsilon", m.epsilon},
          {"bias", m.bias},
          {"dual_coef", std::vector<double>(m.dual_coef.data(), m.dual_coef.data() + m.dual_coef.size())},
          {"support_vectors", std::move(sv)},
          {"scaling", to_json(m.scaling)}};
}

SvrModel svr_from_json(const json& j) {
  SvrModel m;
  m.kernel = parse_kernel(j.at("kernel").get<std::string>());
  m.gamma = j.at("gamma").get<double>();
  m.c = j.at("C").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  m.bias = j.at("bias").get<double>();
  m.scaling = scaling_from_json(j.at("scaling"));
  const auto coef = j.at("dual_coef").get<std::vector<double>>();
  m.dual_coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  const auto& sv = j.at("support_vectors");
  if (sv.size() != coef.size()) throw Error(Errc::schema_violation, "support vector count differs from dual_coef");
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), static_cast<Eigen::Index>(m.scaling.n_in()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    const auto row = sv[k].get<std::vector<double>>();
    if (row.size() != m.scaling.n_in()) throw Error(Errc::dimension_mismatch, "support vector width");
    for (std::size_t c = 0; c < row.size(); ++c) {
      m.support_vectors(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  return m;
}

}  // namespace gaitbac
