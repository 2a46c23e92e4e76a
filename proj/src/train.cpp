#include "gaitbac/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "gaitbac/error.hpp"
#include "gaitbac/seed.hpp"

namespace gaitbac {

using nlohmann::json;

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::cg: return "cg";
    case Algorithm::lm: return "lm";
    case Algorithm::br: return "br";
    case Algorithm::linreg: return "linreg";
    case Algorithm::svr: return "svr";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::cg, Algorithm::lm, Algorithm::br, Algorithm::linreg, Algorithm::svr}) {
    if (to_string(a) == s) return a;
  }
  throw Error(Errc::invalid_argument, "unknown algorithm '" + std::string(s) + "'");
}

void LmConfig::validate() const {
  if (!(lambda0 > 0 && lambda_up > 1 && lambda_down > 1 && lambda_max > 0 && max_iters > 0 && min_grad > 0 &&
        min_step > 0)) {
    throw Error(Errc::invalid_argument, "LM configuration values must be positive, with up/down factors > 1");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Symmetric J^T J via a rank update of the lower triangle, then mirrored.
Eigen::MatrixXd gram(const Eigen::MatrixXd& jac) {
  const Eigen::Index n = jac.cols();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

double sse_at(MlpModel& scratch, const Eigen::VectorXd& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& t) {
  unflatten(scratch, w);
  return (t - network_outputs(scratch, x)).squaredNorm();
}

struct ScaledProblem {
  Eigen::MatrixXd x;
  Eigen::VectorXd t;
  double mse_to_target_units = 1.0;  // 1 / output_scale^2
};

ScaledProblem prepare(const MlpModel& model, const Dataset& data) {
  data.validate();
  if (data.dim() != model.n_in) throw Error(Errc::dimension_mismatch, "dataset width differs from model inputs");
  Dataset scaled = apply_scaling(data, model.scaling);
  const double s = model.scaling.output.scale;
  return {std::move(scaled.inputs), std::move(scaled.targets), 1.0 / (s * s)};
}

// Damped Gauss-Newton minimization of F = beta * SSE + alpha * |w|^2:
//   (beta J^T J + (alpha + lambda) I) h = beta J^T e + alpha w,  w <- w - h
// with J = de/dw. alpha = 0, beta = 1 is plain Levenberg-Marquardt on SSE.
struct LmOutcome {
  std::string stop;
  int iterations = 0;
};

LmOutcome lm_minimize(MlpModel& model, const ScaledProblem& p, double alpha, double beta, const LmConfig& cfg,
                      int max_iters, double& lambda, TrainReport& report, const TraceEntry& decoration) {
  const double n = static_cast<double>(p.x.rows());
  const auto n_params = static_cast<Eigen::Index>(model.parameter_count());
  MlpModel scratch = model;
  Eigen::VectorXd w = flatten(model);
  Eigen::VectorXd e = p.t - network_outputs(model, p.x);
  double sse = e.squaredNorm();
  double objective = beta * sse + alpha * w.squaredNorm();
  if (!std::isfinite(objective)) throw Error(Errc::non_finite_loss, "initial objective is not finite");

  LmOutcome out;
  bool ever_factored = false;
  while (out.iterations < max_iters) {
    const Eigen::MatrixXd jac = jacobian_scaled(model, p.x);
    Eigen::MatrixXd system = beta * gram(jac);
    system.diagonal().array() += alpha;
    const Eigen::VectorXd grad = beta * (jac.transpose() * e) + alpha * w;
    ++out.iterations;

    TraceEntry entry = decoration;
    entry.mse = sse / n * p.mse_to_target_units;
    if (grad.norm() < cfg.min_grad) {
      entry.lambda = lambda;
      report.trace.push_back(entry);
      out.stop = "min_grad";
      return out;
    }

    bool accepted = false;
    Eigen::VectorXd step;
    while (!accepted) {
      auto h = lm_step(system, grad, lambda);
      if (h) {
        ever_factored = true;
        const Eigen::VectorXd trial = w - *h;
        const double trial_sse = sse_at(scratch, trial, p.x, p.t);
        const double trial_obj = beta * trial_sse + alpha * trial.squaredNorm();
        if (std::isfinite(trial_obj) && trial_obj < objective) {
          accepted = true;
          step = std::move(*h);
          w = trial;
          sse = trial_sse;
          objective = trial_obj;
          lambda /= cfg.lambda_down;
          break;
        }
      }
      lambda *= cfg.lambda_up;
      if (lambda > cfg.lambda_max) break;
    }
    if (!accepted) {
      if (!ever_factored) throw Error(Errc::singular_normal_equations, "damped normal equations never factored");
      entry.lambda = lambda;
      report.trace.push_back(entry);
      out.stop = "lambda_max";
      return out;
    }

    unflatten(model, w);
    e = p.t - network_outputs(model, p.x);
    entry.mse = sse / n * p.mse_to_target_units;
    entry.lambda = lambda;
    report.trace.push_back(entry);
    if (sse == 0.0) {
      out.stop = "zero_error";
      return out;
    }
    if (step.norm() < cfg.min_step) {
      out.stop = "min_step";
      return out;
    }
  }
  (void)n_params;
  out.stop = "max_iters";
  return out;
}

void finish_report(TrainReport& report, const MlpModel& model, const ScaledProblem& p, Clock::time_point t0) {
  report.iterations = static_cast<int>(report.trace.size());
  report.final_mse = (p.t - network_outputs(model, p.x)).squaredNorm() / static_cast<double>(p.x.rows()) *
                     p.mse_to_target_units;
  report.seed = model.metadata.seed;
  report.wall_seconds = seconds_since(t0);
}

}  // namespace

json to_json(const TrainReport& r, bool include_wall_time) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    json row = {{"mse", t.mse}, {"lambda", opt(t.lambda)}};
    if (t.alpha) row["alpha"] = *t.alpha;
    if (t.beta) row["beta"] = *t.beta;
    if (t.gamma) row["gamma"] = *t.gamma;
    trace.push_back(std::move(row));
  }
  json j = {{"algorithm", r.algorithm}, {"iterations", r.iterations}, {"final_mse", r.final_mse},
            {"seed", r.seed},           {"stop_reason", r.stop_reason}, {"warnings", r.warnings},
            {"trace", std::move(trace)}};
  if (include_wall_time) j["wall_seconds"] = r.wall_seconds;
  return j;
}

json to_json(const BrState& s) {
  return {{"alpha", s.alpha}, {"beta", s.beta},           {"gamma", s.gamma},
          {"e_d", s.e_d},     {"e_w", s.e_w},             {"objective", s.objective},
          {"n_params", s.n_params}, {"outer_iterations", s.outer_iterations}};
}

std::optional<Eigen::VectorXd> lm_step(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& rhs, double damping) {
  Eigen::MatrixXd a = jtj;
  a.diagonal().array() += damping;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::VectorXd h = llt.solve(rhs);
  // one round of iterative refinement
  h += llt.solve(rhs - a.selfadjointView<Eigen::Lower>() * h);
  if (!h.allFinite()) return std::nullopt;
  return h;
}

TrainResult train_lm(MlpModel model, const Dataset& data, const LmConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const ScaledProblem p = prepare(model, data);
  TrainReport report;
  report.algorithm = "lm";
  double lambda = cfg.lambda0;
  const auto outcome = lm_minimize(model, p, 0.0, 1.0, cfg, cfg.max_iters, lambda, report, TraceEntry{});
  report.stop_reason = outcome.stop;
  model.metadata.algorithm = "lm";
  model.metadata.epochs = static_cast<int>(report.trace.size());
  model.metadata.alpha.reset();
  model.metadata.beta.reset();
  model.metadata.gamma.reset();
  finish_report(report, model, p, t0);
  return {std::move(model), std::move(report), std::nullopt};
}

TrainResult train_br(MlpModel model, const Dataset& data, const LmConfig& cfg, const BrConfig& br) {
  cfg.validate();
  if (br.max_outer < 1 || br.inner_iters < 1 || !(br.rel_tol > 0)) {
    throw Error(Errc::invalid_argument, "BR outer configuration must be positive");
  }
  const auto t0 = Clock::now();
  const ScaledProblem p = prepare(model, data);
  const auto n = static_cast<double>(p.x.rows());
  if (p.x.rows() < 2) throw Error(Errc::invalid_argument, "Bayesian regularization needs n > 1");
  const auto n_params = static_cast<double>(model.parameter_count());

  TrainReport report;
  report.algorithm = "br";
  BrState state;
  state.n_params = model.parameter_count();
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = n_params;
  double lambda = cfg.lambda0;
  std::string stop = "max_outer";

  for (int outer = 1; outer <= br.max_outer; ++outer) {
    const int budget = std::min(br.inner_iters, cfg.max_iters - static_cast<int>(report.trace.size()));
    if (budget <= 0) {
      stop = "max_iters";
      break;
    }
    TraceEntry decoration;
    decoration.alpha = alpha;
    decoration.beta = beta;
    decoration.gamma = gamma;
    const auto inner = lm_minimize(model, p, alpha, beta, cfg, budget, lambda, report, decoration);
    if (inner.stop == "lambda_max") lambda = cfg.lambda0;

    const Eigen::VectorXd w = flatten(model);
    const double e_d = (p.t - network_outputs(model, p.x)).squaredNorm();
    const double e_w = w.squaredNorm();

    double new_gamma = n_params;
    if (alpha > 0.0) {
      // Gauss-Newton Hessian of F: H = 2 beta J^T J + 2 alpha I; gamma = N - 2 alpha tr(H^-1)
      Eigen::MatrixXd hess = 2.0 * beta * gram(jacobian_scaled(model, p.x));
      hess.diagonal().array() += 2.0 * alpha;
      Eigen::LLT<Eigen::MatrixXd> llt(hess);
      if (llt.info() != Eigen::Success) {
        hess.diagonal().array() += 1e-12;
        llt.compute(hess);
        if (llt.info() != Eigen::Success) throw Error(Errc::hessian_not_invertible, "Cholesky of H failed");
      }
      const Eigen::MatrixXd l_inv =
          llt.matrixL().solve(Eigen::MatrixXd::Identity(hess.rows(), hess.cols()));
      new_gamma = n_params - 2.0 * alpha * l_inv.squaredNorm();
    }
    if (new_gamma < -1e-6 || new_gamma > n_params + 1e-6) {
      report.warnings.push_back("outer " + std::to_string(outer) + ": gamma " + std::to_string(new_gamma) +
                                " clipped to [0, N]");
    }
    new_gamma = std::clamp(new_gamma, 0.0, n_params);

    if (!(e_d > 0.0) || !(e_w > 0.0) || !std::isfinite(e_d) || !std::isfinite(e_w)) {
      throw Error(Errc::non_finite_hyperparameter, "E_D or E_W is zero or not finite");
    }
    const double new_alpha = new_gamma / (2.0 * e_w);
    double new_beta = (n - new_gamma) / (2.0 * e_d);
    if (!std::isfinite(new_alpha) || !std::isfinite(new_beta)) {
      throw Error(Errc::non_finite_hyperparameter, "alpha or beta update is not finite");
    }
    if (new_beta <= 0.0) {
      report.warnings.push_back("outer " + std::to_string(outer) + ": n <= gamma, beta kept at previous value");
      new_beta = beta;
    }

    const bool converged = alpha > 0.0 && std::abs(new_alpha - alpha) / alpha < br.rel_tol &&
                           std::abs(new_beta - beta) / beta < br.rel_tol;
    alpha = new_alpha;
    beta = new_beta;
    gamma = new_gamma;
    state = {alpha, beta, gamma, e_d, e_w, beta * e_d + alpha * e_w, model.parameter_count(), outer};
    if (converged) {
      stop = "converged";
      break;
    }
  }

  report.stop_reason = stop;
  model.metadata.algorithm = "br";
  model.metadata.epochs = static_cast<int>(report.trace.size());
  model.metadata.alpha = state.alpha;
  model.metadata.beta = state.beta;
  model.metadata.gamma = state.gamma;
  finish_report(report, model, p, t0);
  return {std::move(model), std::move(report), state};
}

TrainResult train_cg(MlpModel model, const Dataset& data, const CgConfig& cfg) {
  if (cfg.max_iters < 1 || !(cfg.tol > 0) || !(cfg.armijo_c > 0 && cfg.armijo_c < 1)) {
    throw Error(Errc::invalid_argument, "CG configuration out of range");
  }
  const auto t0 = Clock::now();
  const ScaledProblem p = prepare(model, data);
  const auto n_params = static_cast<Eigen::Index>(model.parameter_count());
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(n_params);
  if (!cfg.trainable.empty()) {
    if (cfg.trainable.size() != model.parameter_count()) {
      throw Error(Errc::dimension_mismatch, "trainable mask length differs from parameter count");
    }
    for (Eigen::Index k = 0; k < n_params; ++k) mask(k) = cfg.trainable[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
  }
  const auto n_free = static_cast<int>(mask.sum());

  TrainReport report;
  report.algorithm = "cg";
  MlpModel scratch = model;
  Eigen::VectorXd w = flatten(model);
  double f = sse_at(scratch, w, p.x, p.t);
  if (!std::isfinite(f)) throw Error(Errc::non_finite_loss, "initial SSE is not finite");
  const double n = static_cast<double>(p.x.rows());

  Eigen::VectorXd d, g_prev, d_prev;
  double step_prev = 0.0;
  int since_restart = 0;
  std::string stop = "max_iters";

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    unflatten(model, w);
    const Eigen::VectorXd g = sse_gradient(model, p.x, p.t).cwiseProduct(mask);
    TraceEntry entry;
    if (g.norm() < cfg.tol || n_free == 0) {
      entry.mse = f / n * p.mse_to_target_units;
      report.trace.push_back(entry);
      stop = "min_grad";
      break;
    }

    bool steepest = iter == 1 || since_restart >= n_free;
    if (!steepest) {
      const double fr = g.squaredNorm() / g_prev.squaredNorm();  // Fletcher-Reeves
      d = -g + fr * d_prev;
      if (g.dot(d) >= 0.0) steepest = true;
    }
    if (steepest) {
      d = -g;
      since_restart = 0;
    }

    // Armijo backtracking from a scaled initial step, with doubling while it keeps paying off.
    auto line_search = [&](const Eigen::VectorXd& dir, double& step, double& f_new) {
      const double slope = g.dot(dir);
      step = step_prev > 0.0 && d_prev.size() > 0 ? step_prev * g_prev.dot(d_prev) / slope : 1.0 / g.norm();
      if (!std::isfinite(step) || step <= 0.0) step = 1.0 / g.norm();
      for (int k = 0; k < 60; ++k) {
        f_new = sse_at(scratch, w + step * dir, p.x, p.t);
        if (std::isfinite(f_new) && f_new <= f + cfg.armijo_c * step * slope) {
          for (int grow = 0; grow < 20; ++grow) {
            const double bigger = 2.0 * step;
            const double f_big = sse_at(scratch, w + bigger * dir, p.x, p.t);
            if (!(std::isfinite(f_big) && f_big < f_new && f_big <= f + cfg.armijo_c * bigger * slope)) break;
            step = bigger;
            f_new = f_big;
          }
          return f_new < f;
        }
        step *= 0.5;
      }
      return false;
    };

    double step = 0.0, f_new = f;
    bool ok = line_search(d, step, f_new);
    if (!ok && !steepest) {
      d = -g;
      since_restart = 0;
      ok = line_search(d, step, f_new);
    }
    if (!ok) {
      entry.mse = f / n * p.mse_to_target_units;
      report.trace.push_back(entry);
      stop = "line_search";
      break;
    }

    w += step * d;
    f = f_new;
    g_prev = g;
    d_prev = d;
    step_prev = step;
    ++since_restart;
    entry.mse = f / n * p.mse_to_target_units;
    report.trace.push_back(entry);
    if (step * d.norm() < 1e-15 * (1.0 + w.norm())) {
      stop = "min_step";
      break;
    }
  }

  unflatten(model, w);
  report.stop_reason = stop;
  model.metadata.algorithm = "cg";
  model.metadata.epochs = static_cast<int>(report.trace.size());
  model.metadata.alpha.reset();
  model.metadata.beta.reset();
  model.metadata.gamma.reset();
  finish_report(report, model, p, t0);
  return {std::move(model), std::move(report), std::nullopt};
}

TrainResult train_mlp(Algorithm algo, MlpModel model, const Dataset& data, const TrainerConfig& cfg) {
  switch (algo) {
    case Algorithm::lm: return train_lm(std::move(model), data, cfg.lm);
    case Algorithm::br: return train_br(std::move(model), data, cfg.lm, cfg.br);
    case Algorithm::cg: return train_cg(std::move(model), data, cfg.cg);
    default: throw Error(Errc::invalid_argument, "not an MLP trainer: " + std::string(to_string(algo)));
  }
}

SplitMode parse_split_mode(std::string_view s) {
  if (s == "random" || s == "random_window") return SplitMode::random_window;
  if (s == "episode" || s == "by_episode") return SplitMode::by_episode;
  throw Error(Errc::invalid_argument, "unknown split mode '" + std::string(s) + "'");
}

std::string_view to_string(SplitMode m) { return m == SplitMode::random_window ? "random" : "episode"; }

SplitIndices split_indices(const Dataset& data, double train_frac, SplitMode mode, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(Errc::invalid_argument, "train_frac must be in (0, 1)");
  const std::size_t n = data.size();
  std::mt19937_64 rng(seed);
  SplitIndices out;

  if (mode == SplitMode::random_window) {
    if (n < 2) throw Error(Errc::invalid_argument, "need at least 2 rows to split");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n))), 1, n - 1);
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  } else {
    if (data.groups.size() != n) throw Error(Errc::invalid_argument, "episode split needs group keys");
    std::vector<EpisodeKey> keys = data.groups;
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    if (keys.size() < 2) throw Error(Errc::too_few_groups, "episode split needs at least 2 groups");
    std::shuffle(keys.begin(), keys.end(), rng);
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(keys.size()))), 1, keys.size() - 1);
    std::vector<EpisodeKey> train_keys(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(train_keys.begin(), train_keys.end());
    for (std::size_t i = 0; i < n; ++i) {
      (std::binary_search(train_keys.begin(), train_keys.end(), data.groups[i]) ? out.train : out.test).push_back(i);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_frac, SplitMode mode, std::uint64_t seed) {
  const auto idx = split_indices(data, train_frac, mode, seed);
  return {data.subset(idx.train), data.subset(idx.test)};
}

SweepResult sweep_hidden(const Dataset& data, std::vector<std::size_t> candidates, std::size_t folds,
                         Algorithm trainer, std::uint64_t seed, const SweepOptions& options) {
  data.validate();
  if (folds < 2) throw Error(Errc::invalid_argument, "sweep needs at least 2 folds");
  if (folds > data.size()) throw Error(Errc::invalid_argument, "more folds than rows");
  if (candidates.empty()) throw Error(Errc::invalid_argument, "no hidden-size candidates");
  if (!is_mlp(trainer)) throw Error(Errc::invalid_argument, "sweep trains MLPs only");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.front() == 0) throw Error(Errc::invalid_argument, "hidden size must be positive");

  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> fold_rows(folds);
  for (std::size_t i = 0; i < perm.size(); ++i) fold_rows[i % folds].push_back(perm[i]);

  struct Trial {
    std::size_t candidate, fold;
    double mse = 0.0;
    std::string error;
  };
  std::vector<Trial> trials;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (std::size_t f = 0; f < folds; ++f) trials.push_back({c, f, 0.0, {}});
  }

  auto run = [&](Trial& trial) {
    try {
      std::vector<std::size_t> train_rows;
      for (std::size_t f = 0; f < folds; ++f) {
        if (f != trial.fold) train_rows.insert(train_rows.end(), fold_rows[f].begin(), fold_rows[f].end());
      }
      std::sort(train_rows.begin(), train_rows.end());
      std::vector<std::size_t> test_rows = fold_rows[trial.fold];
      std::sort(test_rows.begin(), test_rows.end());
      const Dataset train = data.subset(train_rows);
      const Dataset test = data.subset(test_rows);
      const std::size_t hidden = candidates[trial.candidate];
      MlpModel init = init_model(data.dim(), hidden, derive_seed(seed, {hidden, trial.fold}), fit_scaling(train));
      const auto fitted = train_mlp(trainer, std::move(init), train, options.trainer);
      trial.mse = (predict(fitted.model, test.inputs) - test.targets).squaredNorm() / static_cast<double>(test.size());
      if (!std::isfinite(trial.mse)) trial.error = "non-finite validation MSE";
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, trials.size());
  if (workers == 1) {
    for (auto& t : trials) run(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < trials.size(); i = next++) run(trials[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SweepRow row;
    row.hidden = candidates[c];
    double sum = 0.0;
    for (const auto& t : trials) {
      if (t.candidate != c) continue;
      if (!t.error.empty()) {
        row.failed = true;
        if (row.error.empty()) row.error = "fold " + std::to_string(t.fold) + ": " + t.error;
      }
      row.fold_mse.push_back(t.mse);
      sum += t.mse;
    }
    row.cv_mse = sum / static_cast<double>(folds);
    result.rows.push_back(std::move(row));
  }
  const SweepRow* best = nullptr;
  for (const auto& row : result.rows) {
    if (!row.failed && (best == nullptr || row.cv_mse < best->cv_mse)) best = &row;
  }
  if (best == nullptr) throw Error(Errc::no_convergence, "every sweep candidate failed");
  result.selected_hidden = best->hidden;
  return result;
}

}  // namespace gaitbac
