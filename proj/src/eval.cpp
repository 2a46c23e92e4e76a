#include "gaitbac/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gaitbac/error.hpp"

namespace gaitbac {

using nlohmann::json;

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

MetricsReport metrics(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw Error(Errc::dimension_mismatch, "prediction and target lengths differ");
  if (pred.size() < 2) throw Error(Errc::invalid_argument, "metrics need at least 2 samples");
  const auto n = static_cast<double>(pred.size());
  const double mean_t = std::accumulate(target.begin(), target.end(), 0.0) / n;
  const double mean_p = std::accumulate(pred.begin(), pred.end(), 0.0) / n;

  double sse = 0.0, sae = 0.0, sst = 0.0, sat = 0.0, spp = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double err = pred[i] - target[i];
    sse += err * err;
    sae += std::abs(err);
    const double dt = target[i] - mean_t;
    const double dp = pred[i] - mean_p;
    sst += dt * dt;
    sat += std::abs(dt);
    spp += dp * dp;
    spt += dp * dt;
  }

  MetricsReport m;
  m.n = pred.size();
  m.mse = sse / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = sae / n;
  const auto [pmin, pmax] = std::minmax_element(pred.begin(), pred.end());
  const auto [tmin, tmax] = std::minmax_element(target.begin(), target.end());
  const bool constant = *pmin == *pmax || *tmin == *tmax;
  m.r = constant || spp == 0.0 || sst == 0.0 ? 0.0 : std::clamp(spt / std::sqrt(spp * sst), -1.0, 1.0);
  if (*tmin != *tmax && sst > 0.0) {
    m.rae_percent = 100.0 * sae / sat;
    m.rrse_percent = 100.0 * std::sqrt(sse / sst);
  } else {
    m.zero_variance_target = true;
  }
  return m;
}

MetricsReport metrics(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  return metrics(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                 std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
}

std::size_t ErrorHistogram::total() const {
  std::size_t sum = 0;
  for (const auto& [tag, c] : counts) sum += std::accumulate(c.begin(), c.end(), std::size_t{0});
  return sum;
}

ErrorHistogram histogram(const std::vector<std::pair<std::string, std::vector<double>>>& errors_by_split,
                         std::size_t bins) {
  if (bins < 1) throw Error(Errc::invalid_argument, "histogram needs at least one bin");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t n = 0;
  for (const auto& [tag, errs] : errors_by_split) {
    for (double e : errs) {
      if (!std::isfinite(e)) throw Error(Errc::non_finite_input, "non-finite error value");
      lo = std::min(lo, e);
      hi = std::max(hi, e);
      ++n;
    }
  }
  if (n == 0) throw Error(Errc::invalid_argument, "histogram of no values");
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }

  ErrorHistogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  for (const auto& [tag, errs] : errors_by_split) {
    auto& c = h.counts[tag];
    c.assign(bins, 0);
    for (double e : errs) {
      auto b = static_cast<std::size_t>(std::floor((e - lo) / width));
      c[std::min(b, bins - 1)]++;
    }
  }
  return h;
}

ErrorHistogram histogram(std::span<const double> errors, std::size_t bins) {
  return histogram({{"all", std::vector<double>(errors.begin(), errors.end())}}, bins);
}

BestFit best_fit(std::span<const double> target, std::span<const double> pred) {
  const auto n = static_cast<double>(target.size());
  const double mt = std::accumulate(target.begin(), target.end(), 0.0) / n;
  const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  double stt = 0.0, stp = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    stt += (target[i] - mt) * (target[i] - mt);
    stp += (target[i] - mt) * (pred[i] - mp);
  }
  BestFit f;
  f.slope = stt > 0.0 ? stp / stt : 0.0;
  f.intercept = mp - f.slope * mt;
  return f;
}

Evaluation evaluate_splits(const Regressor& model, const std::vector<std::pair<std::string, const Dataset*>>& splits) {
  Evaluation ev;
  std::vector<double> all_pred, all_target;
  std::vector<std::pair<std::string, std::vector<double>>> errors;
  for (const auto& [tag, data] : splits) {
    data->validate();
    const Eigen::VectorXd pred = predict(model, data->inputs);
    std::vector<double> p(pred.data(), pred.data() + pred.size());
    std::vector<double> t(data->targets.data(), data->targets.data() + data->targets.size());
    if (p.size() >= 2) {
      ev.metrics[tag] = metrics(p, t);
      ev.fits[tag] = best_fit(t, p);
    }
    std::vector<double> err(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      err[i] = t[i] - p[i];
      ev.scatter.push_back({t[i], p[i], tag});
    }
    errors.emplace_back(tag, std::move(err));
    all_pred.insert(all_pred.end(), p.begin(), p.end());
    all_target.insert(all_target.end(), t.begin(), t.end());
  }
  if (all_pred.size() >= 2) {
    ev.metrics["all"] = metrics(all_pred, all_target);
    ev.fits["all"] = best_fit(all_target, all_pred);
  }
  ev.histogram = histogram(errors, 20);
  return ev;
}

Evaluation evaluate(const Regressor& model, const Dataset& train, const Dataset& test) {
  return evaluate_splits(model, {{"train", &train}, {"test", &test}});
}

json to_json(const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"n", m.n},         {"mse", m.mse},   {"r", m.r},
          {"mae", m.mae},     {"rmse", m.rmse}, {"rae_percent", opt(m.rae_percent)},
          {"rrse_percent", opt(m.rrse_percent)}, {"zero_variance_target", m.zero_variance_target}};
}

json to_json(const Evaluation& e) {
  json metrics_j = json::object();
  for (const auto& [tag, m] : e.metrics) metrics_j[tag] = to_json(m);
  json fits = json::object();
  for (const auto& [tag, f] : e.fits) fits[tag] = {{"slope", f.slope}, {"intercept", f.intercept}};
  return {{"metrics", metrics_j}, {"best_fit", fits}};
}

void write_scatter_csv(const Evaluation& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << "target,prediction,split\n";
  for (const auto& row : e.scatter) {
    out << fmt("%.17g", row.target) << ',' << fmt("%.17g", row.prediction) << ',' << row.split << '\n';
  }
}

void write_histogram_csv(const ErrorHistogram& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << "bin_lo,bin_hi";
  for (const auto& [tag, c] : h.counts) out << ',' << tag;
  out << '\n';
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    out << fmt("%.17g", h.edges[b]) << ',' << fmt("%.17g", h.edges[b + 1]);
    for (const auto& [tag, c] : h.counts) out << ',' << c[b];
    out << '\n';
  }
}

std::string format_mse_r_table(const std::string& title, const std::vector<TableRow>& rows) {
  std::string s = title + "\n";
  s += pad("Algorithm", 36) + pad("MSE", 16) + "R\n";
  for (const auto& r : rows) {
    s += pad(r.name, 36) + pad(fmt("%.6g", r.metrics.mse), 16) + fmt("%.6f", r.metrics.r) + "\n";
  }
  return s;
}

std::string format_five_metric_table(const std::string& title, const std::vector<TableRow>& rows) {
  auto pct = [](const std::optional<double>& v) { return v ? fmt("%.4f %%", *v) : std::string("n/a"); };
  std::string s = title + "\n";
  s += pad("Method", 24) + pad("Correlation", 14) + pad("MAE", 14) + pad("RMSE", 14) + pad("RAE", 14) + "RRSE\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    s += pad(r.name, 24) + pad(fmt("%.4f", m.r), 14) + pad(fmt("%.6f", m.mae), 14) + pad(fmt("%.6f", m.rmse), 14) +
         pad(pct(m.rae_percent), 14) + pct(m.rrse_percent) + "\n";
  }
  return s;
}

}  // namespace gaitbac
