#include "gaitbac/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaitbac/ingest.hpp"
#include "gaitbac/mlp.hpp"
#include "gaitbac/regressor.hpp"
#include "gaitbac/seed.hpp"

namespace gaitbac {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::schema_violation:
    case Errc::io_error:
      return 2;
    default:
      return 1;
  }
}

json error_json(const std::string& stage, const Error& e) {
  return {{"status", "error"}, {"stage", stage}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

void write_error_json(const fs::path& dir, const std::string& stage, const Error& e) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json", std::ios::binary);
  if (out) out << error_json(stage, e).dump(2) << '\n';
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

json build_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir);
    if (rel == "manifest.json" || rel == "timing.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
  json list = json::array();
  for (const auto& rel : files) {
    list.push_back({{"path", rel.generic_string()},
                    {"sha256", sha256_hex(dir / rel)},
                    {"bytes", static_cast<std::uint64_t>(fs::file_size(dir / rel))}});
  }
  return {{"files", list}};
}

void write_manifest(const fs::path& dir) { write_json(build_manifest(dir), dir / "manifest.json"); }

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, path.string() + ": " + e.what());
  }
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
}

namespace {

void check_keys(const json& j, const json& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::schema_violation, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw Error(Errc::schema_violation, "unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

json to_json(const TrainerConfig& c) {
  json cg_mask = json::array();
  for (bool b : c.cg.trainable) cg_mask.push_back(b);
  return {{"lm",
           {{"lambda0", c.lm.lambda0},
            {"lambda_up", c.lm.lambda_up},
            {"lambda_down", c.lm.lambda_down},
            {"lambda_max", c.lm.lambda_max},
            {"max_iters", c.lm.max_iters},
            {"min_grad", c.lm.min_grad},
            {"min_step", c.lm.min_step}}},
          {"br", {{"max_outer", c.br.max_outer}, {"rel_tol", c.br.rel_tol}, {"inner_iters", c.br.inner_iters}}},
          {"cg", {{"max_iters", c.cg.max_iters}, {"tol", c.cg.tol}, {"armijo_c", c.cg.armijo_c}}}};
}

TrainerConfig trainer_config_from_json(const json& j, TrainerConfig c) {
  try {
    check_keys(j, to_json(c), "trainer");
    if (j.contains("lm")) {
      const auto& l = j.at("lm");
      check_keys(l, to_json(c)["lm"], "trainer.lm");
      read_field(l, "lambda0", c.lm.lambda0);
      read_field(l, "lambda_up", c.lm.lambda_up);
      read_field(l, "lambda_down", c.lm.lambda_down);
      read_field(l, "lambda_max", c.lm.lambda_max);
      read_field(l, "max_iters", c.lm.max_iters);
      read_field(l, "min_grad", c.lm.min_grad);
      read_field(l, "min_step", c.lm.min_step);
    }
    if (j.contains("br")) {
      const auto& b = j.at("br");
      check_keys(b, to_json(c)["br"], "trainer.br");
      read_field(b, "max_outer", c.br.max_outer);
      read_field(b, "rel_tol", c.br.rel_tol);
      read_field(b, "inner_iters", c.br.inner_iters);
    }
    if (j.contains("cg")) {
      const auto& g = j.at("cg");
      check_keys(g, to_json(c)["cg"], "trainer.cg");
      read_field(g, "max_iters", c.cg.max_iters);
      read_field(g, "tol", c.cg.tol);
      read_field(g, "armijo_c", c.cg.armijo_c);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("trainer config: ") + e.what());
  }
  c.lm.validate();
  if (c.br.max_outer < 1 || c.br.inner_iters < 1 || !(c.br.rel_tol > 0)) {
    throw Error(Errc::invalid_argument, "trainer.br values must be positive");
  }
  if (c.cg.max_iters < 1 || !(c.cg.tol > 0) || !(c.cg.armijo_c > 0 && c.cg.armijo_c < 1)) {
    throw Error(Errc::invalid_argument, "trainer.cg values out of range");
  }
  return c;
}

json to_json(const SvrParams& p) {
  return {{"kernel", std::string(to_string(p.kernel))},
          {"gamma", p.gamma},
          {"c", p.c},
          {"epsilon", p.epsilon},
          {"tol", p.tol},
          {"max_iter", p.max_iter},
          {"cache_mb", p.cache_mb}};
}

SvrParams svr_params_from_json(const json& j, SvrParams p) {
  try {
    check_keys(j, to_json(p), "svr");
    if (j.contains("kernel")) p.kernel = parse_kernel(j.at("kernel").get<std::string>());
    read_field(j, "gamma", p.gamma);
    read_field(j, "c", p.c);
    read_field(j, "epsilon", p.epsilon);
    read_field(j, "tol", p.tol);
    read_field(j, "max_iter", p.max_iter);
    read_field(j, "cache_mb", p.cache_mb);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("svr config: ") + e.what());
  }
  return p;
}

json to_json(const WindowConfig& w) {
  return {{"window_len", w.window_len}, {"hop", w.hop}, {"energy_includes_dc", w.energy_includes_dc}};
}

WindowConfig window_config_from_json(const json& j, WindowConfig w) {
  try {
    check_keys(j, to_json(w), "window");
    read_field(j, "window_len", w.window_len);
    read_field(j, "hop", w.hop);
    read_field(j, "energy_includes_dc", w.energy_includes_dc);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("window config: ") + e.what());
  }
  w.validate();
  return w;
}

ReproduceConfig::ReproduceConfig() {
  trainer.lm.max_iters = 400;
  trainer.br.inner_iters = 10;
  trainer.br.max_outer = 40;
  trainer.cg.max_iters = 2000;
}

void ReproduceConfig::validate() const {
  synth.validate();
  window.validate();
  trainer.lm.validate();
  if (hidden < 1) throw Error(Errc::invalid_argument, "hidden must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(Errc::invalid_argument, "train_frac must be in (0, 1)");
  if (!(independent_frac >= 0.0 && independent_frac < 1.0)) {
    throw Error(Errc::invalid_argument, "independent_frac must be in [0, 1)");
  }
  if (threads < 1) throw Error(Errc::invalid_argument, "threads must be >= 1");
}

json to_json(const ReproduceConfig& c) {
  return {{"seed", c.seed},
          {"synth", to_json(c.synth)},
          {"window", to_json(c.window)},
          {"hidden", c.hidden},
          {"train_frac", c.train_frac},
          {"split", std::string(to_string(c.split))},
          {"independent_frac", c.independent_frac},
          {"trainer", to_json(c.trainer)},
          {"ridge", c.ridge},
          {"svr", to_json(c.svr)},
          {"features_path", c.features_path ? json(c.features_path->generic_string()) : json(nullptr)},
          {"threads", c.threads}};
}

ReproduceConfig reproduce_config_from_json(const json& j) {
  ReproduceConfig c;
  check_keys(j, to_json(c), "reproduce config");
  try {
    read_field(j, "seed", c.seed);
    if (j.contains("synth")) c.synth = synth_config_from_json(j.at("synth"));
    if (j.contains("window")) c.window = window_config_from_json(j.at("window"));
    read_field(j, "hidden", c.hidden);
    read_field(j, "train_frac", c.train_frac);
    if (j.contains("split")) c.split = parse_split_mode(j.at("split").get<std::string>());
    read_field(j, "independent_frac", c.independent_frac);
    if (j.contains("trainer")) c.trainer = trainer_config_from_json(j.at("trainer"), c.trainer);
    read_field(j, "ridge", c.ridge);
    if (j.contains("svr")) c.svr = svr_params_from_json(j.at("svr"));
    if (j.contains("features_path") && !j.at("features_path").is_null()) {
      c.features_path = fs::path(j.at("features_path").get<std::string>());
    }
    read_field(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("reproduce config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
auto run_stage(const std::string& stage, std::map<std::string, double>& seconds, F&& f) {
  const auto t0 = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      seconds[stage] += std::chrono::duration<double>(Clock::now() - t0).count();
    } else {
      auto r = f();
      seconds[stage] += std::chrono::duration<double>(Clock::now() - t0).count();
      return r;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, Error(Errc::io_error, e.what()));
  }
}

std::string display_name(Algorithm a) {
  switch (a) {
    case Algorithm::cg: return "Conjugate-gradient";
    case Algorithm::lm: return "Levenberg-Marquardt";
    case Algorithm::br: return "Bayesian regularization";
    case Algorithm::linreg: return "Linear Regression";
    case Algorithm::svr: return "SVM";
  }
  return "?";
}

}  // namespace

ReproduceSummary reproduce(const ReproduceConfig& cfg, const fs::path& out_dir) {
  ReproduceSummary summary;
  auto& secs = summary.stage_seconds;

  run_stage("config", secs, [&] {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
    write_json(to_json(cfg), out_dir / "config.json");
  });

  std::vector<FeatureVector> rows;
  json data_report = json::object();
  if (cfg.features_path) {
    rows = run_stage("features", secs, [&] { return read_features_csv(*cfg.features_path); });
    data_report["source"] = "features_csv";
  } else {
    const fs::path synth_dir = out_dir / "synth";
    const auto truth = run_stage("synth", secs, [&] {
      auto data = generate(cfg.synth, cfg.threads);
      write_synth(data, synth_dir);
      write_json(to_json(cfg.synth), synth_dir / "synth_config.json");
      return data.truth;
    });
    const auto aligned = run_stage("ingest", secs, [&] {
      auto recordings = load_recordings(synth_dir / "recordings");
      const auto ema = parse_ema(synth_dir / "ema.json");
      return align(std::move(recordings), ema);
    });
    double max_label_error = 0.0;
    std::map<EpisodeKey, double> truth_by_key;
    for (const auto& t : truth.rows) truth_by_key[t.key] = t.ebac;
    for (const auto& l : aligned.labeled) {
      max_label_error = std::max(max_label_error, std::abs(l.label - truth_by_key.at(l.recording.key())));
    }
    data_report = {{"source", "synthetic"},
                   {"recordings", aligned.labeled.size()},
                   {"dropped", aligned.dropped},
                   {"off_schedule", aligned.off_schedule},
                   {"max_label_truth_abs_diff", max_label_error}};
    rows = run_stage("features", secs, [&] {
      std::vector<FeatureVector> out;
      for (const auto& l : aligned.labeled) {
        auto fv = extract(l.recording, l.label, cfg.window);
        out.insert(out.end(), fv.begin(), fv.end());
      }
      write_features_csv(out, out_dir / "features.csv");
      return out;
    });
  }

  struct Splits {
    Dataset train, test, independent;
  };
  const auto splits = run_stage("split", secs, [&] {
    const Dataset all = make_dataset(rows);
    Dataset pool = all;
    Dataset independent;
    if (cfg.independent_frac > 0.0) {
      auto [p, ind] = split(all, 1.0 - cfg.independent_frac, SplitMode::by_episode, derive_seed(cfg.seed, {1}));
      pool = std::move(p);
      independent = std::move(ind);
    }
    auto [train, test] = split(pool, cfg.train_frac, cfg.split, derive_seed(cfg.seed, {2}));
    return Splits{std::move(train), std::move(test), std::move(independent)};
  });
  data_report["windows"] = rows.size();
  data_report["train_rows"] = splits.train.size();
  data_report["test_rows"] = splits.test.size();
  data_report["independent_rows"] = splits.independent.size();

  const Scaling scaling = run_stage("split", secs, [&] { return fit_scaling(splits.train); });
  std::error_code ec;
  fs::create_directories(out_dir / "models", ec);
  fs::create_directories(out_dir / "reports", ec);

  std::vector<std::pair<std::string, const Dataset*>> eval_splits = {{"train", &splits.train},
                                                                      {"test", &splits.test}};
  if (splits.independent.size() > 0) eval_splits.emplace_back("independent", &splits.independent);

  const std::uint64_t init_seed = derive_seed(cfg.seed, {3, cfg.hidden});
  json training = json::object();
  for (Algorithm algo : {Algorithm::cg, Algorithm::lm, Algorithm::br, Algorithm::linreg, Algorithm::svr}) {
    const std::string tag(to_string(algo));
    Regressor model = run_stage("train", secs, [&]() -> Regressor {
      if (is_mlp(algo)) {
        auto init = init_model(splits.train.dim(), cfg.hidden, init_seed, scaling);
        auto result = train_mlp(algo, std::move(init), splits.train, cfg.trainer);
        json rep = to_json(result.report, false);
        if (result.br) rep["br_state"] = to_json(*result.br);
        write_json(rep, out_dir / "reports" / (tag + ".train.json"));
        training[tag] = {{"iterations", result.report.iterations}, {"stop_reason", result.report.stop_reason}};
        return result.model;
      }
      if (algo == Algorithm::linreg) return fit_linreg(splits.train, cfg.ridge, &scaling);
      auto svr = fit_svr(splits.train, cfg.svr, &scaling);
      training[tag] = {{"iterations", svr.diagnostics.iterations}, {"max_violation", svr.diagnostics.max_violation}};
      return svr;
    });
    run_stage("train", secs, [&] { save_model(model, out_dir / "models" / (tag + ".json")); });
    auto evaluation = run_stage("evaluate", secs, [&] { return evaluate_splits(model, eval_splits); });
    summary.results.push_back({algo, std::move(evaluation)});
  }

  run_stage("report", secs, [&] {
    auto find = [&](Algorithm a) -> const Evaluation& {
      for (const auto& r : summary.results) {
        if (r.algorithm == a) return r.evaluation;
      }
      throw Error(Errc::invalid_argument, "missing result");
    };
    auto rows_for = [&](std::initializer_list<Algorithm> algos, const std::string& split_tag, bool br_as_mlp) {
      std::vector<TableRow> out;
      for (Algorithm a : algos) {
        const auto& m = find(a).metrics;
        auto it = m.find(split_tag);
        if (it != m.end()) out.push_back({br_as_mlp && a == Algorithm::br ? "MLP" : display_name(a), it->second});
      }
      return out;
    };
    const auto mlp = {Algorithm::cg, Algorithm::lm, Algorithm::br};
    const auto methods = {Algorithm::br, Algorithm::svr, Algorithm::linreg};
    std::string tables;
    tables += format_mse_r_table("Training algorithms on test data", rows_for(mlp, "test", false)) + "\n";
    if (splits.independent.size() > 0) {
      tables += format_mse_r_table("Training algorithms on independent samples", rows_for(mlp, "independent", false)) + "\n";
    }
    tables += format_five_metric_table("Regression techniques on test data", rows_for(methods, "test", true)) + "\n";
    tables += format_five_metric_table("Regression techniques on all data", rows_for(methods, "all", true));
    summary.tables = tables;
    write_text(tables, out_dir / "tables.txt");

    json metrics = json::object();
    for (const auto& r : summary.results) metrics[std::string(to_string(r.algorithm))] = to_json(r.evaluation);
    write_json({{"data", data_report}, {"training", training}, {"algorithms", metrics}}, out_dir / "metrics.json");

    const auto& main = find(Algorithm::br);
    write_histogram_csv(main.histogram, out_dir / "histogram.csv");
    write_scatter_csv(main, out_dir / "scatter.csv");

    json timing = json::object();
    for (const auto& [stage, s] : secs) timing[stage] = s;
    write_json(timing, out_dir / "timing.json");
    write_manifest(out_dir);
  });
  return summary;
}

}  // namespace gaitbac
