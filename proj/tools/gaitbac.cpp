#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "gaitbac/baselines.hpp"
#include "gaitbac/ebac.hpp"
#include "gaitbac/error.hpp"
#include "gaitbac/eval.hpp"
#include "gaitbac/features.hpp"
#include "gaitbac/ingest.hpp"
#include "gaitbac/mlp.hpp"
#include "gaitbac/pipeline.hpp"
#include "gaitbac/regressor.hpp"
#include "gaitbac/seed.hpp"
#include "gaitbac/synth.hpp"
#include "gaitbac/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gaitbac;

namespace {

std::string version_string() {
  return std::string("gaitbac ") + GAITBAC_VERSION + " (revision " + GAITBAC_REVISION + ", " + GAITBAC_BUILD_TYPE +
         ", " + "gcc " + __VERSION__ + ")";
}

// One command-line option mirrored as a key of the --config JSON file.
struct Binding {
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> load;
  std::function<json()> dump;
};

struct Command {
  CLI::App* app = nullptr;
  std::vector<Binding> bindings;
  std::string config_path;

  template <typename T>
  CLI::Option* opt(const std::string& flag, T& var, const std::string& help) {
    auto* o = app->add_option(flag, var, help);
    add_binding(o, flag, var);
    return o;
  }

  CLI::Option* flag(const std::string& flag, bool& var, const std::string& help) {
    auto* o = app->add_flag(flag, var, help);
    add_binding(o, flag, var);
    return o;
  }

  template <typename T>
  void add_binding(CLI::Option* o, const std::string& flag, T& var) {
    std::string key = flag.substr(flag.find_first_not_of('-'));
    std::replace(key.begin(), key.end(), '-', '_');
    bindings.push_back({o, key, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }});
  }

  // Values from --config fill every option not given on the command line.
  void apply_config() {
    if (config_path.empty()) return;
    const json j = read_json(config_path);
    if (!j.is_object()) throw Error(Errc::schema_violation, config_path + ": config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      auto it = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& b) { return b.key == k; });
      if (it == bindings.end()) throw Error(Errc::schema_violation, "unknown config key '" + k + "'");
      if (it->option->count() > 0) continue;
      try {
        it->load(v);
      } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, "config key '" + k + "': " + e.what());
      }
    }
  }

  json effective() const {
    json j = json::object();
    for (const auto& b : bindings) j[b.key] = b.dump();
    j["command"] = app->get_name();
    j["version"] = GAITBAC_VERSION;
    return j;
  }
};

std::vector<std::size_t> parse_hidden_list(const std::string& list) {
  auto to_num = [&](std::string_view s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v == 0) {
      throw Error(Errc::invalid_argument, "bad hidden size list '" + list + "'");
    }
    return v;
  };
  std::vector<std::size_t> out;
  if (list.find(':') != std::string::npos) {
    std::vector<std::size_t> parts;
    std::string_view rest = list;
    for (std::size_t pos; (pos = rest.find(':')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      parts.push_back(to_num(rest.substr(0, pos)));
    }
    parts.push_back(to_num(rest));
    if (parts.size() != 3 || parts[0] > parts[1]) throw Error(Errc::invalid_argument, "hidden range is lo:hi:step");
    for (std::size_t h = parts[0]; h <= parts[1]; h += parts[2]) out.push_back(h);
  } else {
    std::string_view rest = list;
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      out.push_back(to_num(rest.substr(0, pos)));
    }
    out.push_back(to_num(rest));
  }
  return out;
}

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

std::string num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate blood alcohol content from smartphone gait recordings."};
  app.name("gaitbac");
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string stage = "cli";
  fs::path error_dir;
  std::vector<Command*> commands;

  // ingest
  Command ingest;
  ingest.app = app.add_subcommand("ingest", "Parse sensor logs and EMA reports, attach eBAC labels");
  std::string ingest_in, ingest_ema, ingest_out;
  ingest.opt("--in", ingest_in, "Directory of <subject>_<date>_<hour>.csv sensor logs")->required();
  ingest.opt("--ema", ingest_ema, "EMA JSON file")->required();
  ingest.opt("--out-dir", ingest_out, "Output directory")->required();
  ingest.app->add_option("--config", ingest.config_path, "JSON file with option values");
  commands.push_back(&ingest);

  // ebac
  Command ebac;
  ebac.app = app.add_subcommand("ebac", "Hourly eBAC trace for every EMA session");
  std::string ebac_ema, ebac_out;
  double beta60 = EbacParams{}.beta60;
  ebac.opt("--ema", ebac_ema, "EMA JSON file")->required();
  ebac.opt("--out", ebac_out, "Output CSV")->required();
  ebac.opt("--beta60", beta60, "Elimination rate, g/dl per hour");
  ebac.app->add_option("--config", ebac.config_path, "JSON file with option values");
  commands.push_back(&ebac);

  // features
  Command feat;
  feat.app = app.add_subcommand("features", "Sliding-window features for labeled recordings");
  std::string feat_in, feat_ema, feat_out;
  std::size_t window_len = 128, hop = 64;
  bool no_dc = false;
  feat.opt("--in", feat_in, "Directory of sensor logs")->required();
  feat.opt("--ema", feat_ema, "EMA JSON file")->required();
  feat.opt("--out", feat_out, "Output features CSV")->required();
  feat.opt("--window", window_len, "Window length in samples");
  feat.opt("--hop", hop, "Hop in samples");
  feat.flag("--no-dc", no_dc, "Exclude the DC bin from the energy features");
  feat.app->add_option("--config", feat.config_path, "JSON file with option values");
  commands.push_back(&feat);

  // synth
  Command syn;
  syn.app = app.add_subcommand("synth", "Generate a synthetic cohort in the ingest formats");
  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  int synth_subjects = 0, synth_sessions = 0;
  unsigned synth_threads = 1;
  syn.app->add_option("--config", synth_config, "Synthetic cohort JSON config");
  auto* synth_seed_opt = syn.app->add_option("--seed", synth_seed, "Generator seed");
  auto* synth_subj_opt = syn.app->add_option("--n-subjects", synth_subjects, "Number of subjects");
  auto* synth_sess_opt = syn.app->add_option("--sessions", synth_sessions, "Sessions per subject");
  syn.app->add_option("--threads", synth_threads, "Worker threads");
  syn.app->add_option("--out-dir", synth_out, "Output directory")->required();

  // train
  Command tr;
  tr.app = app.add_subcommand("train", "Fit a model on a features CSV");
  std::string tr_features, tr_algo = "br", tr_split = "random", tr_out, tr_report, tr_kernel = "rbf";
  std::size_t tr_hidden = 45;
  double tr_frac = 0.7, tr_ridge = 1e-8;
  std::uint64_t tr_seed = 1;
  int tr_max_iters = LmConfig{}.max_iters, tr_inner = BrConfig{}.inner_iters, tr_outer = BrConfig{}.max_outer;
  int tr_cg_iters = CgConfig{}.max_iters;
  double svr_c = SvrParams{}.c, svr_gamma = SvrParams{}.gamma, svr_eps = SvrParams{}.epsilon;
  tr.opt("--features", tr_features, "Features CSV")->required();
  tr.opt("--algo", tr_algo, "cg | lm | br | linreg | svr");
  tr.opt("--hidden", tr_hidden, "Hidden neurons");
  tr.opt("--train-frac", tr_frac, "Training share of the split");
  tr.opt("--split", tr_split, "random | episode");
  tr.opt("--seed", tr_seed, "Seed for split and initialisation");
  tr.opt("--out", tr_out, "Model JSON")->required();
  tr.opt("--report", tr_report, "Training report JSON");
  tr.opt("--max-iters", tr_max_iters, "LM iteration budget (LM and BR)");
  tr.opt("--br-inner-iters", tr_inner, "LM iterations per evidence update");
  tr.opt("--br-max-outer", tr_outer, "Evidence updates");
  tr.opt("--cg-max-iters", tr_cg_iters, "CG iterations");
  tr.opt("--ridge", tr_ridge, "Linear regression ridge");
  tr.opt("--kernel", tr_kernel, "SVR kernel: rbf | linear");
  tr.opt("--svr-c", svr_c, "SVR box constraint");
  tr.opt("--svr-gamma", svr_gamma, "RBF width");
  tr.opt("--svr-epsilon", svr_eps, "SVR tube half-width");
  tr.app->add_option("--config", tr.config_path, "JSON file with option values");
  commands.push_back(&tr);

  // sweep
  Command sw;
  sw.app = app.add_subcommand("sweep", "Cross-validated MSE per hidden-layer size");
  std::string sw_features, sw_hidden = "5:60:5", sw_algo = "br", sw_out;
  std::size_t sw_folds = 5;
  std::uint64_t sw_seed = 1;
  unsigned sw_threads = 1;
  int sw_max_iters = LmConfig{}.max_iters;
  sw.opt("--features", sw_features, "Features CSV")->required();
  sw.opt("--hidden", sw_hidden, "lo:hi:step or a comma list");
  sw.opt("--folds", sw_folds, "Cross-validation folds");
  sw.opt("--algo", sw_algo, "cg | lm | br");
  sw.opt("--seed", sw_seed, "Seed");
  sw.opt("--threads", sw_threads, "Worker threads");
  sw.opt("--max-iters", sw_max_iters, "LM iteration budget per trial");
  sw.opt("--out", sw_out, "Output CSV")->required();
  sw.app->add_option("--config", sw.config_path, "JSON file with option values");
  commands.push_back(&sw);

  // evaluate
  Command ev;
  ev.app = app.add_subcommand("evaluate", "Score a saved model on a features CSV");
  std::string ev_model, ev_features, ev_out;
  ev.opt("--model", ev_model, "Model JSON")->required();
  ev.opt("--features", ev_features, "Features CSV")->required();
  ev.opt("--out-dir", ev_out, "Output directory")->required();
  ev.app->add_option("--config", ev.config_path, "JSON file with option values");
  commands.push_back(&ev);

  // reproduce
  Command rep;
  rep.app = app.add_subcommand("reproduce", "Run synth, ingest, features, training and evaluation end to end");
  std::string rep_config, rep_out, rep_features, rep_split;
  std::uint64_t rep_seed = 0;
  unsigned rep_threads = 1;
  std::size_t rep_hidden = 0;
  double rep_frac = 0;
  rep.app->add_option("--config", rep_config, "Pipeline JSON config");
  rep.app->add_option("--out-dir", rep_out, "Output directory")->required();
  auto* rep_seed_opt = rep.app->add_option("--seed", rep_seed, "Global seed");
  auto* rep_threads_opt = rep.app->add_option("--threads", rep_threads, "Worker threads");
  auto* rep_features_opt = rep.app->add_option("--features", rep_features, "Use this features CSV instead of synth");
  auto* rep_hidden_opt = rep.app->add_option("--hidden", rep_hidden, "Hidden neurons");
  auto* rep_frac_opt = rep.app->add_option("--train-frac", rep_frac, "Training share");
  auto* rep_split_opt = rep.app->add_option("--split", rep_split, "random | episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return 2;
  }

  auto fail = [&](const Error& e) {
    std::cerr << error_json(stage, e).dump(2) << '\n';
    if (!error_dir.empty()) write_error_json(error_dir, stage, e);
    return exit_code_for(e.code());
  };

  try {
    for (auto* c : commands) {
      if (c->app->parsed()) {
        stage = "config";
        c->apply_config();
      }
    }

    if (ingest.app->parsed()) {
      error_dir = ingest_out;
      ensure_dir(ingest_out);
      write_json(ingest.effective(), fs::path(ingest_out) / "config.json");
      stage = "ingest";
      auto recordings = load_recordings(ingest_in);
      const auto ema = parse_ema(fs::path(ingest_ema));
      const auto aligned = align(std::move(recordings), ema);
      std::ofstream out(fs::path(ingest_out) / "labels.csv", std::ios::binary);
      out << "subject_id,session_date,hour,label,samples,sample_rate_hz\n";
      for (const auto& l : aligned.labeled) {
        const auto& r = l.recording;
        out << r.subject_id << ',' << r.session_date << ',' << r.hour_slot << ',' << num(l.label) << ','
            << r.samples.size() << ',' << num(r.sample_rate_hz) << '\n';
      }
      out.close();
      write_json({{"recordings", aligned.labeled.size()},
                  {"dropped", aligned.dropped},
                  {"off_schedule", aligned.off_schedule},
                  {"profiles", ema.profiles.size()},
                  {"timelines", ema.timelines.size()}},
                 fs::path(ingest_out) / "ingest.json");
      write_manifest(ingest_out);
    } else if (ebac.app->parsed()) {
      ensure_parent(ebac_out);
      write_json(ebac.effective(), sidecar(ebac_out, ".config.json"));
      stage = "ebac";
      const auto ema = parse_ema(fs::path(ebac_ema));
      EbacParams params;
      params.beta60 = beta60;
      std::ofstream out(ebac_out, std::ios::binary);
      if (!out) throw Error(Errc::io_error, "cannot write " + ebac_out);
      out << "subject_id,session_date,hour,ebac\n";
      for (const auto& tl : ema.timelines) {
        const auto* profile = ema.find_profile(tl.subject_id);
        if (!profile) throw Error(Errc::schema_violation, "no profile for " + tl.subject_id);
        for (const auto& [hour, value] : ebac_timeline(tl, *profile, params).values) {
          out << tl.subject_id << ',' << tl.session_date << ',' << hour << ',' << num(value) << '\n';
        }
      }
    } else if (feat.app->parsed()) {
      ensure_parent(feat_out);
      write_json(feat.effective(), sidecar(feat_out, ".config.json"));
      stage = "ingest";
      auto recordings = load_recordings(feat_in);
      const auto ema = parse_ema(fs::path(feat_ema));
      const auto aligned = align(std::move(recordings), ema);
      stage = "features";
      WindowConfig wc{window_len, hop, !no_dc};
      std::vector<FeatureVector> rows;
      for (const auto& l : aligned.labeled) {
        auto fv = extract(l.recording, l.label, wc);
        rows.insert(rows.end(), fv.begin(), fv.end());
      }
      write_features_csv(rows, fs::path(feat_out));
    } else if (syn.app->parsed()) {
      error_dir = synth_out;
      stage = "config";
      SynthConfig cfg = synth_config.empty() ? SynthConfig{} : synth_config_from_json(read_json(synth_config));
      if (synth_seed_opt->count()) cfg.seed = synth_seed;
      if (synth_subj_opt->count()) cfg.n_subjects = synth_subjects;
      if (synth_sess_opt->count()) cfg.sessions_per_subject = synth_sessions;
      cfg.validate();
      ensure_dir(synth_out);
      write_json(to_json(cfg), fs::path(synth_out) / "config.json");
      stage = "synth";
      write_synth(generate(cfg, std::max(1u, synth_threads)), synth_out);
      write_manifest(synth_out);
    } else if (tr.app->parsed()) {
      ensure_parent(tr_out);
      write_json(tr.effective(), sidecar(tr_out, ".config.json"));
      const Algorithm algo = parse_algorithm(tr_algo);
      const SplitMode mode = parse_split_mode(tr_split);
      stage = "features";
      const Dataset data = make_dataset(read_features_csv(fs::path(tr_features)));
      stage = "split";
      auto [train, test] = split(data, tr_frac, mode, derive_seed(tr_seed, {2}));
      const Scaling scaling = fit_scaling(train);
      stage = "train";
      json report = {{"algorithm", tr_algo}, {"seed", tr_seed}, {"train_rows", train.size()},
                     {"test_rows", test.size()}};
      Regressor model;
      if (is_mlp(algo)) {
        TrainerConfig tc;
        tc.lm.max_iters = tr_max_iters;
        tc.br.inner_iters = tr_inner;
        tc.br.max_outer = tr_outer;
        tc.cg.max_iters = tr_cg_iters;
        auto init = init_model(train.dim(), tr_hidden, derive_seed(tr_seed, {3, tr_hidden}), scaling);
        auto result = train_mlp(algo, std::move(init), train, tc);
        report["training"] = to_json(result.report);
        if (result.br) report["br_state"] = to_json(*result.br);
        model = std::move(result.model);
      } else if (algo == Algorithm::linreg) {
        model = fit_linreg(train, tr_ridge, &scaling);
      } else {
        SvrParams p;
        p.kernel = parse_kernel(tr_kernel);
        p.c = svr_c;
        p.gamma = svr_gamma;
        p.epsilon = svr_eps;
        model = fit_svr(train, p, &scaling);
      }
      save_model(model, tr_out);
      stage = "evaluate";
      std::vector<std::pair<std::string, const Dataset*>> splits = {{"train", &train}};
      if (test.size() > 0) splits.emplace_back("test", &test);
      report["evaluation"] = to_json(evaluate_splits(model, splits));
      if (!tr_report.empty()) {
        ensure_parent(tr_report);
        write_json(report, tr_report);
      }
    } else if (sw.app->parsed()) {
      ensure_parent(sw_out);
      write_json(sw.effective(), sidecar(sw_out, ".config.json"));
      const auto candidates = parse_hidden_list(sw_hidden);
      const Algorithm algo = parse_algorithm(sw_algo);
      stage = "features";
      const Dataset data = make_dataset(read_features_csv(fs::path(sw_features)));
      stage = "sweep";
      SweepOptions opts;
      opts.threads = std::max(1u, sw_threads);
      opts.trainer.lm.max_iters = sw_max_iters;
      const auto result = sweep_hidden(data, candidates, sw_folds, algo, sw_seed, opts);
      std::ofstream out(sw_out, std::ios::binary);
      if (!out) throw Error(Errc::io_error, "cannot write " + sw_out);
      out << "hidden,cv_mse";
      for (std::size_t f = 0; f < sw_folds; ++f) out << ",fold_" << f + 1;
      out << ",selected\n";
      for (const auto& row : result.rows) {
        out << row.hidden << ',' << (row.failed ? std::string("nan") : num(row.cv_mse));
        for (std::size_t f = 0; f < sw_folds; ++f) out << ',' << (f < row.fold_mse.size() ? num(row.fold_mse[f]) : "");
        out << ',' << (row.hidden == result.selected_hidden ? 1 : 0) << '\n';
      }
      std::cout << "selected hidden size: " << result.selected_hidden << '\n';
    } else if (ev.app->parsed()) {
      error_dir = ev_out;
      ensure_dir(ev_out);
      write_json(ev.effective(), fs::path(ev_out) / "config.json");
      stage = "model";
      const Regressor model = load_model(ev_model);
      stage = "features";
      const Dataset data = make_dataset(read_features_csv(fs::path(ev_features)));
      stage = "evaluate";
      const Evaluation e = evaluate_splits(model, {{"test", &data}});
      write_json(to_json(e), fs::path(ev_out) / "metrics.json");
      write_histogram_csv(e.histogram, fs::path(ev_out) / "histogram.csv");
      write_scatter_csv(e, fs::path(ev_out) / "scatter.csv");
      const std::vector<TableRow> rows = {{algorithm_tag(model), e.metrics.at("test")}};
      const std::string tables =
          format_mse_r_table("Model on " + ev_features, rows) + "\n" + format_five_metric_table("Metrics", rows);
      write_text(tables, fs::path(ev_out) / "tables.txt");
      std::cout << tables;
      write_manifest(ev_out);
    } else if (rep.app->parsed()) {
      error_dir = rep_out;
      stage = "config";
      ReproduceConfig cfg = rep_config.empty() ? ReproduceConfig{} : reproduce_config_from_json(read_json(rep_config));
      if (rep_seed_opt->count()) {
        cfg.seed = rep_seed;
        cfg.synth.seed = rep_seed;
      }
      if (rep_threads_opt->count()) cfg.threads = rep_threads;
      if (rep_features_opt->count()) cfg.features_path = rep_features;
      if (rep_hidden_opt->count()) cfg.hidden = rep_hidden;
      if (rep_frac_opt->count()) cfg.train_frac = rep_frac;
      if (rep_split_opt->count()) cfg.split = parse_split_mode(rep_split);
      cfg.validate();
      try {
        const auto summary = reproduce(cfg, rep_out);
        std::cout << summary.tables;
      } catch (const StageError& e) {
        stage = e.stage();
        throw;
      }
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(Errc::io_error, e.what()));
  }
  return 0;
}
