// Command-line front end: gen, enum, train, eval, select-sql, run, compare,
// report. Exit codes: 0 success, 1 usage, 2 data error, 3 stage failure.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wsqa/pipeline.hpp"

namespace {

using namespace wsqa;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const StageError*>(&e)) return 3;
  return 2;
}

ojson read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  ojson j;
  in >> j;
  return j;
}

GenConfig parse_gen_flags(CLI::App* cmd, GenConfig& g, std::string& family) {
  cmd->add_option("--family", family, "span|discrete|sql");
  cmd->add_option("--n-train", g.n_train);
  cmd->add_option("--n-dev", g.n_dev);
  cmd->add_option("--n-test", g.n_test);
  cmd->add_option("--seed", g.seed);
  cmd->add_option("--vocab-size", g.vocab_size);
  cmd->add_option("--distractor-mentions", g.distractor_mentions);
  cmd->add_option("--n-doc-numbers", g.n_doc_numbers);
  cmd->add_option("--value-min", g.value_min);
  cmd->add_option("--value-max", g.value_max);
  cmd->add_option("--n-rows", g.n_rows);
  cmd->add_option("--n-cols", g.n_cols);
  cmd->add_option("--collision-boost", g.collision_boost);
  cmd->add_option("--hard-split-fraction", g.hard_split_fraction);
  return g;
}

std::string default_sidecar(const std::string& data_path) {
  std::string out = data_path;
  if (out.size() > 6 && out.substr(out.size() - 6) == ".jsonl") out.resize(out.size() - 6);
  return out + ".solutions.jsonl";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly supervised QA learning laboratory"};
  app.require_subcommand(1);

  // ----- gen -----
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic benchmark");
  GenConfig gen_cfg;
  std::string gen_family = "span", gen_out = "data";
  parse_gen_flags(gen_cmd, gen_cfg, gen_family);
  gen_cmd->add_option("--out", gen_out, "output directory");

  // ----- enum -----
  auto* enum_cmd = app.add_subcommand("enum", "precompute solution sets");
  std::string enum_data, enum_out;
  int enum_zcap = EnumConfig().z_cap;
  enum_cmd->add_option("--data", enum_data)->required();
  enum_cmd->add_option("--out", enum_out, "sidecar path (default: <data>.solutions.jsonl)");
  enum_cmd->add_option("--z-cap", enum_zcap);

  // ----- train -----
  auto* train_cmd = app.add_subcommand("train", "train one method");
  std::string tr_train, tr_dev, tr_train_sc, tr_dev_sc, tr_method = "mim", tr_out = "run";
  LearnConfig tr_cfg;
  train_cmd->add_option("--train", tr_train)->required();
  train_cmd->add_option("--dev", tr_dev)->required();
  train_cmd->add_option("--train-solutions", tr_train_sc);
  train_cmd->add_option("--dev-solutions", tr_dev_sc);
  train_cmd->add_option("--method", tr_method, "first_only|mml|hard_em|hard_em_thres|vae|mim");
  train_cmd->add_option("--epochs", tr_cfg.epochs);
  train_cmd->add_option("--seed", tr_cfg.seed);
  train_cmd->add_option("--lr-task", tr_cfg.lr_task);
  train_cmd->add_option("--lr-recon", tr_cfg.lr_recon);
  train_cmd->add_option("--tau", tr_cfg.tau);
  train_cmd->add_option("--lambda", tr_cfg.lambda);
  train_cmd->add_option("--switch-step", tr_cfg.mim_switch_step);
  train_cmd->add_option("--z-cap", tr_cfg.enum_cfg.z_cap);
  train_cmd->add_option("--out", tr_out, "run directory");

  // ----- eval -----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_model, ev_data, ev_sc, ev_out;
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_option("--solutions", ev_sc);
  eval_cmd->add_option("--out", ev_out, "metrics JSON path (default stdout)");

  // ----- select-sql -----
  auto* sel_cmd = app.add_subcommand("select-sql", "sql selection probe");
  std::string sl_model, sl_recon, sl_data, sl_sc;
  std::uint64_t sl_seed = 11;
  sel_cmd->add_option("--model", sl_model, "task model checkpoint");
  sel_cmd->add_option("--recon", sl_recon, "reconstructor checkpoint");
  sel_cmd->add_option("--data", sl_data)->required();
  sel_cmd->add_option("--solutions", sl_sc);
  sel_cmd->add_option("--seed", sl_seed);

  // ----- run -----
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a config file");
  std::string run_config_path, run_out_override;
  run_cmd->add_option("config", run_config_path, "run config JSON")->required();
  run_cmd->add_option("--out", run_out_override, "override output directory");

  // ----- compare -----
  auto* cmp_cmd = app.add_subcommand("compare", "all methods x seeds on one dataset");
  std::string cmp_config_path, cmp_out_csv = "compare.csv";
  cmp_cmd->add_option("config", cmp_config_path, "run config JSON")->required();
  cmp_cmd->add_option("--out-csv", cmp_out_csv);

  // ----- report -----
  auto* rep_cmd = app.add_subcommand("report", "summarize a run directory");
  std::string rep_dir;
  rep_cmd->add_option("dir", rep_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      auto fam = family_from_name(gen_family);
      if (!fam) throw DataError("unknown family: " + gen_family);
      gen_cfg.family = *fam;
      Benchmark b = generate_benchmark(gen_cfg);
      std::filesystem::create_directories(gen_out);
      save_dataset(b.train, gen_out + "/train.jsonl");
      save_dataset(b.dev, gen_out + "/dev.jsonl");
      save_dataset(b.test, gen_out + "/test.jsonl");
      ojson m;
      m["seed_used"] = b.seed_used;
      m["gate_attempts"] = b.gate_attempts;
      m["gate_separation"] = b.gate_separation;
      m["train_z_median"] = b.train_z_median;
      m["train_z_mean"] = b.train_z_mean;
      m["config_hash"] = config_hash(run_config_to_json(RunConfig{.gen = gen_cfg}));
      write_text_file(gen_out + "/gen_manifest.json", m.dump(2) + "\n");
      std::printf("wrote %s/{train,dev,test}.jsonl (train |Z| median %.1f, mean %.2f)\n",
                  gen_out.c_str(), b.train_z_median, b.train_z_mean);
    } else if (enum_cmd->parsed()) {
      Dataset d = load_dataset(enum_data);
      EnumConfig e;
      e.z_cap = enum_zcap;
      auto sets = enumerate_dataset(d, e);
      std::string out = enum_out.empty() ? default_sidecar(enum_data) : enum_out;
      save_sidecar(sets, out);
      std::size_t total = 0;
      for (const auto& s : sets) total += s.size();
      std::printf("wrote %s (%zu instances, %zu solutions)\n", out.c_str(), sets.size(), total);
    } else if (train_cmd->parsed()) {
      auto m = method_from_name(tr_method);
      if (!m) throw DataError("unknown method: " + tr_method);
      tr_cfg.method = *m;
      RunConfig rc;
      rc.train_path = tr_train;
      rc.dev_path = tr_dev;
      rc.test_path = tr_dev;  // dev doubles as test for a bare train run
      rc.learn = tr_cfg;
      rc.out_dir = tr_out;
      Dataset train_ds = load_dataset(tr_train);
      Dataset dev_ds = load_dataset(tr_dev);
      SolutionSidecar train_sc =
          load_sidecar(tr_train_sc.empty() ? default_sidecar(tr_train) : tr_train_sc);
      SolutionSidecar dev_sc =
          load_sidecar(tr_dev_sc.empty() ? default_sidecar(tr_dev) : tr_dev_sc);
      TrainResult r = train(tr_cfg, train_ds, train_sc, dev_ds, dev_sc);
      std::filesystem::create_directories(tr_out);
      write_text_file(tr_out + "/metrics.csv", format_metrics_csv(r.epochs));
      ojson cfg_json = run_config_to_json(rc);
      std::string hash = config_hash(cfg_json);
      write_text_file(tr_out + "/config.json", cfg_json.dump(2) + "\n");
      ojson w = ojson::object();
      for (const auto& [name, value] : r.model.weights_view()) w[name] = value;
      ojson ck;
      ck["version"] = 1;
      ck["kind"] = "task_model";
      ck["extractor"] = TaskModel::kExtractorId;
      ck["config_hash"] = hash;
      ck["weights"] = std::move(w);
      write_text_file(tr_out + "/task_model.json", ck.dump(2) + "\n");
      std::printf("best epoch %d, dev rows in %s/metrics.csv\n", r.best_epoch, tr_out.c_str());
    } else if (eval_cmd->parsed()) {
      Dataset d = load_dataset(ev_data);
      SolutionSidecar sc = load_sidecar(ev_sc.empty() ? default_sidecar(ev_data) : ev_sc);
      ojson ck = read_json_file(ev_model);
      TaskModel model;
      FeatureVector w;
      for (auto it = ck["weights"].begin(); it != ck["weights"].end(); ++it)
        w[it.key()] = it.value().get<double>();
      model.load_weights(w);
      MetricsReport r = evaluate_model(model, d, sc, EnumConfig());
      std::string out = metrics_to_json(r).dump(2) + "\n";
      if (ev_out.empty())
        std::fputs(out.c_str(), stdout);
      else
        write_text_file(ev_out, out);
    } else if (sel_cmd->parsed()) {
      if (sl_model.empty() == sl_recon.empty())
        throw DataError("pass exactly one of --model / --recon");
      Dataset d = load_dataset(sl_data);
      SolutionSidecar sc = load_sidecar(sl_sc.empty() ? default_sidecar(sl_data) : sl_sc);
      SelectionResult r;
      if (!sl_model.empty()) {
        ojson ck = read_json_file(sl_model);
        TaskModel model;
        FeatureVector w;
        for (auto it = ck["weights"].begin(); it != ck["weights"].end(); ++it)
          w[it.key()] = it.value().get<double>();
        model.load_weights(w);
        r = sql_selection_eval(
            [&](const Instance& inst, const Solution& z) {
              SparseFeats f = model.extract(inst, z);
              return model.score(f);
            },
            d, sc, sl_seed);
      } else {
        ojson ck = read_json_file(sl_recon);
        Reconstructor recon(ck["vocab"].get<std::vector<Token>>());
        FeatureVector w;
        for (auto it = ck["weights"].begin(); it != ck["weights"].end(); ++it)
          w[it.key()] = it.value().get<double>();
        recon.load_weights(w);
        r = sql_selection_eval(
            [&](const Instance& inst, const Solution& z) {
              return recon.loglik(inst.question, inst.reference, z);
            },
            d, sc, sl_seed);
      }
      std::printf("selection accuracy %.4f over %d instances (%d skipped)\n", r.accuracy,
                  r.n_scored, r.n_skipped);
    } else if (run_cmd->parsed()) {
      RunConfig rc = run_config_from_json(read_json_file(run_config_path));
      if (!run_out_override.empty()) rc.out_dir = run_out_override;
      RunOutcome out = run_experiment(rc);
      std::printf("run dir: %s\n", out.run_dir.c_str());
      std::printf("test em %.4f f1 %.4f exec %.4f lf %.4f\n", out.test_metrics.answer_em,
                  out.test_metrics.answer_f1, out.test_metrics.exec_acc,
                  out.test_metrics.lf_acc);
      if (out.selection_task >= 0.0)
        std::printf("selection: task %.4f recon %.4f\n", out.selection_task,
                    out.selection_recon);
    } else if (cmp_cmd->parsed()) {
      RunConfig rc = run_config_from_json(read_json_file(cmp_config_path));
      auto rows = compare_methods(rc, cmp_out_csv);
      std::printf("%-14s %-6s %8s %8s %8s %8s %9s\n", "method", "seed", "em", "f1", "exec", "lf",
                  "selection");
      for (const auto& r : rows)
        std::printf("%-14s %-6llu %8.4f %8.4f %8.4f %8.4f %9.4f\n", r.method.c_str(),
                    static_cast<unsigned long long>(r.seed), r.test_metrics.answer_em,
                    r.test_metrics.answer_f1, r.test_metrics.exec_acc, r.test_metrics.lf_acc,
                    r.selection);
      std::printf("wrote %s\n", cmp_out_csv.c_str());
    } else if (rep_cmd->parsed()) {
      ojson manifest = read_json_file(rep_dir + "/manifest.json");
      std::printf("config_hash: %s\n", manifest["config_hash"].get<std::string>().c_str());
      std::printf("wall_clock_ms: %lld\n", manifest["wall_clock_ms"].get<long long>());
      std::ifstream metrics(rep_dir + "/metrics.csv");
      if (metrics) {
        std::string line;
        while (std::getline(metrics, line)) std::printf("%s\n", line.c_str());
      }
      std::ifstream tm(rep_dir + "/test_metrics.json");
      if (tm) {
        ojson j;
        tm >> j;
        std::printf("test: em %.4f f1 %.4f exec %.4f lf %.4f\n", j["answer_em"].get<double>(),
                    j["answer_f1"].get<double>(), j["exec_acc"].get<double>(),
                    j["lf_acc"].get<double>());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
