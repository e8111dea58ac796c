#include "wsqa/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace wsqa {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out.flush()) throw DataError("write failure: " + path);
}

namespace {

ojson enum_config_to_json(const EnumConfig& e) {
  ojson j;
  ojson consts = ojson::array();
  for (const auto& c : e.constants) consts.push_back(c.str());
  j["constants"] = std::move(consts);
  j["max_terms"] = e.max_terms;
  j["max_conds"] = e.max_conds;
  j["kv_subset_max"] = e.kv_subset_max;
  j["max_cond_span_len"] = e.max_cond_span_len;
  j["max_span_len"] = e.max_span_len;
  j["count_subset_budget"] = e.count_subset_budget;
  j["z_cap"] = e.z_cap;
  return j;
}

EnumConfig enum_config_from_json(const ojson& j) {
  EnumConfig e;
  if (j.contains("constants")) {
    e.constants.clear();
    for (const auto& c : j["constants"]) e.constants.push_back(jdecimal(c, "constant"));
  }
  if (j.contains("max_terms")) e.max_terms = j["max_terms"].get<int>();
  if (j.contains("max_conds")) e.max_conds = j["max_conds"].get<int>();
  if (j.contains("kv_subset_max")) e.kv_subset_max = j["kv_subset_max"].get<int>();
  if (j.contains("max_cond_span_len")) e.max_cond_span_len = j["max_cond_span_len"].get<int>();
  if (j.contains("max_span_len")) e.max_span_len = j["max_span_len"].get<int>();
  if (j.contains("count_subset_budget"))
    e.count_subset_budget = j["count_subset_budget"].get<long long>();
  if (j.contains("z_cap")) e.z_cap = j["z_cap"].get<int>();
  return e;
}

ojson gen_config_to_json(const GenConfig& g) {
  ojson j;
  j["family"] = family_name(g.family);
  j["n_train"] = g.n_train;
  j["n_dev"] = g.n_dev;
  j["n_test"] = g.n_test;
  j["seed"] = g.seed;
  j["vocab_size"] = g.vocab_size;
  j["distractor_mentions"] = g.distractor_mentions;
  j["n_doc_numbers"] = g.n_doc_numbers;
  j["value_min"] = g.value_min;
  j["value_max"] = g.value_max;
  j["n_rows"] = g.n_rows;
  j["n_cols"] = g.n_cols;
  j["collision_boost"] = g.collision_boost;
  j["hard_split_fraction"] = g.hard_split_fraction;
  return j;
}

GenConfig gen_config_from_json(const ojson& j) {
  GenConfig g;
  if (j.contains("family")) {
    auto f = family_from_name(j["family"].get<std::string>());
    if (!f) throw SchemaError("unknown family in gen config");
    g.family = *f;
  }
  if (j.contains("n_train")) g.n_train = j["n_train"].get<int>();
  if (j.contains("n_dev")) g.n_dev = j["n_dev"].get<int>();
  if (j.contains("n_test")) g.n_test = j["n_test"].get<int>();
  if (j.contains("seed")) g.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("vocab_size")) g.vocab_size = j["vocab_size"].get<int>();
  if (j.contains("distractor_mentions"))
    g.distractor_mentions = j["distractor_mentions"].get<int>();
  if (j.contains("n_doc_numbers")) g.n_doc_numbers = j["n_doc_numbers"].get<int>();
  if (j.contains("value_min")) g.value_min = j["value_min"].get<long long>();
  if (j.contains("value_max")) g.value_max = j["value_max"].get<long long>();
  if (j.contains("n_rows")) g.n_rows = j["n_rows"].get<int>();
  if (j.contains("n_cols")) g.n_cols = j["n_cols"].get<int>();
  if (j.contains("collision_boost")) g.collision_boost = j["collision_boost"].get<double>();
  if (j.contains("hard_split_fraction"))
    g.hard_split_fraction = j["hard_split_fraction"].get<double>();
  return g;
}

ojson learn_config_to_json(const LearnConfig& l) {
  ojson j;
  j["method"] = method_name(l.method);
  j["epochs"] = l.epochs;
  j["lr_task"] = l.lr_task;
  j["lr_recon"] = l.lr_recon;
  j["seed"] = l.seed;
  j["tau"] = l.tau;
  j["threshold_n0"] = l.threshold_n0;
  j["lambda"] = l.lambda;
  j["vae_samples"] = l.vae_samples;
  j["mim_switch_step"] = l.mim_switch_step;
  j["recon_repeats"] = l.recon_repeats;
  j["vae_stage1_epochs"] = l.vae_stage1_epochs;
  j["vae_stage2_epochs"] = l.vae_stage2_epochs;
  j["beam_size"] = l.beam_size;
  j["annealing"] = l.annealing;
  j["enum"] = enum_config_to_json(l.enum_cfg);
  return j;
}

LearnConfig learn_config_from_json(const ojson& j) {
  LearnConfig l;
  if (j.contains("method")) {
    auto m = method_from_name(j["method"].get<std::string>());
    if (!m) throw SchemaError("unknown method");
    l.method = *m;
  }
  if (j.contains("epochs")) l.epochs = j["epochs"].get<int>();
  if (j.contains("lr_task")) l.lr_task = j["lr_task"].get<double>();
  if (j.contains("lr_recon")) l.lr_recon = j["lr_recon"].get<double>();
  if (j.contains("seed")) l.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tau")) l.tau = j["tau"].get<long long>();
  if (j.contains("threshold_n0")) l.threshold_n0 = j["threshold_n0"].get<int>();
  if (j.contains("lambda")) l.lambda = j["lambda"].get<double>();
  if (j.contains("vae_samples")) l.vae_samples = j["vae_samples"].get<int>();
  if (j.contains("mim_switch_step")) l.mim_switch_step = j["mim_switch_step"].get<long long>();
  if (j.contains("recon_repeats")) l.recon_repeats = j["recon_repeats"].get<int>();
  if (j.contains("vae_stage1_epochs")) l.vae_stage1_epochs = j["vae_stage1_epochs"].get<int>();
  if (j.contains("vae_stage2_epochs")) l.vae_stage2_epochs = j["vae_stage2_epochs"].get<int>();
  if (j.contains("beam_size")) l.beam_size = j["beam_size"].get<int>();
  if (j.contains("annealing")) l.annealing = j["annealing"].get<int>();
  if (j.contains("enum")) l.enum_cfg = enum_config_from_json(j["enum"]);
  return l;
}

}  // namespace

ojson run_config_to_json(const RunConfig& cfg) {
  ojson j;
  if (cfg.gen) j["gen"] = gen_config_to_json(*cfg.gen);
  if (!cfg.train_path.empty()) {
    ojson p;
    p["train"] = cfg.train_path;
    p["dev"] = cfg.dev_path;
    p["test"] = cfg.test_path;
    j["paths"] = std::move(p);
  }
  j["hard_fraction"] = cfg.hard_fraction;
  j["learn"] = learn_config_to_json(cfg.learn);
  j["eval_seeds"] = cfg.eval_seeds;
  j["out_dir"] = cfg.out_dir;
  return j;
}

RunConfig run_config_from_json(const ojson& j) {
  RunConfig cfg;
  if (j.contains("gen")) cfg.gen = gen_config_from_json(j["gen"]);
  if (j.contains("paths")) {
    cfg.train_path = jstr(j["paths"], "train");
    cfg.dev_path = jstr(j["paths"], "dev");
    cfg.test_path = jstr(j["paths"], "test");
  }
  if (j.contains("hard_fraction")) cfg.hard_fraction = j["hard_fraction"].get<double>();
  if (j.contains("learn")) cfg.learn = learn_config_from_json(j["learn"]);
  if (j.contains("eval_seeds")) cfg.eval_seeds = j["eval_seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

std::string config_hash(const ojson& j) {
  std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_metrics_csv(const std::vector<EpochRow>& rows) {
  std::string out = "epoch,steps,gamma,dev_em,dev_f1,dev_exec,dev_lf\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%lld,%.9f,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.steps,
                  r.gamma, r.dev_em, r.dev_f1, r.dev_exec, r.dev_lf);
    out += line;
  }
  return out;
}

namespace {

struct LoadedData {
  Dataset train, dev, test;
  SolutionSidecar train_sc, dev_sc, test_sc;
};

SolutionSidecar to_sidecar(std::vector<SolutionSet> sets) {
  SolutionSidecar out;
  for (auto& s : sets) {
    std::string id = s.instance_id;
    out.emplace(std::move(id), std::move(s));
  }
  return out;
}

LoadedData prepare_data(const RunConfig& cfg, const std::string& run_dir, ojson& manifest) {
  LoadedData data;
  const std::string data_dir = run_dir + "/data";
  fs::create_directories(data_dir);

  if (cfg.gen) {
    Benchmark b;
    try {
      b = generate_benchmark(*cfg.gen);
    } catch (const std::exception& e) {
      throw StageError("gen", e.what());
    }
    data.train = std::move(b.train);
    data.dev = std::move(b.dev);
    data.test = std::move(b.test);
    save_dataset(data.train, data_dir + "/train.jsonl");
    save_dataset(data.dev, data_dir + "/dev.jsonl");
    save_dataset(data.test, data_dir + "/test.jsonl");
    manifest["gen_seed_used"] = b.seed_used;
    manifest["gen_gate_attempts"] = b.gate_attempts;
    manifest["gen_gate_separation"] = b.gate_separation;
    manifest["train_z_median"] = b.train_z_median;
    manifest["train_z_mean"] = b.train_z_mean;
  } else {
    try {
      data.train = load_dataset(cfg.train_path);
      data.dev = load_dataset(cfg.dev_path);
      data.test = load_dataset(cfg.test_path);
    } catch (const std::exception& e) {
      throw StageError("ingest", e.what());
    }
  }

  try {
    const EnumConfig& e = cfg.learn.enum_cfg;
    auto train_sets = enumerate_dataset(data.train, e);
    auto dev_sets = enumerate_dataset(data.dev, e);
    auto test_sets = enumerate_dataset(data.test, e);
    save_sidecar(train_sets, data_dir + "/train.solutions.jsonl");
    save_sidecar(dev_sets, data_dir + "/dev.solutions.jsonl");
    save_sidecar(test_sets, data_dir + "/test.solutions.jsonl");
    data.train_sc = to_sidecar(std::move(train_sets));
    data.dev_sc = to_sidecar(std::move(dev_sets));
    data.test_sc = to_sidecar(std::move(test_sets));
  } catch (const std::exception& e) {
    throw StageError("enum", e.what());
  }

  if (cfg.hard_fraction > 0.0) {
    data.train = make_hard_split(data.train, cfg.hard_fraction, data.train_sc);
    save_dataset(data.train, data_dir + "/train.hard.jsonl");
  }
  return data;
}

double selection_with_task_model(TaskModel& model, const Dataset& ds, const SolutionSidecar& sc,
                                 std::uint64_t seed) {
  SolutionScorer scorer = [&](const Instance& inst, const Solution& z) {
    SparseFeats f = model.extract(inst, z);
    return model.score(f);
  };
  return sql_selection_eval(scorer, ds, sc, seed).accuracy;
}

double selection_with_reconstructor(Reconstructor& recon, const Dataset& ds,
                                    const SolutionSidecar& sc, std::uint64_t seed) {
  SolutionScorer scorer = [&](const Instance& inst, const Solution& z) {
    return recon.loglik(inst.question, inst.reference, z);
  };
  return sql_selection_eval(scorer, ds, sc, seed).accuracy;
}

std::string checkpoint_json(const TaskModel& model, const std::string& hash) {
  ojson j;
  j["version"] = 1;
  j["kind"] = "task_model";
  j["extractor"] = TaskModel::kExtractorId;
  j["config_hash"] = hash;
  ojson w = ojson::object();
  for (const auto& [name, value] : model.weights_view()) w[name] = value;
  j["weights"] = std::move(w);
  return j.dump(2) + "\n";
}

std::string recon_checkpoint_json(const Reconstructor& recon, const std::string& hash) {
  ojson j;
  j["version"] = 1;
  j["kind"] = "reconstructor";
  j["config_hash"] = hash;
  j["vocab"] = recon.vocab_tokens();
  ojson w = ojson::object();
  for (const auto& [name, value] : recon.weights_view()) w[name] = value;
  j["weights"] = std::move(w);
  return j.dump(2) + "\n";
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ojson cfg_json = run_config_to_json(cfg);
  const std::string hash = config_hash(cfg_json);
  const std::string run_dir = cfg.out_dir;
  fs::create_directories(run_dir);
  write_text_file(run_dir + "/config.json", cfg_json.dump(2) + "\n");

  ojson manifest;
  manifest["config_hash"] = hash;
  manifest["tool"] = "wsqa 0.1";
  manifest["learn_seed"] = cfg.learn.seed;
  manifest["eval_seeds"] = cfg.eval_seeds;

  LoadedData data = prepare_data(cfg, run_dir, manifest);

  TrainResult result;
  try {
    result = train(cfg.learn, data.train, data.train_sc, data.dev, data.dev_sc);
  } catch (const std::exception& e) {
    throw StageError("train", e.what());
  }
  write_text_file(run_dir + "/metrics.csv", format_metrics_csv(result.epochs));
  write_text_file(run_dir + "/task_model.json", checkpoint_json(result.model, hash));
  write_text_file(run_dir + "/reconstructor.json",
                  recon_checkpoint_json(*result.reconstructor, hash));

  RunOutcome outcome;
  outcome.run_dir = run_dir;
  try {
    outcome.test_metrics =
        evaluate_model(result.model, data.test, data.test_sc, cfg.learn.enum_cfg);
    write_text_file(run_dir + "/test_metrics.json",
                    metrics_to_json(outcome.test_metrics).dump(2) + "\n");
  } catch (const std::exception& e) {
    throw StageError("eval", e.what());
  }

  if (data.test.family == Family::kSql) {
    try {
      ojson sel;
      sel["seeds"] = cfg.eval_seeds;
      double task_acc = 0.0, recon_acc = 0.0;
      for (std::uint64_t s : cfg.eval_seeds) {
        task_acc += selection_with_task_model(result.model, data.test, data.test_sc, s);
        recon_acc +=
            selection_with_reconstructor(*result.reconstructor, data.test, data.test_sc, s);
      }
      task_acc /= static_cast<double>(cfg.eval_seeds.size());
      recon_acc /= static_cast<double>(cfg.eval_seeds.size());
      sel["task_model_accuracy"] = task_acc;
      sel["reconstructor_accuracy"] = recon_acc;
      write_text_file(run_dir + "/selection.json", sel.dump(2) + "\n");
      outcome.selection_task = task_acc;
      outcome.selection_recon = recon_acc;
    } catch (const std::exception& e) {
      throw StageError("select-sql", e.what());
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  manifest["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  write_text_file(run_dir + "/manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

std::vector<CompareRow> compare_methods(const RunConfig& cfg, const std::string& out_csv) {
  ojson manifest;
  fs::create_directories(cfg.out_dir);
  LoadedData data = prepare_data(cfg, cfg.out_dir, manifest);

  std::vector<Method> methods = {Method::kMml, Method::kHardEm, Method::kHardEmThres,
                                 Method::kVae, Method::kMim};
  if (data.train.family == Family::kSpan) methods.insert(methods.begin(), Method::kFirstOnly);

  std::vector<CompareRow> rows;
  for (Method m : methods) {
    for (std::uint64_t seed : cfg.eval_seeds) {
      LearnConfig lc = cfg.learn;
      lc.method = m;
      lc.seed = seed;
      TrainResult result = train(lc, data.train, data.train_sc, data.dev, data.dev_sc);
      CompareRow row;
      row.method = method_name(m);
      row.seed = seed;
      row.test_metrics = evaluate_model(result.model, data.test, data.test_sc, lc.enum_cfg);
      if (data.test.family == Family::kSql) {
        row.selection =
            m == Method::kMim
                ? selection_with_reconstructor(*result.reconstructor, data.test, data.test_sc,
                                               cfg.eval_seeds.front())
                : selection_with_task_model(result.model, data.test, data.test_sc,
                                            cfg.eval_seeds.front());
      }
      rows.push_back(std::move(row));
    }
  }

  std::string csv = "method,seed,test_em,test_f1,test_exec,test_lf,selection\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%llu,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.method.c_str(),
                  static_cast<unsigned long long>(r.seed), r.test_metrics.answer_em,
                  r.test_metrics.answer_f1, r.test_metrics.exec_acc, r.test_metrics.lf_acc,
                  r.selection);
    csv += line;
  }
  write_text_file(out_csv, csv);
  return rows;
}

}  // namespace wsqa
