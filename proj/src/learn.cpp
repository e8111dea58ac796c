#include "wsqa/learn.hpp"

#include <algorithm>
#include <cmath>

namespace wsqa {

const char* method_name(Method m) {
  switch (m) {
    case Method::kFirstOnly: return "first_only";
    case Method::kMml: return "mml";
    case Method::kHardEm: return "hard_em";
    case Method::kHardEmThres: return "hard_em_thres";
    case Method::kVae: return "vae";
    case Method::kMim: return "mim";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view s) {
  for (Method m : {Method::kFirstOnly, Method::kMml, Method::kHardEm, Method::kHardEmThres,
                   Method::kVae, Method::kMim})
    if (s == method_name(m)) return m;
  return std::nullopt;
}

double anneal_probability(long long t, long long tau) {
  if (tau <= 0) return 0.8;
  return std::min(static_cast<double>(t) / static_cast<double>(tau), 0.8);
}

double threshold_gamma(int n0, int completed_epochs) {
  return std::pow(0.5, n0 + completed_epochs);
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

std::size_t argmax_index(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Solution select_first_only(const Instance& inst, const SolutionSet& z_set) {
  if (inst.family != Family::kSpan)
    throw std::invalid_argument("first_only is defined for the span family only");
  if (z_set.solutions.empty()) throw std::invalid_argument("empty solution set");
  const SpanSol* best = nullptr;
  for (const auto& z : z_set.solutions) {
    const auto* s = std::get_if<SpanSol>(&z);
    if (!s) throw std::invalid_argument("non-span solution in span-family set");
    if (!best || s->span.start < best->span.start ||
        (s->span.start == best->span.start && s->span.end < best->span.end))
      best = s;
  }
  return Solution(*best);
}

int init_threshold(TaskModel& m, const Dataset& ds, const SolutionSidecar& sc) {
  std::vector<double> max_posteriors;
  for (const auto& inst : ds.instances) {
    auto it = sc.find(inst.id);
    if (it == sc.end() || it->second.solutions.empty()) continue;
    auto p = posterior_over_Z(m, inst, it->second);
    max_posteriors.push_back(*std::max_element(p.begin(), p.end()));
  }
  if (max_posteriors.empty()) throw std::invalid_argument("no instance has a non-empty set");
  for (int n = 1; n <= 64; ++n) {
    double gamma = threshold_gamma(n, 0);
    std::size_t covered = 0;
    for (double p : max_posteriors)
      if (p > gamma) ++covered;
    if (2 * covered >= max_posteriors.size()) return n;
  }
  return 64;
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

struct Trainer::Slot {
  const Instance* inst = nullptr;
  const SolutionSet* z_set = nullptr;
  std::unique_ptr<GrammarScorer> scorer;
  std::vector<int> q_ids;
  std::vector<std::vector<int>> enc_ids;  // per Z member, lazy
  bool enc_ready = false;
};

Trainer::Trainer(const LearnConfig& cfg, const Dataset& train_ds,
                 const SolutionSidecar& train_sc, const Dataset& dev_ds,
                 const SolutionSidecar& dev_sc, const QuestionFitScorer* recon_override,
                 TrainTrace* trace)
    : cfg_(cfg),
      train_ds_(&train_ds),
      dev_ds_(&dev_ds),
      dev_sc_(&dev_sc),
      rng_(cfg.seed),
      recon_override_(recon_override),
      trace_(trace) {
  if (cfg.method == Method::kFirstOnly && train_ds.family != Family::kSpan)
    throw std::invalid_argument("first_only requires the span family");
  if (cfg.epochs < 0 || cfg.lr_task <= 0.0 || cfg.lr_recon <= 0.0)
    throw std::invalid_argument("invalid learning configuration");

  std::vector<Token> vocab;
  for (const auto& inst : train_ds.instances)
    vocab.insert(vocab.end(), inst.question.begin(), inst.question.end());
  recon_ = Reconstructor(std::move(vocab));

  for (const auto& inst : train_ds.instances) {
    auto it = train_sc.find(inst.id);
    if (it == train_sc.end())
      throw DataError("missing sidecar entry for instance \"" + inst.id + "\"");
    if (it->second.solutions.empty()) continue;  // uncovered: skipped by all methods
    auto slot = std::make_unique<Slot>();
    slot->inst = &inst;
    slot->z_set = &it->second;
    slots_.push_back(std::move(slot));
    order_.push_back(static_cast<int>(slots_.size()) - 1);
  }

  const long long steps_per_epoch = std::max<long long>(1, static_cast<long long>(order_.size()));
  const long long total = steps_per_epoch * std::max(1, cfg.epochs);
  tau_ = cfg.tau > 0 ? cfg.tau : std::max<long long>(1, total / 2);
  if (cfg.mim_switch_step >= 0) {
    mim_switch_step_ = cfg.mim_switch_step;
  } else {
    mim_switch_step_ =
        train_ds.family == Family::kSpan ? std::max<long long>(1, total / 2) : steps_per_epoch;
  }
  annealing_ = cfg.annealing < 0 ? train_ds.family == Family::kSpan : cfg.annealing != 0;
  stage1_epochs_ = cfg.vae_stage1_epochs >= 0 ? cfg.vae_stage1_epochs : std::max(1, cfg.epochs / 3);
  stage2_epochs_ = cfg.vae_stage2_epochs;

  if (cfg.method == Method::kHardEmThres || cfg.method == Method::kVae) {
    n0_ = cfg.threshold_n0 > 0 ? cfg.threshold_n0 : init_threshold(model_, train_ds, train_sc);
    gamma_ = threshold_gamma(n0_, 0);
  }
}

Trainer::~Trainer() = default;

const Instance& Trainer::trainable_instance(int i) const { return *slots_[i]->inst; }

Trainer::Slot& Trainer::slot(int idx) {
  Slot& s = *slots_[idx];
  if (!s.scorer)
    s.scorer = std::make_unique<GrammarScorer>(model_, *s.inst, cfg_.enum_cfg, s.z_set);
  return s;
}

std::vector<double> Trainer::posterior(int idx) {
  Slot& s = slot(idx);
  return task_distribution(model_, s.scorer->z_feats());
}

void Trainer::record(int idx, const Solution* target) {
  if (!trace_) return;
  TrainTrace::StepRecord rec;
  rec.step = t_;
  rec.instance_id = slots_[idx]->inst->id;
  if (target) rec.target = render_solution(*target);
  trace_->steps.push_back(std::move(rec));
}

void Trainer::ascend_target(int idx, int z_index) {
  Slot& s = slot(idx);
  s.scorer->ascend_z_targets({{z_index, 1.0}}, cfg_.lr_task);
  record(idx, &s.z_set->solutions[z_index]);
}

void Trainer::first_only_update(int idx) {
  Slot& s = slot(idx);
  Solution first = select_first_only(*s.inst, *s.z_set);
  for (int i = 0; i < static_cast<int>(s.z_set->solutions.size()); ++i)
    if (s.z_set->solutions[i] == first) {
      ascend_target(idx, i);
      return;
    }
}

void Trainer::mml_update(int idx) {
  Slot& s = slot(idx);
  std::vector<double> post = posterior(idx);
  std::vector<std::pair<int, double>> targets;
  targets.reserve(post.size());
  for (int i = 0; i < static_cast<int>(post.size()); ++i) targets.emplace_back(i, post[i]);
  s.scorer->ascend_z_targets(targets, cfg_.lr_task);
  record(idx, nullptr);
}

void Trainer::hard_em_update(int idx, bool annealing) {
  if (annealing) {
    double p = anneal_probability(t_, tau_);
    if (rng_.next_unit() < p) {
      mml_update(idx);
      return;
    }
  }
  std::vector<double> post = posterior(idx);
  ascend_target(idx, static_cast<int>(argmax_index(post)));
}

void Trainer::hard_em_thres_update(int idx) {
  std::vector<double> post = posterior(idx);
  std::size_t best = argmax_index(post);
  if (post[best] > gamma_)
    ascend_target(idx, static_cast<int>(best));
  else
    record(idx, nullptr);
}

void Trainer::ensure_recon_cache(Slot& s) {
  if (s.enc_ready) return;
  s.q_ids = recon_.question_ids(s.inst->question);
  s.enc_ids.clear();
  s.enc_ids.reserve(s.z_set->solutions.size());
  for (const auto& z : s.z_set->solutions)
    s.enc_ids.push_back(recon_.encode_and_intern(*s.inst, z));
  s.enc_ready = true;
}

double Trainer::recon_loglik_cached(int idx, int z_index) {
  Slot& s = slot(idx);
  if (recon_override_) return (*recon_override_)(*s.inst, s.z_set->solutions[z_index]);
  ensure_recon_cache(s);
  return recon_.loglik_ids(s.q_ids, s.enc_ids[z_index]);
}

void Trainer::mim_step(int idx) {
  if (t_ >= mim_switch_step_) {
    hard_em_update(idx, /*annealing=*/false);
    return;
  }
  Slot& s = slot(idx);
  std::vector<double> post = posterior(idx);
  std::size_t sampled = sample_index(post, rng_.next_unit());
  ensure_recon_cache(s);
  for (int r = 0; r < cfg_.recon_repeats; ++r)
    recon_.sgd_step_ids(s.q_ids, s.enc_ids[sampled], cfg_.lr_recon);
  int best = 0;
  double best_ll = recon_loglik_cached(idx, 0);
  for (int i = 1; i < static_cast<int>(s.z_set->solutions.size()); ++i) {
    double ll = recon_loglik_cached(idx, i);
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  ascend_target(idx, best);
}

void Trainer::vae_update(int idx, int stage) {
  Slot& s = slot(idx);
  if (stage == 1) {
    hard_em_thres_update(idx);
    return;
  }
  // Prediction set B: beam over the grammar, kept when executing to the answer.
  auto beam = s.scorer->top_k(cfg_.beam_size);
  std::vector<Solution> b_set;
  for (auto& [z, score] : beam) {
    auto r = execute_solution(z, s.inst->reference, s.inst->question);
    if (r && answer_equal(*r, s.inst->answer)) b_set.push_back(canonicalize_solution(z));
  }

  // Sample from the model distribution over the grammar.
  std::vector<Solution> samples;
  const int n_samples = std::max(1, cfg_.vae_samples);
  for (int i = 0; i < n_samples; ++i) samples.push_back(s.scorer->sample(rng_));

  if (stage >= 3 && cfg_.lambda > 0.0) {
    double log_z = s.scorer->log_partition();
    std::vector<double> rewards;
    rewards.reserve(samples.size());
    for (const auto& z : samples) {
      double logp_theta = s.scorer->score_solution(z) - log_z;
      double logp_phi = recon_.loglik(s.inst->question, s.inst->reference, z);
      rewards.push_back(logp_phi - logp_theta);
    }
    double baseline = 0.0;
    for (double r : rewards) baseline += r;
    baseline /= rewards.size();
    // Signed ascent on sampled solutions against the grammar expectation.
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double adv = cfg_.lambda * (rewards[i] - baseline) / static_cast<double>(samples.size());
      if (adv == 0.0) continue;
      SparseFeats f = model_.extract(*s.inst, samples[i]);
      model_.ascend(f, cfg_.lr_task * adv);
      total += adv;
    }
    if (total != 0.0) s.scorer->ascend_expectation(-cfg_.lr_task * total);
  }

  // MLE term over B.
  if (!b_set.empty()) {
    for (const auto& z : b_set) {
      SparseFeats f = model_.extract(*s.inst, z);
      model_.ascend(f, cfg_.lr_task);
    }
    s.scorer->ascend_expectation(-cfg_.lr_task * static_cast<double>(b_set.size()));
  }

  // Reconstructor step on a sampled pair.
  recon_.sgd_step(s.inst->question, s.inst->reference, samples.front(), cfg_.lr_recon);
  record(idx, nullptr);
}

void Trainer::dispatch(int idx, int epoch) {
  switch (cfg_.method) {
    case Method::kFirstOnly: first_only_update(idx); break;
    case Method::kMml: mml_update(idx); break;
    case Method::kHardEm: hard_em_update(idx, annealing_); break;
    case Method::kHardEmThres: hard_em_thres_update(idx); break;
    case Method::kVae: {
      int stage = epoch < stage1_epochs_ ? 1 : (epoch < stage1_epochs_ + stage2_epochs_ ? 2 : 3);
      vae_update(idx, stage);
      break;
    }
    case Method::kMim: mim_step(idx); break;
  }
}

EpochRow Trainer::eval_dev(int epoch) {
  if (dev_scorers_.empty() && !dev_ds_->instances.empty()) {
    dev_scorers_.reserve(dev_ds_->instances.size());
    for (const auto& inst : dev_ds_->instances)
      dev_scorers_.push_back(
          std::make_unique<GrammarScorer>(model_, inst, cfg_.enum_cfg, nullptr));
  }
  std::size_t next = 0;
  auto predict = [&](const Instance&) -> std::optional<Solution> {
    GrammarScorer& g = *dev_scorers_[next++];
    try {
      return g.argmax();
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  MetricsReport r = evaluate(predict, *dev_ds_, *dev_sc_);
  EpochRow row;
  row.epoch = epoch;
  row.steps = t_;
  row.gamma = gamma_;
  row.dev_em = r.answer_em;
  row.dev_f1 = r.answer_f1;
  row.dev_exec = r.exec_acc;
  row.dev_lf = r.lf_acc;
  return row;
}

TrainResult Trainer::run() {
  TrainResult out;
  FeatureVector best_weights;
  double best_em = -1.0;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    if (cfg_.method == Method::kHardEmThres ||
        (cfg_.method == Method::kVae && epoch < stage1_epochs_))
      gamma_ = threshold_gamma(n0_, epoch);
    std::vector<int> order = order_;
    rng_.shuffle(order);
    for (int idx : order) {
      dispatch(idx, epoch);
      ++t_;
    }
    EpochRow row = eval_dev(epoch);
    out.epochs.push_back(row);
    if (row.dev_em > best_em) {
      best_em = row.dev_em;
      best_weights = model_.weights_view();
      out.best_epoch = epoch;
    }
  }

  if (out.best_epoch >= 0) model_.load_weights(best_weights);
  out.model = std::move(model_);
  out.reconstructor = std::make_unique<Reconstructor>(std::move(recon_));
  out.threshold_n0 = n0_;
  out.total_steps = t_;
  return out;
}

TrainResult train(const LearnConfig& cfg, const Dataset& train_ds,
                  const SolutionSidecar& train_sc, const Dataset& dev_ds,
                  const SolutionSidecar& dev_sc, const QuestionFitScorer* recon_override,
                  TrainTrace* trace) {
  Trainer t(cfg, train_ds, train_sc, dev_ds, dev_sc, recon_override, trace);
  return t.run();
}

}  // namespace wsqa
