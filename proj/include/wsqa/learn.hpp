#pragma once

#include <memory>

#include "wsqa/evalkit.hpp"
#include "wsqa/grammar.hpp"

namespace wsqa {

enum class Method { kFirstOnly, kMml, kHardEm, kHardEmThres, kVae, kMim };

const char* method_name(Method m);
std::optional<Method> method_from_name(std::string_view s);

struct LearnConfig {
  Method method = Method::kMim;
  int epochs = 10;
  double lr_task = 0.5;
  double lr_recon = 0.5;
  std::uint64_t seed = 1;
  long long tau = -1;              // annealing horizon in steps; -1: half the run
  int threshold_n0 = -1;           // -1: auto (half-coverage rule on the initial model)
  double lambda = 0.1;             // VAE regularizer coefficient
  int vae_samples = 5;
  long long mim_switch_step = -1;  // -1: one epoch for discrete/sql, half the run for span
  int recon_repeats = 1;           // reconstructor steps per sampled solution
  int vae_stage1_epochs = -1;      // -1: max(1, epochs/3)
  int vae_stage2_epochs = 1;
  int beam_size = 5;               // VAE prediction set B
  int annealing = -1;              // -1: span family only; 0/1 force off/on
  EnumConfig enum_cfg;
};

struct EpochRow {
  int epoch = 0;
  long long steps = 0;
  double gamma = 0.0;
  double dev_em = 0.0;
  double dev_f1 = 0.0;
  double dev_exec = 0.0;
  double dev_lf = 0.0;
};

struct TrainTrace {
  struct StepRecord {
    long long step = 0;
    std::string instance_id;
    std::string target;  // rendered canonical solution trained on ("" if skipped)
  };
  std::vector<StepRecord> steps;
};

struct TrainResult {
  TaskModel model;  // best checkpoint by dev answer accuracy
  std::unique_ptr<Reconstructor> reconstructor;
  std::vector<EpochRow> epochs;
  int best_epoch = -1;
  int threshold_n0 = 0;
  long long total_steps = 0;
};

// min(t/tau, 0.8): probability of taking the marginal-likelihood branch.
double anneal_probability(long long t, long long tau);
// 0.5^(n0 + completed_epochs)
double threshold_gamma(int n0, int completed_epochs);
// Smallest n >= 1 such that at least half of the non-empty-Z instances have
// max posterior strictly above 0.5^n under the given model.
int init_threshold(TaskModel& m, const Dataset& ds, const SolutionSidecar& sc);
// Inverse-CDF draw over an ordered distribution: first index whose
// cumulative mass exceeds u.
std::size_t sample_index(const std::vector<double>& probs, double u);
std::size_t argmax_index(const std::vector<double>& v);
// First-in-document span solution (minimal start, then end).
Solution select_first_only(const Instance& inst, const SolutionSet& z_set);

// Orchestrates one training run. Public update methods operate on one
// instance index into the trainable (non-empty-Z) list so the per-method
// contracts are testable in isolation.
class Trainer {
 public:
  Trainer(const LearnConfig& cfg, const Dataset& train_ds, const SolutionSidecar& train_sc,
          const Dataset& dev_ds, const SolutionSidecar& dev_sc,
          const QuestionFitScorer* recon_override = nullptr, TrainTrace* trace = nullptr);
  ~Trainer();

  TrainResult run();

  int n_trainable() const { return static_cast<int>(order_.size()); }
  const Instance& trainable_instance(int i) const;
  TaskModel& model() { return model_; }
  Reconstructor& reconstructor() { return recon_; }
  DetRng& rng() { return rng_; }
  long long step() const { return t_; }
  double gamma() const { return gamma_; }
  long long switch_step() const { return mim_switch_step_; }

  void first_only_update(int idx);
  void mml_update(int idx);
  void hard_em_update(int idx, bool annealing);
  void hard_em_thres_update(int idx);
  void vae_update(int idx, int stage);
  void mim_step(int idx);

  std::vector<double> posterior(int idx);

 private:
  struct Slot;  // per-instance caches
  Slot& slot(int idx);
  void ensure_recon_cache(Slot& s);
  void ascend_target(int idx, int z_index);
  double recon_loglik_cached(int idx, int z_index);
  void dispatch(int idx, int epoch);
  EpochRow eval_dev(int epoch);
  void record(int idx, const Solution* target);

  LearnConfig cfg_;
  const Dataset* train_ds_;
  const Dataset* dev_ds_;
  const SolutionSidecar* dev_sc_;
  TaskModel model_;
  Reconstructor recon_;
  DetRng rng_;
  const QuestionFitScorer* recon_override_;
  TrainTrace* trace_;

  std::vector<std::unique_ptr<Slot>> slots_;
  std::vector<int> order_;
  std::vector<std::unique_ptr<GrammarScorer>> dev_scorers_;

  long long t_ = 0;
  double gamma_ = 0.0;
  int n0_ = 0;
  long long tau_ = 1;
  long long mim_switch_step_ = 0;
  bool annealing_ = false;
  int stage1_epochs_ = 0;
  int stage2_epochs_ = 0;
};

TrainResult train(const LearnConfig& cfg, const Dataset& train_ds,
                  const SolutionSidecar& train_sc, const Dataset& dev_ds,
                  const SolutionSidecar& dev_sc,
                  const QuestionFitScorer* recon_override = nullptr,
                  TrainTrace* trace = nullptr);

}  // namespace wsqa
