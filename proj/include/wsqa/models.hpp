#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wsqa/corpus.hpp"
#include "wsqa/encoding.hpp"
#include "wsqa/features.hpp"

namespace wsqa {

// ---------------------------------------------------------------------------
// Task model: sparse log-linear scorer over solutions, P(z|d,q) defined as a
// softmax over a candidate set (the full inference grammar during training
// and prediction; any explicit list in tests).
// ---------------------------------------------------------------------------

class TaskModel {
 public:
  static constexpr const char* kExtractorId = "task-feats-v1";

  SparseFeats extract(const Instance& inst, const Solution& z);

  // Slot-level extractors for sql solutions. extract() concatenates exactly
  // these, which is what makes grammar-wide expectations factorizable.
  SparseFeats sql_sel_feats(const Instance& inst, int col);
  SparseFeats sql_agg_feats(const Instance& inst, Agg agg);
  SparseFeats sql_cond_feats(const Instance& inst, const SqlCond& cond);
  SparseFeats sql_count_feats(const Instance& inst, int n_conds);

  double score(const SparseFeats& f) const { return weights_.dot(f); }
  void ascend(const SparseFeats& f, double step) {
    for (std::size_t i = 0; i < f.ids.size(); ++i) weights_.add(f.ids[i], step * f.vals[i]);
  }

  FeatureVector weights_view() const;
  void load_weights(const FeatureVector& w);
  double weight_by_name(const std::string& name) const;
  void nudge_weight(const std::string& name, double delta);

  FeatureInterner& interner() { return interner_; }

 private:
  FeatureInterner interner_;
  WeightStore weights_;
};

// Softmax over explicit candidate scores; invariant under score shifts.
std::vector<double> softmax(const std::vector<double>& scores);

std::vector<double> task_scores(const TaskModel& m, const std::vector<SparseFeats>& cands);
std::vector<double> task_distribution(const TaskModel& m, const std::vector<SparseFeats>& cands);

// Weighted maximum-likelihood ascent step. `targets` carries (candidate
// index, weight); the gradient is sum_i w_i * (f_i - E_P[f]) where P is the
// softmax over `cands`. Plain likelihood ascent is a single weight-1 target.
void sgd_step_task(TaskModel& m, const std::vector<SparseFeats>& cands,
                   const std::vector<std::pair<int, double>>& targets, double lr);

// ---------------------------------------------------------------------------
// Question reconstructor: conditional bigram emission model
// P(q_t | q_{t-1}, enc(d,z)) with softmax emissions over the vocabulary
// (tokens + OOV + END). Encoding features are pooled bag-of-symbol features.
// ---------------------------------------------------------------------------

class Reconstructor {
 public:
  Reconstructor() = default;
  explicit Reconstructor(std::vector<Token> vocab_tokens);  // sorted + deduped internally

  int vocab_size() const { return n_tokens_ + 2; }  // tokens + OOV + END
  const std::vector<Token>& vocab_tokens() const { return tokens_; }

  // Interned pooled encoding: reusable across steps and epochs.
  std::vector<int> intern_encoding(const EncodedSolution& enc);
  std::vector<int> encode_and_intern(const Instance& inst, const Solution& z);
  std::vector<int> question_ids(const TokenSeq& q) const;

  double loglik_ids(const std::vector<int>& q_ids, const std::vector<int>& enc_ids) const;
  double loglik(const TokenSeq& q, const RefInfo& ref, const Solution& z);

  // One ascent step on log P(q | enc); returns the pre-step log-likelihood.
  double sgd_step_ids(const std::vector<int>& q_ids, const std::vector<int>& enc_ids, double lr);
  double sgd_step(const TokenSeq& q, const RefInfo& ref, const Solution& z, double lr);

  FeatureVector weights_view() const;
  void load_weights(const FeatureVector& w);
  double weight_by_name(const std::string& name) const;
  void nudge_weight(const std::string& name, double delta);

 private:
  void emission_scores(int prev_id, const std::vector<int>& enc_ids,
                       std::vector<double>& out) const;
  int token_id(const Token& t) const;

  int n_tokens_ = 0;
  std::vector<Token> tokens_;
  std::unordered_map<std::string, int> token_index_;
  FeatureInterner enc_features_;
  // Dense emission weights: bigram_[prev][v] and emission_[enc_feat][v].
  std::vector<std::vector<double>> bigram_;    // (n_tokens+2 incl OOV,BOS) x V
  std::vector<std::vector<double>> emission_;  // grows with enc features

  int oov_id() const { return n_tokens_; }
  int end_id() const { return n_tokens_ + 1; }
  int bos_row() const { return n_tokens_ + 1; }  // context rows: tokens, OOV, BOS
};

// Scoring interface used when ranking solutions by question fit; the
// production implementation is Reconstructor::loglik, tests substitute
// oracles.
using QuestionFitScorer = std::function<double(const Instance&, const Solution&)>;

}  // namespace wsqa
