#pragma once

#include <memory>
#include <optional>

#include "wsqa/enumerate.hpp"
#include "wsqa/models.hpp"
#include "wsqa/rng.hpp"

namespace wsqa {

// Eq.-style posterior over a precomputed solution set: the task model's
// softmax restricted to Z and renormalized (identical to normalizing the
// grammar-wide softmax over Z). Mass outside Z is structurally zero: the
// returned vector is aligned with Z and sums to one.
std::vector<double> posterior_over_Z(TaskModel& m, const Instance& inst, const SolutionSet& z_set);

// Scores the task model's full hypothesis space for one instance: the family
// grammar under the enumeration caps, extended with any sidecar solutions
// (so P(z) is defined for every z in Z during training).
//
// Span and discrete grammars are explicit candidate lists. The sql grammar
// (select x agg x condition subsets) is scored in factorized form: features
// decompose per slot, so the partition function and feature expectation are
// computed exactly with subset-sum polynomials instead of enumeration.
class GrammarScorer {
 public:
  GrammarScorer(TaskModel& model, const Instance& inst, const EnumConfig& cfg,
                const SolutionSet* z_set);
  ~GrammarScorer();

  const Instance& instance() const { return *inst_; }

  // log sum_z exp(score(z)) over the grammar.
  double log_partition() const;
  // Ascends sum_i w_i log P(target_i) where targets index into the sidecar
  // set Z supplied at construction: w += lr*(sum_i w_i f_i - (sum w) E[f]).
  void ascend_z_targets(const std::vector<std::pair<int, double>>& targets, double lr);
  // w += step * E[f] over the grammar (step is usually negative).
  void ascend_expectation(double step);
  // Score of an arbitrary in-grammar solution.
  double score_solution(const Solution& z) const;
  const std::vector<SparseFeats>& z_feats() const { return z_feats_; }

  // Highest-scoring grammar solution; ties resolve to enumeration order.
  Solution argmax() const;
  std::vector<std::pair<Solution, double>> top_k(int k) const;
  Solution sample(DetRng& rng) const;

 private:
  struct SqlFactor;
  void build_explicit(const EnumConfig& cfg, const SolutionSet* z_set);
  void build_sql(const EnumConfig& cfg, const SolutionSet* z_set);

  TaskModel* model_;
  const Instance* inst_;

  // Explicit path (span / discrete).
  std::vector<Solution> cands_;
  std::vector<SparseFeats> cand_feats_;

  // Factorized path (sql).
  std::unique_ptr<SqlFactor> sql_;

  std::vector<SparseFeats> z_feats_;
  std::vector<Solution> z_solutions_;
};

// Inference-time prediction: argmax over the bare grammar (no sidecar).
std::optional<Solution> predict_solution(TaskModel& m, const Instance& inst,
                                         const EnumConfig& cfg);

}  // namespace wsqa
