#pragma once

#include <functional>

#include "wsqa/answer_match.hpp"
#include "wsqa/enumerate.hpp"
#include "wsqa/grammar.hpp"

namespace wsqa {

struct BucketMetrics {
  std::string label;
  int n = 0;
  int n_gold = 0;
  double em = 0.0;
  double f1 = 0.0;
  double lf_acc = 0.0;
};

struct MetricsReport {
  double answer_em = 0.0;
  double answer_f1 = 0.0;
  double exec_acc = 0.0;
  double lf_acc = 0.0;  // over instances with a gold solution
  int n_eval = 0;
  int n_gold = 0;
  std::vector<BucketMetrics> by_z_bucket;  // |Z| buckets: 1, 2-4, 5-16, 17+
};

EmF1 answer_em_f1_of(const AnswerValue& predicted, const Answer& gold);

using PredictFn = std::function<std::optional<Solution>(const Instance&)>;

// Scores a predictor over a dataset. Predictions come from the inference
// grammar, never from the precomputed sets; the sidecar only supplies |Z|
// for the bucket breakdown. A prediction that fails to execute counts as a
// wrong answer, not an error.
MetricsReport evaluate(const PredictFn& predict, const Dataset& ds, const SolutionSidecar& sc);
MetricsReport evaluate_model(TaskModel& m, const Dataset& ds, const SolutionSidecar& sc,
                             const EnumConfig& cfg);

ojson metrics_to_json(const MetricsReport& r);

// Candidate scorer for the selection probe: higher is better.
using SolutionScorer = std::function<double(const Instance&, const Solution&)>;

struct SelectionResult {
  double accuracy = 0.0;
  int n_scored = 0;
  int n_skipped = 0;  // gold missing from Z
};

// Per instance, samples min(10, |Z|) candidates without replacement, always
// including the gold solution, and asks the scorer to pick one; accuracy is
// the fraction of instances where the pick is gold.
SelectionResult sql_selection_eval(const SolutionScorer& scorer, const Dataset& ds,
                                   const SolutionSidecar& sc, std::uint64_t seed);

const char* z_bucket_label(std::size_t z_size);

}  // namespace wsqa
