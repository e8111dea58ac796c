#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsqa/corpus.hpp"

namespace wsqa {

// Bounds of the solution search space. The same caps define the inference
// grammar, so precomputed sets are always a subset of what the model scores.
struct EnumConfig {
  std::vector<Decimal> constants = {Decimal::from_int(1), Decimal::from_int(100)};
  int max_terms = 3;           // equation operands
  int max_conds = 3;           // sql conditions
  int kv_subset_max = 2;       // sort / key-value sort arity
  int max_cond_span_len = 4;   // question-span condition values
  int max_span_len = 4;        // predicted span length at inference
  long long count_subset_budget = 200;
  int z_cap = 500;
};

// The precomputed set Z for one instance: canonical solutions in the
// deterministic enumeration order, each executing to the answer.
struct SolutionSet {
  std::string instance_id;
  std::vector<Solution> solutions;
  bool truncated = false;
  std::size_t size() const { return solutions.size(); }
};

SolutionSet enumerate_spans(const Instance& inst);
SolutionSet enumerate_numeric(const Instance& inst, const EnumConfig& cfg);
SolutionSet enumerate_span_like(const Instance& inst, const EnumConfig& cfg);
SolutionSet enumerate_sql(const Instance& inst, const EnumConfig& cfg);

// Dispatch on family / answer kind, dedup, cap, and re-verify soundness.
SolutionSet build_solution_set(const Instance& inst, const EnumConfig& cfg);

// Sidecar file: one {"instance_id", "solutions", "truncated"} record per line.
using SolutionSidecar = std::map<std::string, SolutionSet>;

void save_sidecar(const std::vector<SolutionSet>& sets, const std::string& path);
SolutionSidecar load_sidecar(const std::string& path);
std::vector<SolutionSet> enumerate_dataset(const Dataset& d, const EnumConfig& cfg);

// n-choose-k without overflow; saturates at `cap`.
long long binomial_capped(long long n, long long k, long long cap);

}  // namespace wsqa
