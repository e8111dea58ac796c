#pragma once

#include "wsqa/enumerate.hpp"
#include "wsqa/rng.hpp"

namespace wsqa {

// Benchmark generator configuration. Questions are templated from the gold
// solution's local context so that a reconstructor has signal to exploit;
// distractors plant same-surface mentions, coincidental equations, and
// alternative answer-matching queries.
struct GenConfig {
  Family family = Family::kSpan;
  int n_train = 400;
  int n_dev = 100;
  int n_test = 200;
  std::uint64_t seed = 7;
  int vocab_size = 60;
  int distractor_mentions = 28;  // span family: largest same-surface distractor count
  int n_doc_numbers = 8;         // discrete family
  long long value_min = 2;
  long long value_max = 40;
  int n_rows = 5;  // sql family
  int n_cols = 3;
  double collision_boost = 0.35;  // probability of planting coincidental derivations
  double hard_split_fraction = 0.25;
  int separability_max_retries = 5;
};

struct Benchmark {
  Dataset train, dev, test;
  std::uint64_t seed_used = 0;
  int gate_attempts = 0;
  double gate_separation = 0.0;  // fraction of dev instances separated by the gate model
  double train_z_median = 0.0;
  double train_z_mean = 0.0;
};

// Deterministic given the config. Regenerates with a shifted seed until a
// reconstructor trained on gold pairs separates gold from every spurious
// solution on at least 90% of dev instances.
Benchmark generate_benchmark(const GenConfig& cfg);

// Top `fraction` of instances by |Z| (ties to earlier instances), original
// order preserved.
Dataset make_hard_split(const Dataset& ds, double fraction, const SolutionSidecar& sc);

// Deterministic synthetic word list shared by the generator and tests.
std::vector<std::string> synth_words(int n);

}  // namespace wsqa
