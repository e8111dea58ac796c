#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsqa/serialize.hpp"
#include "wsqa/solutions.hpp"
#include "wsqa/types.hpp"

namespace wsqa {

// Key-value candidate: a reference span paired with a document number
// occurrence. Provided by the data, consumed by enumeration.
struct KvCandidate {
  Span span;
  int mention_index = 0;
  friend auto operator<=>(const KvCandidate&, const KvCandidate&) = default;
};

// One weakly supervised example. gold_solution is evaluation-only and is
// never shown to a learning method.
struct Instance {
  std::string id;
  Family family = Family::kSpan;
  RefInfo reference;
  TokenSeq question;
  Answer answer;
  std::optional<Solution> gold_solution;
  std::vector<KvCandidate> kv_candidates;
  std::vector<Span> mention_candidates;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
  std::string name;  // label only; derived from the file name on load
  Family family = Family::kSpan;
  std::vector<Instance> instances;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.family == b.family && a.instances == b.instances;
  }
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural and semantic checks; empty result means the instance is valid.
// A present gold solution must execute to the answer.
std::vector<std::string> validate_instance(const Instance& inst);

ojson instance_to_json(const Instance& inst);
Instance instance_from_json(const ojson& j);

// JSONL, one instance per line. Loading validates every instance and
// rejects the whole file on the first malformed or invalid line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

}  // namespace wsqa
