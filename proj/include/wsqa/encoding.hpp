#pragma once

#include <string>
#include <vector>

#include "wsqa/corpus.hpp"
#include "wsqa/solutions.hpp"

namespace wsqa {

// One symbol of an encoded solution. Spans are placeholders that carry only
// the referred tokens, one neighbor on each side, the source tag, and the
// ordinal among same-surface occurrences in that source. Reference content
// further away cannot influence the encoding, and two same-surface spans at
// different positions always encode differently.
struct EncSymbol {
  enum class Kind { kSolStart, kOperator, kConstant, kSpanPlaceholder, kColumn };
  Kind kind = Kind::kOperator;
  std::string op;              // kOperator: operator / aggregator / comparator name
  Decimal constant;            // kConstant
  TokenSeq span_tokens;        // kSpanPlaceholder / kColumn
  std::string left_neighbor;   // kSpanPlaceholder ("" at sequence edge)
  std::string right_neighbor;  // kSpanPlaceholder
  char source_tag = 'd';       // 'd' or 'q'
  int occurrence_ordinal = 0;  // among same-surface spans / same-name columns

  friend bool operator==(const EncSymbol&, const EncSymbol&) = default;
};

struct EncodedSolution {
  std::vector<EncSymbol> symbols;
  friend bool operator==(const EncodedSolution&, const EncodedSolution&) = default;
};

EncodedSolution encode_solution(const Solution& z, const RefInfo& ref, const TokenSeq& question);

// Pooled bag-of-feature view used by the question reconstructor.
std::vector<std::string> pooled_encoding_features(const EncodedSolution& enc);

}  // namespace wsqa
