#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wsqa/types.hpp"

namespace wsqa {

// Operand of an equation: a document number occurrence or a constant from
// the configured constant pool.
struct NumberRef {
  enum class Kind { kDocOccurrence, kConstant };
  Kind kind = Kind::kDocOccurrence;
  int mention_index = 0;  // valid when kDocOccurrence
  Decimal value;          // valid when kConstant
  static NumberRef doc(int idx) { return {Kind::kDocOccurrence, idx, Decimal()}; }
  static NumberRef constant(Decimal v) { return {Kind::kConstant, 0, v}; }
  friend auto operator<=>(const NumberRef&, const NumberRef&) = default;
};

enum class Sign { kPlus, kMinus };

struct ArithTerm {
  Sign sign = Sign::kPlus;
  NumberRef ref;
  friend auto operator<=>(const ArithTerm&, const ArithTerm&) = default;
};

struct SpanSol {
  Span span;
  friend auto operator<=>(const SpanSol&, const SpanSol&) = default;
};
struct SpansSol {
  std::vector<Span> spans;  // non-empty
  friend auto operator<=>(const SpansSol&, const SpansSol&) = default;
};
// Signed sum of one to three operands; the first sign is "+" (canonical form
// orders plus terms first, so an all-minus equation is unrepresentable).
struct ArithSol {
  std::vector<ArithTerm> terms;
  friend auto operator<=>(const ArithSol&, const ArithSol&) = default;
};
enum class SortOp { kMax, kMin };
struct SortSol {
  SortOp op = SortOp::kMax;
  std::vector<int> mention_indices;  // >=2 document number occurrences
  friend auto operator<=>(const SortSol&, const SortSol&) = default;
};
struct CountSol {
  std::vector<Span> spans;  // non-empty reference spans
  friend auto operator<=>(const CountSol&, const CountSol&) = default;
};
enum class KvOp { kArgmax, kArgmin };
struct KvPair {
  Span key;               // reference span
  int mention_index = 0;  // document number paired with the key
  friend auto operator<=>(const KvPair&, const KvPair&) = default;
};
struct KvSortSol {
  KvOp op = KvOp::kArgmax;
  std::vector<KvPair> pairs;  // >=2, pairwise distinct
  friend auto operator<=>(const KvSortSol&, const KvSortSol&) = default;
};
enum class Agg { kNone, kSum, kMean, kMax, kMin, kCount };
enum class Cmp { kEq, kLt, kGt };
struct SqlCond {
  int column = 0;
  Cmp cmp = Cmp::kEq;
  Span value;  // question span
  friend auto operator<=>(const SqlCond&, const SqlCond&) = default;
};
struct SqlSol {
  int select_col = 0;
  Agg agg = Agg::kNone;
  std::vector<SqlCond> conds;  // 0..3, pairwise distinct
  friend auto operator<=>(const SqlSol&, const SqlSol&) = default;
};

using Solution = std::variant<SpanSol, SpansSol, ArithSol, SortSol, CountSol, KvSortSol, SqlSol>;

bool operator==(const Solution& a, const Solution& b);
// Total order over solutions: variant tag, then field-wise lexicographic.
bool solution_less(const Solution& a, const Solution& b);

const char* sort_op_name(SortOp op);
const char* kv_op_name(KvOp op);
const char* agg_name(Agg a);
const char* cmp_name(Cmp c);
std::optional<Agg> agg_from_name(std::string_view s);
std::optional<Cmp> cmp_from_name(std::string_view s);

// Structural well-formedness against a concrete instance: index ranges,
// arity bounds, operand reuse, distinctness. Violations as readable strings.
std::vector<std::string> solution_violations(const Solution& z, const RefInfo& ref,
                                             const TokenSeq& question);

// Deterministic executor f(z). Any failure (bad index, key-sort tie,
// non-aggregatable cells, zero or many rows under agg none) yields nullopt:
// the solution does not execute, i.e. f(z) != a.
std::optional<AnswerValue> execute_solution(const Solution& z, const RefInfo& ref,
                                            const TokenSeq& question);

// Order-normalizes container fields so structurally equal solutions compare
// equal. Idempotent; execution-result preserving.
Solution canonicalize_solution(const Solution& z);

// Compact display form; injective over canonical solutions of one instance.
std::string render_solution(const Solution& z);

}  // namespace wsqa
