#include "wsqa/solutions.hpp"

#include <algorithm>
#include <sstream>

namespace wsqa {

const char* family_name(Family f) {
  switch (f) {
    case Family::kSpan: return "span";
    case Family::kDiscrete: return "discrete";
    case Family::kSql: return "sql";
  }
  return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
  if (name == "span") return Family::kSpan;
  if (name == "discrete") return Family::kDiscrete;
  if (name == "sql") return Family::kSql;
  return std::nullopt;
}

const char* sort_op_name(SortOp op) { return op == SortOp::kMax ? "max" : "min"; }
const char* kv_op_name(KvOp op) { return op == KvOp::kArgmax ? "argmax" : "argmin"; }

const char* agg_name(Agg a) {
  switch (a) {
    case Agg::kNone: return "none";
    case Agg::kSum: return "sum";
    case Agg::kMean: return "mean";
    case Agg::kMax: return "max";
    case Agg::kMin: return "min";
    case Agg::kCount: return "count";
  }
  return "?";
}

std::optional<Agg> agg_from_name(std::string_view s) {
  for (Agg a : {Agg::kNone, Agg::kSum, Agg::kMean, Agg::kMax, Agg::kMin, Agg::kCount})
    if (s == agg_name(a)) return a;
  return std::nullopt;
}

const char* cmp_name(Cmp c) {
  switch (c) {
    case Cmp::kEq: return "=";
    case Cmp::kLt: return "<";
    case Cmp::kGt: return ">";
  }
  return "?";
}

std::optional<Cmp> cmp_from_name(std::string_view s) {
  if (s == "=") return Cmp::kEq;
  if (s == "<") return Cmp::kLt;
  if (s == ">") return Cmp::kGt;
  return std::nullopt;
}

bool operator==(const Solution& a, const Solution& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return x == std::get<T>(b);
      },
      a);
}

bool solution_less(const Solution& a, const Solution& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return x < std::get<T>(b);
      },
      a);
}

namespace {

const TokenSeq* source_tokens(SpanSource src, const RefInfo& ref, const TokenSeq& q) {
  if (src == SpanSource::kQuestion) return &q;
  const auto* doc = as_document(ref);
  return doc ? &doc->tokens : nullptr;
}

bool span_in_range(const Span& s, const RefInfo& ref, const TokenSeq& q) {
  const TokenSeq* toks = source_tokens(s.source, ref, q);
  if (!toks) return false;
  return s.start >= 0 && s.start <= s.end && s.end < static_cast<int>(toks->size());
}

TokenSeq span_tokens(const Span& s, const RefInfo& ref, const TokenSeq& q) {
  const TokenSeq* toks = source_tokens(s.source, ref, q);
  return TokenSeq(toks->begin() + s.start, toks->begin() + s.end + 1);
}

std::string join_tokens(const TokenSeq& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += toks[i];
  }
  return out;
}

std::optional<Decimal> resolve_ref(const NumberRef& r, const DocumentRef& doc) {
  if (r.kind == NumberRef::Kind::kConstant) return r.value;
  if (r.mention_index < 0 || r.mention_index >= static_cast<int>(doc.numbers.size()))
    return std::nullopt;
  return doc.numbers[r.mention_index].value;
}

TokenSeq split_ws(const std::string& s) {
  TokenSeq out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

// Condition semantics: numeric comparison when both the cell and the span
// text parse as decimals; otherwise "=" is exact string comparison and
// "<", ">" do not execute.
enum class CondResult { kMatch, kNoMatch, kError };

CondResult eval_cond(const Cell& cell, Cmp cmp, const std::string& text) {
  std::optional<Decimal> cv = cell.as_number();
  std::optional<Decimal> tv = Decimal::parse(text);
  if (cv && tv) {
    switch (cmp) {
      case Cmp::kEq: return *cv == *tv ? CondResult::kMatch : CondResult::kNoMatch;
      case Cmp::kLt: return *cv < *tv ? CondResult::kMatch : CondResult::kNoMatch;
      case Cmp::kGt: return *cv > *tv ? CondResult::kMatch : CondResult::kNoMatch;
    }
  }
  if (cmp != Cmp::kEq) return CondResult::kError;
  return cell.display() == text ? CondResult::kMatch : CondResult::kNoMatch;
}

std::optional<AnswerValue> execute_sql(const SqlSol& z, const TableRef& table,
                                       const TokenSeq& q) {
  const int cols = static_cast<int>(table.header.size());
  if (z.select_col < 0 || z.select_col >= cols) return std::nullopt;
  std::vector<std::string> cond_text;
  cond_text.reserve(z.conds.size());
  for (const auto& c : z.conds) {
    if (c.column < 0 || c.column >= cols) return std::nullopt;
    if (c.value.source != SpanSource::kQuestion) return std::nullopt;
    if (c.value.start < 0 || c.value.start > c.value.end ||
        c.value.end >= static_cast<int>(q.size()))
      return std::nullopt;
    cond_text.push_back(join_tokens(TokenSeq(q.begin() + c.value.start,
                                             q.begin() + c.value.end + 1)));
  }

  // Every condition is evaluated over every row before filtering, so that
  // execution does not depend on condition order (canonicalization reorders
  // conditions freely).
  std::vector<bool> keep(table.rows.size(), true);
  for (std::size_t k = 0; k < z.conds.size(); ++k) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      CondResult res = eval_cond(table.rows[r][z.conds[k].column], z.conds[k].cmp, cond_text[k]);
      if (res == CondResult::kError) return std::nullopt;
      if (res == CondResult::kNoMatch) keep[r] = false;
    }
  }
  std::vector<const Cell*> projected;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (keep[r]) projected.push_back(&table.rows[r][z.select_col]);

  if (z.agg == Agg::kCount)
    return AnswerValue(NumberValue{Decimal::from_int(static_cast<std::int64_t>(projected.size()))});
  if (z.agg == Agg::kNone) {
    if (projected.size() != 1) return std::nullopt;
    const Cell& c = *projected[0];
    if (c.is_number()) return AnswerValue(NumberValue{*c.number()});
    TokenSeq toks = split_ws(*c.text());
    if (toks.empty()) return std::nullopt;
    return AnswerValue(TextValue{std::move(toks)});
  }
  // sum / mean / max / min need at least one row and all-numeric cells.
  if (projected.empty()) return std::nullopt;
  std::vector<Decimal> vals;
  vals.reserve(projected.size());
  for (const Cell* c : projected) {
    auto v = c->as_number();
    if (!v) return std::nullopt;
    vals.push_back(*v);
  }
  switch (z.agg) {
    case Agg::kSum: {
      Decimal s;
      for (Decimal v : vals) s = s + v;
      return AnswerValue(NumberValue{s});
    }
    case Agg::kMean: {
      Decimal s;
      for (Decimal v : vals) s = s + v;
      return AnswerValue(NumberValue{Decimal::mean_of_sum(s, static_cast<std::int64_t>(vals.size()))});
    }
    case Agg::kMax: return AnswerValue(NumberValue{*std::max_element(vals.begin(), vals.end())});
    case Agg::kMin: return AnswerValue(NumberValue{*std::min_element(vals.begin(), vals.end())});
    default: return std::nullopt;
  }
}

bool arith_refs_valid(const ArithSol& z) {
  if (z.terms.empty() || z.terms.size() > 3) return false;
  if (z.terms.front().sign != Sign::kPlus) return false;
  for (std::size_t i = 0; i < z.terms.size(); ++i)
    for (std::size_t j = i + 1; j < z.terms.size(); ++j)
      if (z.terms[i].ref == z.terms[j].ref) return false;
  return true;
}

}  // namespace

std::vector<std::string> solution_violations(const Solution& z, const RefInfo& ref,
                                             const TokenSeq& question) {
  std::vector<std::string> out;
  auto bad_span = [&](const Span& s, const char* what) {
    if (!span_in_range(s, ref, question))
      out.push_back(std::string(what) + " span out of range");
  };
  auto bad_mention = [&](int idx, const char* what) {
    const auto* doc = as_document(ref);
    if (!doc || idx < 0 || idx >= static_cast<int>(doc->numbers.size()))
      out.push_back(std::string(what) + " mention index out of range");
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          bad_span(x.span, "span");
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          if (x.spans.empty()) out.push_back("spans solution is empty");
          for (const auto& s : x.spans) bad_span(s, "spans item");
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          if (!arith_refs_valid(x)) out.push_back("equation arity/sign/reuse violation");
          for (const auto& t : x.terms)
            if (t.ref.kind == NumberRef::Kind::kDocOccurrence)
              bad_mention(t.ref.mention_index, "equation operand");
        } else if constexpr (std::is_same_v<T, SortSol>) {
          if (x.mention_indices.size() < 2) out.push_back("sort needs at least two arguments");
          for (std::size_t i = 0; i + 1 < x.mention_indices.size(); ++i)
            for (std::size_t j = i + 1; j < x.mention_indices.size(); ++j)
              if (x.mention_indices[i] == x.mention_indices[j])
                out.push_back("sort arguments not distinct");
          for (int m : x.mention_indices) bad_mention(m, "sort argument");
        } else if constexpr (std::is_same_v<T, CountSol>) {
          if (x.spans.empty()) out.push_back("count solution is empty");
          for (const auto& s : x.spans) {
            if (s.source != SpanSource::kReference) out.push_back("count span not in reference");
            bad_span(s, "count");
          }
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          if (x.pairs.size() < 2) out.push_back("key-value sort needs at least two pairs");
          for (std::size_t i = 0; i + 1 < x.pairs.size(); ++i)
            for (std::size_t j = i + 1; j < x.pairs.size(); ++j)
              if (x.pairs[i] == x.pairs[j]) out.push_back("key-value pairs not distinct");
          for (const auto& p : x.pairs) {
            if (p.key.source != SpanSource::kReference)
              out.push_back("key-value key not in reference");
            bad_span(p.key, "key-value key");
            bad_mention(p.mention_index, "key-value value");
          }
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          const auto* table = as_table(ref);
          if (!table) {
            out.push_back("sql solution over non-table reference");
            return;
          }
          int cols = static_cast<int>(table->header.size());
          if (x.select_col < 0 || x.select_col >= cols)
            out.push_back("select column out of range");
          if (x.conds.size() > 3) out.push_back("more than three conditions");
          for (std::size_t i = 0; i + 1 < x.conds.size(); ++i)
            for (std::size_t j = i + 1; j < x.conds.size(); ++j)
              if (x.conds[i] == x.conds[j]) out.push_back("conditions not distinct");
          for (const auto& c : x.conds) {
            if (c.column < 0 || c.column >= cols) out.push_back("condition column out of range");
            if (c.value.source != SpanSource::kQuestion)
              out.push_back("condition value not a question span");
            bad_span(c.value, "condition value");
          }
        }
      },
      z);
  return out;
}

std::optional<AnswerValue> execute_solution(const Solution& z, const RefInfo& ref,
                                            const TokenSeq& question) {
  return std::visit(
      [&](const auto& x) -> std::optional<AnswerValue> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          if (!span_in_range(x.span, ref, question)) return std::nullopt;
          return AnswerValue(TextValue{span_tokens(x.span, ref, question)});
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          if (x.spans.empty()) return std::nullopt;
          TextListValue out;
          for (const auto& s : x.spans) {
            if (!span_in_range(s, ref, question)) return std::nullopt;
            out.items.push_back(span_tokens(s, ref, question));
          }
          return AnswerValue(std::move(out));
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          const auto* doc = as_document(ref);
          if (!doc || !arith_refs_valid(x)) return std::nullopt;
          Decimal sum;
          for (const auto& t : x.terms) {
            auto v = resolve_ref(t.ref, *doc);
            if (!v) return std::nullopt;
            sum = t.sign == Sign::kPlus ? sum + *v : sum - *v;
          }
          return AnswerValue(NumberValue{sum});
        } else if constexpr (std::is_same_v<T, SortSol>) {
          const auto* doc = as_document(ref);
          if (!doc || x.mention_indices.size() < 2) return std::nullopt;
          std::optional<Decimal> best;
          for (int m : x.mention_indices) {
            auto v = resolve_ref(NumberRef::doc(m), *doc);
            if (!v) return std::nullopt;
            if (!best || (x.op == SortOp::kMax ? *v > *best : *v < *best)) best = *v;
          }
          return AnswerValue(NumberValue{*best});
        } else if constexpr (std::is_same_v<T, CountSol>) {
          if (x.spans.empty()) return std::nullopt;
          for (const auto& s : x.spans) {
            if (s.source != SpanSource::kReference || !span_in_range(s, ref, question))
              return std::nullopt;
          }
          return AnswerValue(
              NumberValue{Decimal::from_int(static_cast<std::int64_t>(x.spans.size()))});
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          const auto* doc = as_document(ref);
          if (!doc || x.pairs.size() < 2) return std::nullopt;
          std::optional<Decimal> best;
          const Span* best_key = nullptr;
          bool ambiguous = false;
          for (const auto& p : x.pairs) {
            if (p.key.source != SpanSource::kReference || !span_in_range(p.key, ref, question))
              return std::nullopt;
            auto v = resolve_ref(NumberRef::doc(p.mention_index), *doc);
            if (!v) return std::nullopt;
            if (!best || (x.op == KvOp::kArgmax ? *v > *best : *v < *best)) {
              best = *v;
              best_key = &p.key;
              ambiguous = false;
            } else if (*v == *best && !(p.key == *best_key)) {
              ambiguous = true;  // tie between distinct extremal keys
            }
          }
          if (ambiguous) return std::nullopt;
          return AnswerValue(TextValue{span_tokens(*best_key, ref, question)});
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          const auto* table = as_table(ref);
          if (!table || x.conds.size() > 3) return std::nullopt;
          for (std::size_t i = 0; i + 1 < x.conds.size(); ++i)
            for (std::size_t j = i + 1; j < x.conds.size(); ++j)
              if (x.conds[i] == x.conds[j]) return std::nullopt;
          return execute_sql(x, *table, question);
        }
      },
      z);
}

Solution canonicalize_solution(const Solution& z) {
  Solution out = z;
  std::visit(
      [](auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpansSol>) {
          std::sort(x.spans.begin(), x.spans.end());
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          // Plus block before minus block; within a block document
          // occurrences (by mention index) before constants (by value).
          std::stable_sort(x.terms.begin(), x.terms.end(),
                           [](const ArithTerm& a, const ArithTerm& b) {
                             if (a.sign != b.sign) return a.sign == Sign::kPlus;
                             return a.ref < b.ref;
                           });
        } else if constexpr (std::is_same_v<T, SortSol>) {
          std::sort(x.mention_indices.begin(), x.mention_indices.end());
        } else if constexpr (std::is_same_v<T, CountSol>) {
          std::sort(x.spans.begin(), x.spans.end());
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          std::sort(x.pairs.begin(), x.pairs.end());
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          std::sort(x.conds.begin(), x.conds.end());
        }
      },
      out);
  return out;
}

namespace {

std::string render_span(const Span& s) {
  std::string src = s.source == SpanSource::kReference ? "d" : "q";
  return "span(" + src + "," + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

std::string render_ref(const NumberRef& r) {
  if (r.kind == NumberRef::Kind::kDocOccurrence) return "n@" + std::to_string(r.mention_index);
  return "c" + r.value.str();
}

}  // namespace

std::string render_solution(const Solution& z) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          return render_span(x.span);
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          std::string out = "spans(";
          for (std::size_t i = 0; i < x.spans.size(); ++i) {
            if (i) out.push_back(',');
            out += render_span(x.spans[i]);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          std::string out = "arith(";
          for (std::size_t i = 0; i < x.terms.size(); ++i) {
            if (i) out.push_back(',');
            out += x.terms[i].sign == Sign::kPlus ? "+" : "-";
            out += render_ref(x.terms[i].ref);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, SortSol>) {
          std::string out = std::string("sort(") + sort_op_name(x.op);
          for (int m : x.mention_indices) out += ",n@" + std::to_string(m);
          return out + ")";
        } else if constexpr (std::is_same_v<T, CountSol>) {
          std::string out = "count(";
          for (std::size_t i = 0; i < x.spans.size(); ++i) {
            if (i) out.push_back(',');
            out += render_span(x.spans[i]);
          }
          return out + ")";
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          std::string out = std::string("kv_sort(") + kv_op_name(x.op);
          for (const auto& p : x.pairs)
            out += "," + render_span(p.key) + ":n@" + std::to_string(p.mention_index);
          return out + ")";
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          std::string out = "sql(sel=" + std::to_string(x.select_col) + ",agg=" + agg_name(x.agg);
          for (const auto& c : x.conds) {
            out += ",cond(" + std::to_string(c.column) + "," + cmp_name(c.cmp) + ",q(" +
                   std::to_string(c.value.start) + "," + std::to_string(c.value.end) + "))";
          }
          return out + ")";
        }
      },
      z);
}

}  // namespace wsqa
