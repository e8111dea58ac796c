#include "wsqa/encoding.hpp"

namespace wsqa {

namespace {

EncSymbol op_symbol(const std::string& name) {
  EncSymbol s;
  s.kind = EncSymbol::Kind::kOperator;
  s.op = name;
  return s;
}

EncSymbol span_symbol(const Span& span, const RefInfo& ref, const TokenSeq& q) {
  const TokenSeq* toks = nullptr;
  if (span.source == SpanSource::kQuestion) {
    toks = &q;
  } else if (const auto* doc = as_document(ref)) {
    toks = &doc->tokens;
  }
  EncSymbol s;
  s.kind = EncSymbol::Kind::kSpanPlaceholder;
  s.source_tag = span.source == SpanSource::kQuestion ? 'q' : 'd';
  if (!toks) return s;
  s.span_tokens = TokenSeq(toks->begin() + span.start, toks->begin() + span.end + 1);
  s.left_neighbor = span.start > 0 ? (*toks)[span.start - 1] : "";
  s.right_neighbor = span.end + 1 < static_cast<int>(toks->size()) ? (*toks)[span.end + 1] : "";
  // Ordinal among occurrences with the same surface in the same source.
  int ord = 0;
  const int len = span.length();
  for (int p = 0; p < span.start; ++p) {
    if (p + len > static_cast<int>(toks->size())) break;
    bool same = true;
    for (int j = 0; j < len; ++j)
      if ((*toks)[p + j] != s.span_tokens[j]) {
        same = false;
        break;
      }
    if (same) ++ord;
  }
  s.occurrence_ordinal = ord;
  return s;
}

EncSymbol mention_symbol(int mention_index, const RefInfo& ref, const TokenSeq& q) {
  // Document numbers encode as span placeholders at their token index.
  if (const auto* doc = as_document(ref)) {
    if (mention_index >= 0 && mention_index < static_cast<int>(doc->numbers.size())) {
      int t = doc->numbers[mention_index].token_index;
      return span_symbol(Span{SpanSource::kReference, t, t}, ref, q);
    }
  }
  return span_symbol(Span{SpanSource::kReference, 0, 0}, ref, q);
}

EncSymbol const_symbol(Decimal v) {
  EncSymbol s;
  s.kind = EncSymbol::Kind::kConstant;
  s.constant = v;
  return s;
}

EncSymbol column_symbol(int col, const RefInfo& ref) {
  EncSymbol s;
  s.kind = EncSymbol::Kind::kColumn;
  const auto* table = as_table(ref);
  if (!table || col < 0 || col >= static_cast<int>(table->header.size())) return s;
  s.span_tokens = table->header[col];
  int ord = 0;
  for (int c = 0; c < col; ++c)
    if (table->header[c] == table->header[col]) ++ord;
  s.occurrence_ordinal = ord;
  return s;
}

}  // namespace

EncodedSolution encode_solution(const Solution& z, const RefInfo& ref, const TokenSeq& q) {
  EncodedSolution enc;
  EncSymbol start;
  start.kind = EncSymbol::Kind::kSolStart;
  enc.symbols.push_back(std::move(start));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          enc.symbols.push_back(span_symbol(x.span, ref, q));
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          for (const auto& s : x.spans) enc.symbols.push_back(span_symbol(s, ref, q));
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          for (const auto& t : x.terms) {
            enc.symbols.push_back(op_symbol(t.sign == Sign::kPlus ? "+" : "-"));
            if (t.ref.kind == NumberRef::Kind::kConstant)
              enc.symbols.push_back(const_symbol(t.ref.value));
            else
              enc.symbols.push_back(mention_symbol(t.ref.mention_index, ref, q));
          }
        } else if constexpr (std::is_same_v<T, SortSol>) {
          enc.symbols.push_back(op_symbol(sort_op_name(x.op)));
          for (int m : x.mention_indices) enc.symbols.push_back(mention_symbol(m, ref, q));
        } else if constexpr (std::is_same_v<T, CountSol>) {
          enc.symbols.push_back(op_symbol("count"));
          for (const auto& s : x.spans) enc.symbols.push_back(span_symbol(s, ref, q));
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          enc.symbols.push_back(op_symbol(kv_op_name(x.op)));
          for (const auto& p : x.pairs) {
            enc.symbols.push_back(span_symbol(p.key, ref, q));
            enc.symbols.push_back(mention_symbol(p.mention_index, ref, q));
          }
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          enc.symbols.push_back(op_symbol("select"));
          enc.symbols.push_back(column_symbol(x.select_col, ref));
          enc.symbols.push_back(op_symbol(std::string("agg:") + agg_name(x.agg)));
          for (const auto& c : x.conds) {
            enc.symbols.push_back(op_symbol(std::string("cmp:") + cmp_name(c.cmp)));
            enc.symbols.push_back(column_symbol(c.column, ref));
            enc.symbols.push_back(span_symbol(c.value, ref, q));
          }
        }
      },
      z);
  return enc;
}

std::vector<std::string> pooled_encoding_features(const EncodedSolution& enc) {
  std::vector<std::string> out;
  for (const auto& s : enc.symbols) {
    switch (s.kind) {
      case EncSymbol::Kind::kSolStart: break;
      case EncSymbol::Kind::kOperator: out.push_back("op:" + s.op); break;
      case EncSymbol::Kind::kConstant: out.push_back("const:" + s.constant.str()); break;
      case EncSymbol::Kind::kColumn: {
        for (const auto& t : s.span_tokens) out.push_back("col:" + t);
        if (s.occurrence_ordinal > 0)
          out.push_back("colord:" + std::to_string(s.occurrence_ordinal));
        break;
      }
      case EncSymbol::Kind::kSpanPlaceholder: {
        for (const auto& t : s.span_tokens) out.push_back("sp:" + t);
        out.push_back("spl:" + s.left_neighbor);
        out.push_back("spr:" + s.right_neighbor);
        out.push_back(std::string("spsrc:") + s.source_tag);
        out.push_back("spord:" + std::to_string(std::min(s.occurrence_ordinal, 3)));
        break;
      }
    }
  }
  return out;
}

}  // namespace wsqa
