#include "wsqa/serialize.hpp"

namespace wsqa {

const ojson& jreq(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string jstr(const ojson& j, const char* key) {
  const ojson& v = jreq(j, key);
  if (!v.is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

Decimal jdecimal(const ojson& v, const char* what) {
  std::optional<Decimal> d;
  if (v.is_string()) {
    d = Decimal::parse(v.get<std::string>());
  } else if (v.is_number_integer()) {
    d = Decimal::from_int(v.get<std::int64_t>());
  } else if (v.is_number_float()) {
    d = Decimal::from_double(v.get<double>());
  }
  if (!d) throw SchemaError(std::string(what) + ": not a decimal with at most 6 fraction digits");
  return *d;
}

ojson span_to_json(const Span& s) {
  ojson j;
  j["source"] = s.source == SpanSource::kReference ? "reference" : "question";
  j["start"] = s.start;
  j["end"] = s.end;
  return j;
}

Span span_from_json(const ojson& j) {
  Span s;
  std::string src = jstr(j, "source");
  if (src == "reference")
    s.source = SpanSource::kReference;
  else if (src == "question")
    s.source = SpanSource::kQuestion;
  else
    throw SchemaError("span source must be \"reference\" or \"question\"");
  s.start = jreq(j, "start").get<int>();
  s.end = jreq(j, "end").get<int>();
  return s;
}

ojson answer_to_json(const Answer& a) {
  ojson j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TextValue>) {
          j["kind"] = "text";
          j["tokens"] = x.tokens;
        } else if constexpr (std::is_same_v<T, NumberValue>) {
          j["kind"] = "number";
          j["value"] = x.value.str();
        } else {
          j["kind"] = "text_list";
          j["items"] = x.items;
        }
      },
      a);
  return j;
}

Answer answer_from_json(const ojson& j) {
  std::string kind = jstr(j, "kind");
  if (kind == "text") {
    TextValue t{jreq(j, "tokens").get<TokenSeq>()};
    return Answer(std::move(t));
  }
  if (kind == "number") return Answer(NumberValue{jdecimal(jreq(j, "value"), "answer value")});
  if (kind == "text_list")
    return Answer(TextListValue{jreq(j, "items").get<std::vector<TokenSeq>>()});
  throw SchemaError("answer kind must be text|number|text_list");
}

ojson refinfo_to_json(const RefInfo& r) {
  ojson j;
  if (const auto* doc = as_document(r)) {
    j["kind"] = "document";
    j["tokens"] = doc->tokens;
    ojson nums = ojson::array();
    for (const auto& n : doc->numbers) {
      ojson m;
      m["token_index"] = n.token_index;
      m["value"] = n.value.str();
      nums.push_back(std::move(m));
    }
    j["numbers"] = std::move(nums);
  } else {
    const auto* table = as_table(r);
    j["kind"] = "table";
    j["header"] = table->header;
    ojson rows = ojson::array();
    for (const auto& row : table->rows) {
      ojson jr = ojson::array();
      for (const auto& cell : row) {
        if (cell.is_number()) {
          const Decimal d = *cell.number();
          if (d.is_integer())
            jr.push_back(*d.as_int());
          else
            jr.push_back(d.to_double());
        } else {
          jr.push_back(*cell.text());
        }
      }
      rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
  }
  return j;
}

RefInfo refinfo_from_json(const ojson& j) {
  std::string kind = jstr(j, "kind");
  if (kind == "document") {
    DocumentRef doc;
    doc.tokens = jreq(j, "tokens").get<TokenSeq>();
    for (const auto& m : jreq(j, "numbers")) {
      NumberMention n;
      n.token_index = jreq(m, "token_index").get<int>();
      n.value = jdecimal(jreq(m, "value"), "number mention value");
      doc.numbers.push_back(n);
    }
    return RefInfo(std::move(doc));
  }
  if (kind == "table") {
    TableRef table;
    table.header = jreq(j, "header").get<std::vector<TokenSeq>>();
    for (const auto& jr : jreq(j, "rows")) {
      std::vector<Cell> row;
      for (const auto& jc : jr) {
        if (jc.is_string())
          row.push_back(Cell{jc.get<std::string>()});
        else
          row.push_back(Cell{jdecimal(jc, "table cell")});
      }
      table.rows.push_back(std::move(row));
    }
    return RefInfo(std::move(table));
  }
  throw SchemaError("reference kind must be document|table");
}

namespace {

ojson numref_to_json(const NumberRef& r) {
  ojson j;
  if (r.kind == NumberRef::Kind::kDocOccurrence) {
    j["kind"] = "doc";
    j["mention_index"] = r.mention_index;
  } else {
    j["kind"] = "const";
    j["value"] = r.value.str();
  }
  return j;
}

NumberRef numref_from_json(const ojson& j) {
  std::string kind = jstr(j, "kind");
  if (kind == "doc") return NumberRef::doc(jreq(j, "mention_index").get<int>());
  if (kind == "const") return NumberRef::constant(jdecimal(jreq(j, "value"), "constant"));
  throw SchemaError("number ref kind must be doc|const");
}

}  // namespace

ojson solution_to_json(const Solution& z) {
  ojson j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          j["kind"] = "span";
          j["span"] = span_to_json(x.span);
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          j["kind"] = "spans";
          ojson arr = ojson::array();
          for (const auto& s : x.spans) arr.push_back(span_to_json(s));
          j["spans"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          j["kind"] = "arith";
          ojson arr = ojson::array();
          for (const auto& t : x.terms) {
            ojson jt;
            jt["sign"] = t.sign == Sign::kPlus ? "+" : "-";
            jt["ref"] = numref_to_json(t.ref);
            arr.push_back(std::move(jt));
          }
          j["terms"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, SortSol>) {
          j["kind"] = "sort";
          j["op"] = sort_op_name(x.op);
          ojson arr = ojson::array();
          for (int m : x.mention_indices) arr.push_back(numref_to_json(NumberRef::doc(m)));
          j["args"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, CountSol>) {
          j["kind"] = "count";
          ojson arr = ojson::array();
          for (const auto& s : x.spans) arr.push_back(span_to_json(s));
          j["spans"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          j["kind"] = "kv_sort";
          j["op"] = kv_op_name(x.op);
          ojson arr = ojson::array();
          for (const auto& p : x.pairs) {
            ojson jp;
            jp["span"] = span_to_json(p.key);
            jp["ref"] = numref_to_json(NumberRef::doc(p.mention_index));
            arr.push_back(std::move(jp));
          }
          j["pairs"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          j["kind"] = "sql";
          j["select_col"] = x.select_col;
          j["agg"] = agg_name(x.agg);
          ojson arr = ojson::array();
          for (const auto& c : x.conds) {
            ojson jc;
            jc["column"] = c.column;
            jc["cmp"] = cmp_name(c.cmp);
            jc["value"] = span_to_json(c.value);
            arr.push_back(std::move(jc));
          }
          j["conds"] = std::move(arr);
        }
      },
      z);
  return j;
}

Solution solution_from_json(const ojson& j) {
  std::string kind = jstr(j, "kind");
  if (kind == "span") return Solution(SpanSol{span_from_json(jreq(j, "span"))});
  if (kind == "spans") {
    SpansSol s;
    for (const auto& js : jreq(j, "spans")) s.spans.push_back(span_from_json(js));
    return Solution(std::move(s));
  }
  if (kind == "arith") {
    ArithSol a;
    for (const auto& jt : jreq(j, "terms")) {
      ArithTerm t;
      std::string sign = jstr(jt, "sign");
      if (sign != "+" && sign != "-") throw SchemaError("equation sign must be + or -");
      t.sign = sign == "+" ? Sign::kPlus : Sign::kMinus;
      t.ref = numref_from_json(jreq(jt, "ref"));
      a.terms.push_back(t);
    }
    return Solution(std::move(a));
  }
  if (kind == "sort") {
    SortSol s;
    std::string op = jstr(j, "op");
    if (op != "max" && op != "min") throw SchemaError("sort op must be max|min");
    s.op = op == "max" ? SortOp::kMax : SortOp::kMin;
    for (const auto& ja : jreq(j, "args")) {
      NumberRef r = numref_from_json(ja);
      if (r.kind != NumberRef::Kind::kDocOccurrence)
        throw SchemaError("sort arguments must be document occurrences");
      s.mention_indices.push_back(r.mention_index);
    }
    return Solution(std::move(s));
  }
  if (kind == "count") {
    CountSol c;
    for (const auto& js : jreq(j, "spans")) c.spans.push_back(span_from_json(js));
    return Solution(std::move(c));
  }
  if (kind == "kv_sort") {
    KvSortSol k;
    std::string op = jstr(j, "op");
    if (op != "argmax" && op != "argmin") throw SchemaError("kv_sort op must be argmax|argmin");
    k.op = op == "argmax" ? KvOp::kArgmax : KvOp::kArgmin;
    for (const auto& jp : jreq(j, "pairs")) {
      KvPair p;
      p.key = span_from_json(jreq(jp, "span"));
      NumberRef r = numref_from_json(jreq(jp, "ref"));
      if (r.kind != NumberRef::Kind::kDocOccurrence)
        throw SchemaError("kv_sort values must be document occurrences");
      p.mention_index = r.mention_index;
      k.pairs.push_back(p);
    }
    return Solution(std::move(k));
  }
  if (kind == "sql") {
    SqlSol s;
    s.select_col = jreq(j, "select_col").get<int>();
    auto agg = agg_from_name(jstr(j, "agg"));
    if (!agg) throw SchemaError("unknown agg operator");
    s.agg = *agg;
    for (const auto& jc : jreq(j, "conds")) {
      SqlCond c;
      c.column = jreq(jc, "column").get<int>();
      auto cmp = cmp_from_name(jstr(jc, "cmp"));
      if (!cmp) throw SchemaError("unknown comparison operator");
      c.cmp = *cmp;
      c.value = span_from_json(jreq(jc, "value"));
      s.conds.push_back(c);
    }
    return Solution(std::move(s));
  }
  throw SchemaError("unknown solution kind \"" + kind + "\"");
}

}  // namespace wsqa
