#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "wsqa/solutions.hpp"

using namespace wsqa;

namespace {

RefInfo doc_of(const TokenSeq& tokens, const std::vector<std::pair<int, long long>>& nums = {}) {
  DocumentRef d;
  d.tokens = tokens;
  for (auto [i, v] : nums) d.numbers.push_back(NumberMention{i, Decimal::from_int(v)});
  return RefInfo(std::move(d));
}

RefInfo bob_table() {
  TableRef t;
  t.header = {{"name"}, {"score"}};
  t.rows = {{Cell{std::string("ann")}, Cell{Decimal::from_int(3)}},
            {Cell{std::string("bob")}, Cell{Decimal::from_int(5)}}};
  return RefInfo(std::move(t));
}

const TokenSeq kBobQ = {"what", "did", "bob", "score"};

SqlSol sql(int sel, Agg agg, std::vector<SqlCond> conds = {}) {
  return SqlSol{sel, agg, std::move(conds)};
}

// row-scan oracle for a single query, written independently of the executor
std::optional<Decimal> row_scan_sum(const TableRef& t, int sel, int cond_col,
                                    const std::string& value) {
  Decimal total;
  bool any = false;
  for (const auto& row : t.rows) {
    if (row[cond_col].display() != value) continue;
    auto v = row[sel].as_number();
    if (!v) return std::nullopt;
    total = total + *v;
    any = true;
  }
  if (!any) return std::nullopt;
  return total;
}

}  // namespace

TEST_CASE("execute arithmetic") {
  RefInfo ref = doc_of({"a", "5", "b", "3"}, {{1, 5}, {3, 3}});
  ArithSol z;
  z.terms = {ArithTerm{Sign::kPlus, NumberRef::doc(0)},
             ArithTerm{Sign::kMinus, NumberRef::doc(1)}};
  auto r = execute_solution(Solution(z), ref, {"q"});
  REQUIRE(r);
  CHECK(std::get<NumberValue>(*r).value == Decimal::from_int(2));
}

TEST_CASE("execute sort") {
  RefInfo ref = doc_of({"3", "7", "5"}, {{0, 3}, {1, 7}, {2, 5}});
  auto r = execute_solution(Solution(SortSol{SortOp::kMax, {0, 1, 2}}), ref, {"q"});
  REQUIRE(r);
  CHECK(std::get<NumberValue>(*r).value == Decimal::from_int(7));
}

TEST_CASE("execute sql sum against row-scan oracle") {
  RefInfo ref = bob_table();
  // cond value "bob" is the question span (2,2)
  Solution z = sql(1, Agg::kSum, {SqlCond{0, Cmp::kEq, Span{SpanSource::kQuestion, 2, 2}}});
  auto r = execute_solution(z, ref, kBobQ);
  REQUIRE(r);
  auto expect = row_scan_sum(*as_table(ref), 1, 0, "bob");
  REQUIRE(expect);
  CHECK(std::get<NumberValue>(*r).value == *expect);
  CHECK(*expect == Decimal::from_int(5));
}

TEST_CASE("sql execution failure modes") {
  RefInfo ref = bob_table();
  // agg none over two rows
  CHECK(!execute_solution(sql(1, Agg::kNone), ref, kBobQ));
  // agg none over zero rows
  CHECK(!execute_solution(sql(1, Agg::kNone, {SqlCond{0, Cmp::kEq, {SpanSource::kQuestion, 0, 0}}}),
                          ref, kBobQ));
  // numeric aggregate over a text column
  CHECK(!execute_solution(sql(0, Agg::kSum), ref, kBobQ));
  // "<" against a non-numeric cell
  CHECK(!execute_solution(sql(1, Agg::kSum, {SqlCond{0, Cmp::kLt, {SpanSource::kQuestion, 2, 2}}}),
                          ref, kBobQ));
  // count works regardless of cell types
  auto r = execute_solution(sql(0, Agg::kCount), ref, kBobQ);
  REQUIRE(r);
  CHECK(std::get<NumberValue>(*r).value == Decimal::from_int(2));
}

TEST_CASE("kv-sort tie between distinct keys does not execute") {
  RefInfo ref = doc_of({"ann", "4", "bob", "4"}, {{1, 4}, {3, 4}});
  KvSortSol z;
  z.op = KvOp::kArgmax;
  z.pairs = {KvPair{Span{SpanSource::kReference, 0, 0}, 0},
             KvPair{Span{SpanSource::kReference, 2, 2}, 1}};
  CHECK(!execute_solution(Solution(z), ref, {"q"}));
  // same key twice with equal values is not ambiguous
  KvSortSol same;
  same.op = KvOp::kArgmax;
  same.pairs = {KvPair{Span{SpanSource::kReference, 0, 0}, 0},
                KvPair{Span{SpanSource::kReference, 0, 0}, 1}};
  auto r = execute_solution(Solution(same), ref, {"q"});
  REQUIRE(r);
  CHECK(std::get<TextValue>(*r).tokens == TokenSeq{"ann"});
}

TEST_CASE("canonicalize arithmetic: plus terms first, stable blocks") {
  ArithSol z;
  z.terms = {ArithTerm{Sign::kPlus, NumberRef::doc(9)}, ArithTerm{Sign::kPlus, NumberRef::doc(5)}};
  Solution c = canonicalize_solution(Solution(z));
  const auto& cz = std::get<ArithSol>(c);
  CHECK(cz.terms[0].ref.mention_index == 5);
  CHECK(cz.terms[1].ref.mention_index == 9);

  ArithSol m;
  m.terms = {ArithTerm{Sign::kPlus, NumberRef::constant(Decimal::from_int(100))},
             ArithTerm{Sign::kMinus, NumberRef::doc(0)},
             ArithTerm{Sign::kPlus, NumberRef::doc(2)}};
  const auto& cm = std::get<ArithSol>(canonicalize_solution(Solution(m)));
  CHECK(cm.terms[0].sign == Sign::kPlus);
  CHECK(cm.terms[0].ref.kind == NumberRef::Kind::kDocOccurrence);  // doc before constant
  CHECK(cm.terms[1].ref.kind == NumberRef::Kind::kConstant);
  CHECK(cm.terms[2].sign == Sign::kMinus);
}

TEST_CASE("canonicalize sql conditions sort by (column, cmp, span)") {
  SqlSol z = sql(0, Agg::kNone,
                 {SqlCond{1, Cmp::kEq, {SpanSource::kQuestion, 1, 1}},
                  SqlCond{0, Cmp::kEq, {SpanSource::kQuestion, 0, 0}}});
  const auto& c = std::get<SqlSol>(canonicalize_solution(Solution(z)));
  CHECK(c.conds[0].column == 0);
  CHECK(c.conds[1].column == 1);
}

TEST_CASE("canonicalization is idempotent and execution-preserving on random solutions") {
  DetRng rng(321);
  int executed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Instance inst;
    double u = rng.next_unit();
    if (u < 0.4)
      inst = testutil::random_discrete_instance(rng, "r");
    else if (u < 0.7)
      inst = testutil::random_sql_instance(rng, "r");
    else
      inst = testutil::random_span_instance(rng, "r");

    // Build a random well-formed-ish solution for the instance.
    Solution z;
    if (inst.family == Family::kSql) {
      const auto* t = as_table(inst.reference);
      SqlSol s;
      s.select_col = static_cast<int>(rng.next_below(t->header.size()));
      s.agg = static_cast<Agg>(rng.next_below(6));
      int k = static_cast<int>(rng.next_below(3));
      for (int i = 0; i < k; ++i) {
        int a = static_cast<int>(rng.next_below(inst.question.size()));
        s.conds.push_back(SqlCond{static_cast<int>(rng.next_below(t->header.size())),
                                  static_cast<Cmp>(rng.next_below(3)),
                                  Span{SpanSource::kQuestion, a, a}});
      }
      z = Solution(std::move(s));
    } else if (const auto* d = as_document(inst.reference); d && !d->numbers.empty()) {
      ArithSol s;
      int k = 1 + static_cast<int>(rng.next_below(std::min<std::size_t>(3, d->numbers.size())));
      for (int i = 0; i < k; ++i)
        s.terms.push_back(ArithTerm{i == 0 ? Sign::kPlus
                                           : (rng.next_unit() < 0.5 ? Sign::kPlus : Sign::kMinus),
                                    NumberRef::doc(static_cast<int>(rng.next_below(
                                        d->numbers.size())))});
      z = Solution(std::move(s));
    } else {
      const auto* d = as_document(inst.reference);
      int a = static_cast<int>(rng.next_below(d->tokens.size()));
      z = Solution(SpanSol{Span{SpanSource::kReference, a, a}});
    }

    Solution c1 = canonicalize_solution(z);
    Solution c2 = canonicalize_solution(c1);
    CHECK(c1 == c2);

    auto r1 = execute_solution(z, inst.reference, inst.question);
    auto r2 = execute_solution(c1, inst.reference, inst.question);
    CHECK(r1.has_value() == r2.has_value());
    if (r1 && r2) {
      ++executed;
      // list results compare as multisets through answer equality
      CHECK(answer_equal(*r1, *r2));
    }
  }
  CHECK(executed > 100);
}

TEST_CASE("render: examples and injectivity") {
  CHECK(render_solution(Solution(SpanSol{Span{SpanSource::kReference, 0, 1}})) == "span(d,0,1)");
  ArithSol a;
  a.terms = {ArithTerm{Sign::kPlus, NumberRef::doc(5)},
             ArithTerm{Sign::kMinus, NumberRef::constant(Decimal::from_int(1))}};
  CHECK(render_solution(Solution(a)) == "arith(+n@5,-c1)");

  DetRng rng(99);
  std::set<std::string> seen;
  std::vector<Solution> all;
  for (int i = 0; i < 40; ++i) {
    all.push_back(Solution(SpanSol{Span{SpanSource::kReference, i, i + 1}}));
    all.push_back(Solution(SortSol{SortOp::kMax, {i, i + 1}}));
    all.push_back(Solution(SortSol{SortOp::kMin, {i, i + 1}}));
    SqlSol s = sql(i % 3, static_cast<Agg>(i % 6));
    all.push_back(Solution(s));
  }
  for (const auto& z : all) CHECK(seen.insert(render_solution(canonicalize_solution(z))).second);
}

TEST_CASE("solution violations catch structural problems") {
  RefInfo ref = doc_of({"a", "b"});
  CHECK(solution_violations(Solution(SpanSol{Span{SpanSource::kReference, 0, 5}}), ref, {"q"})
            .size() == 1);
  ArithSol dup;
  dup.terms = {ArithTerm{Sign::kPlus, NumberRef::doc(0)},
               ArithTerm{Sign::kMinus, NumberRef::doc(0)}};
  CHECK(!solution_violations(Solution(dup), ref, {"q"}).empty());
}
