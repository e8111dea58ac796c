#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "wsqa/enumerate.hpp"
#include "wsqa/synth.hpp"

using namespace wsqa;
using namespace wsqa::testutil;

namespace {

Instance span_instance(const TokenSeq& doc_tokens, const TokenSeq& answer) {
  Instance inst;
  inst.id = "s";
  inst.family = Family::kSpan;
  DocumentRef d;
  d.tokens = doc_tokens;
  inst.reference = RefInfo(std::move(d));
  inst.question = {"q"};
  inst.answer = Answer(TextValue{answer});
  return inst;
}

Instance numeric_instance(const std::vector<std::pair<int, long long>>& nums,
                          const TokenSeq& tokens, long long answer) {
  Instance inst;
  inst.id = "n";
  inst.family = Family::kDiscrete;
  DocumentRef d;
  d.tokens = tokens;
  for (auto [i, v] : nums) d.numbers.push_back(NumberMention{i, Decimal::from_int(v)});
  inst.reference = RefInfo(std::move(d));
  inst.question = {"q"};
  inst.answer = Answer(NumberValue{Decimal::from_int(answer)});
  return inst;
}

std::set<std::string> rendered(const SolutionSet& s) {
  std::set<std::string> out;
  for (const auto& z : s.solutions) out.insert(render_solution(z));
  return out;
}

}  // namespace

TEST_CASE("enumerate_spans finds all exact matches left to right") {
  SolutionSet z = enumerate_spans(span_instance({"the", "cat", "sat", "the", "cat"},
                                                {"the", "cat"}));
  REQUIRE(z.size() == 2);
  CHECK(std::get<SpanSol>(z.solutions[0]).span == Span{SpanSource::kReference, 0, 1});
  CHECK(std::get<SpanSol>(z.solutions[1]).span == Span{SpanSource::kReference, 3, 4});
  CHECK(!z.truncated);

  CHECK(enumerate_spans(span_instance({"the", "cat"}, {"dog"})).size() == 0);
  SolutionSet single = enumerate_spans(span_instance({"cat"}, {"cat"}));
  REQUIRE(single.size() == 1);
  CHECK(std::get<SpanSol>(single.solutions[0]).span == Span{SpanSource::kReference, 0, 0});
}

TEST_CASE("enumerate_numeric matches the expression oracle on the worked cases") {
  EnumConfig cfg;  // constants {1, 100}
  // two numbers 2@5 and 3@9
  TokenSeq toks = {"a", "b", "c", "d", "e", "2", "f", "g", "h", "3"};
  auto mk = [&](long long a) {
    return numeric_instance({{5, 2}, {9, 3}}, toks, a);
  };

  SolutionSet z5 = enumerate_numeric(mk(5), cfg);
  CHECK(rendered(z5) == std::set<std::string>{"arith(+n@0,+n@1)"});
  CHECK(same_solution_set(z5.solutions, oracle_solution_set(mk(5), cfg)));

  SolutionSet z2 = enumerate_numeric(mk(2), cfg);
  CHECK(rendered(z2) ==
        std::set<std::string>{"arith(+n@0)", "arith(+n@1,-c1)", "sort(min,n@0,n@1)"});
  CHECK(same_solution_set(z2.solutions, oracle_solution_set(mk(2), cfg)));

  SolutionSet z104 = enumerate_numeric(mk(104), cfg);
  CHECK(rendered(z104) == std::set<std::string>{"arith(+n@1,+c1,+c100)"});
  CHECK(same_solution_set(z104.solutions, oracle_solution_set(mk(104), cfg)));
}

TEST_CASE("counting respects the subset budget") {
  EnumConfig cfg;
  Instance inst = numeric_instance({}, {"a", "b", "c", "d", "e", "f"}, 2);
  for (int i = 0; i < 5; ++i)
    inst.mention_candidates.push_back(Span{SpanSource::kReference, i, i});
  SolutionSet z = enumerate_numeric(inst, cfg);
  CHECK(z.size() == 10);  // C(5,2)
  CHECK(!z.truncated);

  cfg.count_subset_budget = 9;
  SolutionSet capped = enumerate_numeric(inst, cfg);
  REQUIRE(capped.size() == 1);
  CHECK(capped.truncated);
  CHECK(render_solution(capped.solutions[0]) == "count(span(d,0,0),span(d,1,1))");
}

TEST_CASE("enumerate_span_like: kv sorts and span matches") {
  EnumConfig cfg;
  Instance inst;
  inst.id = "kv";
  inst.family = Family::kDiscrete;
  DocumentRef d;
  d.tokens = {"alice", "3", "bob", "7"};
  d.numbers = {NumberMention{1, Decimal::from_int(3)}, NumberMention{3, Decimal::from_int(7)}};
  inst.reference = RefInfo(std::move(d));
  inst.question = {"who", "wins"};
  inst.answer = Answer(TextValue{{"bob"}});
  inst.kv_candidates = {KvCandidate{Span{SpanSource::kReference, 0, 0}, 0},
                        KvCandidate{Span{SpanSource::kReference, 2, 2}, 1}};
  SolutionSet z = enumerate_span_like(inst, cfg);
  auto names = rendered(z);
  CHECK(names.count("kv_sort(argmax,span(d,0,0):n@0,span(d,2,2):n@1)") == 1);
  CHECK(names.count("span(d,2,2)") == 1);  // the document mention of "bob"
  // argmin would yield alice, so it is not in Z
  CHECK(names.count("kv_sort(argmin,span(d,0,0):n@0,span(d,2,2):n@1)") == 0);
  CHECK(same_solution_set(z.solutions, oracle_solution_set(inst, cfg)));
}

TEST_CASE("enumerate_span_like: list answers take one combination per match set") {
  EnumConfig cfg;
  Instance inst;
  inst.id = "list";
  inst.family = Family::kDiscrete;
  DocumentRef d;
  d.tokens = {"a", "x", "b"};
  inst.reference = RefInfo(std::move(d));
  inst.question = {"q"};
  inst.answer = Answer(TextListValue{{{"a"}, {"b"}}});
  SolutionSet z = enumerate_span_like(inst, cfg);
  REQUIRE(z.size() == 1);
  CHECK(render_solution(z.solutions[0]) == "spans(span(d,0,0),span(d,2,2))");
}

TEST_CASE("enumerate_sql reproduces the worked example exactly") {
  EnumConfig cfg;
  Instance inst;
  inst.id = "sql";
  inst.family = Family::kSql;
  TableRef t;
  t.header = {{"name"}, {"score"}};
  t.rows = {{Cell{std::string("ann")}, Cell{Decimal::from_int(3)}},
            {Cell{std::string("bob")}, Cell{Decimal::from_int(5)}}};
  inst.reference = RefInfo(std::move(t));
  inst.question = {"what", "did", "bob", "score"};
  inst.answer = Answer(NumberValue{Decimal::from_int(5)});

  SolutionSet z = enumerate_sql(inst, cfg);
  auto names = rendered(z);
  // the six solutions from the worked example
  CHECK(names.count("sql(sel=1,agg=none,cond(0,=,q(2,2)))") == 1);
  CHECK(names.count("sql(sel=1,agg=max)") == 1);
  CHECK(names.count("sql(sel=1,agg=sum,cond(0,=,q(2,2)))") == 1);
  CHECK(names.count("sql(sel=1,agg=mean,cond(0,=,q(2,2)))") == 1);
  CHECK(names.count("sql(sel=1,agg=max,cond(0,=,q(2,2)))") == 1);
  CHECK(names.count("sql(sel=1,agg=min,cond(0,=,q(2,2)))") == 1);
  CHECK(same_solution_set(z.solutions, oracle_solution_set(inst, cfg)));
  // enumeration order: condition count ascending
  CHECK(render_solution(z.solutions[0]) == "sql(sel=1,agg=max)");

  // count over no conditions hits answer 2 for every select column
  Instance count_inst = inst;
  count_inst.answer = Answer(NumberValue{Decimal::from_int(2)});
  SolutionSet z2 = enumerate_sql(count_inst, cfg);
  auto names2 = rendered(z2);
  CHECK(names2.count("sql(sel=0,agg=count)") == 1);
  CHECK(names2.count("sql(sel=1,agg=count)") == 1);
  CHECK(same_solution_set(z2.solutions, oracle_solution_set(count_inst, cfg)));

  Instance miss = inst;
  miss.answer = Answer(TextValue{{"zzz"}});
  CHECK(enumerate_sql(miss, cfg).size() == 0);
}

TEST_CASE("build_solution_set dispatches, caps, and keeps soundness") {
  EnumConfig cfg;
  Instance inst = span_instance({"the", "cat", "sat", "the", "cat"}, {"the", "cat"});
  SolutionSet z = build_solution_set(inst, cfg);
  CHECK(z.size() == 2);

  cfg.z_cap = 1;
  SolutionSet capped = build_solution_set(inst, cfg);
  CHECK(capped.size() == 1);
  CHECK(capped.truncated);
}

TEST_CASE("uncapped enumeration equals the oracle on random small instances") {
  EnumConfig cfg;
  cfg.z_cap = 1'000'000'000;
  DetRng rng(2024);
  for (int i = 0; i < 40; ++i) {
    Instance a = random_span_instance(rng, "a" + std::to_string(i));
    CHECK(same_solution_set(build_solution_set(a, cfg).solutions, oracle_solution_set(a, cfg)));
    Instance b = random_discrete_instance(rng, "b" + std::to_string(i));
    CHECK(same_solution_set(build_solution_set(b, cfg).solutions, oracle_solution_set(b, cfg)));
    Instance c = random_sql_instance(rng, "c" + std::to_string(i));
    CHECK(same_solution_set(build_solution_set(c, cfg).solutions, oracle_solution_set(c, cfg)));
  }
}

TEST_CASE("enumeration is deterministic") {
  EnumConfig cfg;
  DetRng rng(77);
  for (int i = 0; i < 10; ++i) {
    Instance inst = random_sql_instance(rng, "d" + std::to_string(i));
    SolutionSet z1 = build_solution_set(inst, cfg);
    SolutionSet z2 = build_solution_set(inst, cfg);
    REQUIRE(z1.size() == z2.size());
    for (std::size_t k = 0; k < z1.size(); ++k) CHECK(z1.solutions[k] == z2.solutions[k]);
  }
}

TEST_CASE("gold is in Z across a generated benchmark") {
  for (Family fam : {Family::kSpan, Family::kDiscrete, Family::kSql}) {
    GenConfig g;
    g.family = fam;
    g.n_train = 60;
    g.n_dev = 15;
    g.n_test = 15;
    g.seed = 31;
    Benchmark b = generate_benchmark(g);
    EnumConfig cfg;
    int covered = 0, total = 0;
    for (const auto& inst : b.train.instances) {
      SolutionSet z = build_solution_set(inst, cfg);
      Solution gold = canonicalize_solution(*inst.gold_solution);
      ++total;
      for (const auto& s : z.solutions)
        if (s == gold) {
          ++covered;
          break;
        }
    }
    CHECK(static_cast<double>(covered) >= 0.99 * total);
  }
}

TEST_CASE("sidecar round trip") {
  EnumConfig cfg;
  DetRng rng(15);
  std::vector<SolutionSet> sets;
  Dataset ds;
  ds.family = Family::kSql;
  for (int i = 0; i < 5; ++i) {
    Instance inst = random_sql_instance(rng, "e" + std::to_string(i));
    sets.push_back(build_solution_set(inst, cfg));
    ds.instances.push_back(std::move(inst));
  }
  std::string path = (std::filesystem::temp_directory_path() / "wsqa_sidecar.jsonl").string();
  save_sidecar(sets, path);
  SolutionSidecar loaded = load_sidecar(path);
  REQUIRE(loaded.size() == sets.size());
  for (const auto& s : sets) {
    const auto& l = loaded.at(s.instance_id);
    CHECK(l.truncated == s.truncated);
    REQUIRE(l.size() == s.size());
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(l.solutions[k] == s.solutions[k]);
  }
}
