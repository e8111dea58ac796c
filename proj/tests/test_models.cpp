#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wsqa/grammar.hpp"
#include "wsqa/models.hpp"

using namespace wsqa;
using namespace wsqa::testutil;

namespace {

Instance five_cats() {
  Instance inst;
  inst.id = "cats";
  inst.family = Family::kSpan;
  DocumentRef d;
  d.tokens = {"the", "cat", "sat", "the", "cat"};
  inst.reference = RefInfo(std::move(d));
  inst.question = {"which", "cat", "sat"};
  inst.answer = Answer(TextValue{{"the", "cat"}});
  return inst;
}

// central finite differences over every weight named in the analytic gradient
template <typename Model, typename Objective>
double max_grad_rel_err(Model& model, const FeatureVector& analytic_grad, Objective obj,
                        double eps = 1e-5) {
  double worst = 0.0;
  for (const auto& [name, g] : analytic_grad) {
    model.nudge_weight(name, eps);
    double up = obj();
    model.nudge_weight(name, -2 * eps);
    double down = obj();
    model.nudge_weight(name, eps);
    double fd = (up - down) / (2 * eps);
    double denom = std::max({std::abs(fd), std::abs(g), 1e-8});
    worst = std::max(worst, std::abs(fd - g) / denom);
  }
  return worst;
}

// analytic gradient recovered from one sgd step with lr 1
FeatureVector step_delta(TaskModel& m, const std::function<void()>& step) {
  FeatureVector before = m.weights_view();
  step();
  FeatureVector after = m.weights_view();
  FeatureVector grad;
  for (const auto& [name, v] : after) {
    double d = v - (before.count(name) ? before.at(name) : 0.0);
    if (d != 0.0) grad[name] = d;
  }
  for (const auto& [name, v] : before)
    if (!after.count(name) && v != 0.0) grad[name] = -v;
  m.load_weights(before);
  return grad;
}

}  // namespace

TEST_CASE("encoding distinguishes same-surface spans") {
  Instance inst = five_cats();
  EncodedSolution a = encode_solution(Solution(SpanSol{Span{SpanSource::kReference, 0, 1}}),
                                      inst.reference, inst.question);
  EncodedSolution b = encode_solution(Solution(SpanSol{Span{SpanSource::kReference, 3, 4}}),
                                      inst.reference, inst.question);
  CHECK(!(a == b));
}

TEST_CASE("encoding structure for equations") {
  Instance inst;
  inst.family = Family::kDiscrete;
  DocumentRef d;
  d.tokens = {"x", "x", "x", "x", "x", "x", "x", "x", "x", "3"};
  d.numbers = {NumberMention{9, Decimal::from_int(3)}};
  inst.reference = RefInfo(std::move(d));
  inst.question = {"q"};
  ArithSol z;
  z.terms = {ArithTerm{Sign::kPlus, NumberRef::constant(Decimal::from_int(100))},
             ArithTerm{Sign::kPlus, NumberRef::doc(0)}};
  EncodedSolution enc = encode_solution(Solution(z), inst.reference, inst.question);
  REQUIRE(enc.symbols.size() == 5);
  CHECK(enc.symbols[0].kind == EncSymbol::Kind::kSolStart);
  CHECK(enc.symbols[1].op == "+");
  CHECK(enc.symbols[2].kind == EncSymbol::Kind::kConstant);
  CHECK(enc.symbols[2].constant == Decimal::from_int(100));
  CHECK(enc.symbols[3].op == "+");
  CHECK(enc.symbols[4].kind == EncSymbol::Kind::kSpanPlaceholder);
  CHECK(enc.symbols[4].span_tokens == TokenSeq{"3"});
}

TEST_CASE("encoding ignores tokens far from the referred span") {
  Instance inst = five_cats();
  Solution z(SpanSol{Span{SpanSource::kReference, 0, 1}});
  EncodedSolution before = encode_solution(z, inst.reference, inst.question);
  auto* doc = std::get_if<DocumentRef>(&inst.reference);
  doc->tokens[4] = "dog";  // five positions from the start of span (0,1), not same-surface
  EncodedSolution after = encode_solution(z, inst.reference, inst.question);
  CHECK(before == after);
}

TEST_CASE("task distribution: uniform, shift-invariant, singleton") {
  TaskModel m;
  Instance inst = five_cats();
  std::vector<SparseFeats> cands;
  for (int s = 0; s < 4; ++s)
    cands.push_back(m.extract(inst, Solution(SpanSol{Span{SpanSource::kReference, s, s}})));
  std::vector<double> p = task_distribution(m, cands);
  for (double v : p) CHECK(v == doctest::Approx(0.25));

  // shifting every score by a constant leaves the distribution unchanged
  std::vector<double> scores = task_scores(m, cands);
  std::vector<double> shifted = scores;
  for (double& s : shifted) s += 10.0;
  std::vector<double> p1 = softmax(scores), p2 = softmax(shifted);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-9));

  std::vector<SparseFeats> one = {cands[0]};
  CHECK(task_distribution(m, one)[0] == doctest::Approx(1.0));
}

TEST_CASE("posterior over Z normalizes exactly") {
  TaskModel m;
  Instance inst = five_cats();
  SolutionSet z;
  z.instance_id = inst.id;
  z.solutions = {Solution(SpanSol{Span{SpanSource::kReference, 0, 1}}),
                 Solution(SpanSol{Span{SpanSource::kReference, 3, 4}})};
  // give the members unnormalized probabilities 0.1 and 0.3 via direct scores
  m.nudge_weight("sp_ord=0", 0.0);  // ensure features exist
  std::vector<SparseFeats> feats;
  for (const auto& s : z.solutions) feats.push_back(m.extract(inst, s));
  // ordinal features differ between the two spans; use them to set scores
  m.nudge_weight("sp_ord=0", std::log(0.1));
  m.nudge_weight("sp_ord=1", std::log(0.3));
  std::vector<double> p = posterior_over_Z(m, inst, z);
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.75));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-9));

  SolutionSet single;
  single.instance_id = inst.id;
  single.solutions = {z.solutions[0]};
  CHECK(posterior_over_Z(m, inst, single)[0] == doctest::Approx(1.0));

  SolutionSet five;
  five.instance_id = inst.id;
  TaskModel uniform;
  for (int s = 0; s < 5; ++s)
    five.solutions.push_back(Solution(SpanSol{Span{SpanSource::kReference, s, s}}));
  for (double v : posterior_over_Z(uniform, inst, five)) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("task gradient matches finite differences on random instances") {
  DetRng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst;
    if (trial % 3 == 0)
      inst = random_span_instance(rng, "g");
    else if (trial % 3 == 1)
      inst = random_discrete_instance(rng, "g");
    else
      inst = random_sql_instance(rng, "g");
    EnumConfig cfg;
    SolutionSet z = build_solution_set(inst, cfg);
    if (z.solutions.empty()) continue;
    TaskModel m;
    GrammarScorer scorer(m, inst, cfg, &z);
    // random non-zero starting point
    for (const auto& f : scorer.z_feats()) m.ascend(f, rng.next_unit() - 0.5);
    int target = static_cast<int>(rng.next_below(z.solutions.size()));
    auto objective = [&] {
      return scorer.score_solution(z.solutions[target]) - scorer.log_partition();
    };
    FeatureVector grad = step_delta(m, [&] { scorer.ascend_z_targets({{target, 1.0}}, 1.0); });
    CHECK(max_grad_rel_err(m, grad, objective) < 1e-4);
  }
}

TEST_CASE("sgd step: zero-weight target is a no-op; repeated steps converge") {
  TaskModel m;
  Instance inst = five_cats();
  std::vector<SparseFeats> cands;
  std::vector<Solution> zs;
  for (int s = 0; s < 4; ++s) {
    zs.push_back(Solution(SpanSol{Span{SpanSource::kReference, s, s + 1}}));
    cands.push_back(m.extract(inst, zs.back()));
  }
  FeatureVector before = m.weights_view();
  sgd_step_task(m, cands, {{1, 0.0}}, 0.5);
  CHECK(m.weights_view() == before);

  for (int step = 0; step < 500; ++step) sgd_step_task(m, cands, {{2, 1.0}}, 0.5);
  CHECK(task_distribution(m, cands)[2] >= 0.99);
  CHECK_THROWS_AS(sgd_step_task(m, cands, {{0, 1.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("reconstructor: uniform log-likelihood at zero weights") {
  Reconstructor r({"a", "b", "c"});  // V = 5 with OOV and END
  Instance inst = five_cats();
  Solution z(SpanSol{Span{SpanSource::kReference, 0, 1}});
  TokenSeq q = {"a", "b"};
  double ll = r.loglik(q, inst.reference, z);
  CHECK(ll == doctest::Approx(3.0 * std::log(1.0 / 5.0)));
}

TEST_CASE("reconstructor log-likelihood is local to the referred span") {
  Instance inst = five_cats();
  Reconstructor r({"which", "cat", "sat"});
  Solution z(SpanSol{Span{SpanSource::kReference, 0, 1}});
  double before = r.loglik(inst.question, inst.reference, z);
  auto* doc = std::get_if<DocumentRef>(&inst.reference);
  doc->tokens[4] = "dog";
  double after = r.loglik(inst.question, inst.reference, z);
  CHECK(before == doctest::Approx(after));
}

TEST_CASE("reconstructor training raises the log-likelihood") {
  Instance inst = five_cats();
  Reconstructor r({"which", "cat", "sat"});
  Solution z(SpanSol{Span{SpanSource::kReference, 0, 1}});
  double first = r.loglik(inst.question, inst.reference, z);
  for (int i = 0; i < 50; ++i) r.sgd_step(inst.question, inst.reference, z, 0.2);
  double last = r.loglik(inst.question, inst.reference, z);
  CHECK(last > first);
}

TEST_CASE("reconstructor gradient matches finite differences") {
  DetRng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = trial % 2 == 0 ? random_span_instance(rng, "r")
                                   : random_discrete_instance(rng, "r");
    EnumConfig cfg;
    SolutionSet z = build_solution_set(inst, cfg);
    if (z.solutions.empty()) continue;
    Reconstructor r({"how", "many", "which", "here", "oak", "pine"});
    const Solution& target = z.solutions[rng.next_below(z.solutions.size())];
    // one warmup step so weights are off zero
    r.sgd_step(inst.question, inst.reference, target, 0.1);

    FeatureVector before = r.weights_view();
    r.sgd_step(inst.question, inst.reference, target, 1.0);
    FeatureVector after = r.weights_view();
    FeatureVector grad;
    for (const auto& [name, v] : after) {
      double d = v - (before.count(name) ? before.at(name) : 0.0);
      if (d != 0.0) grad[name] = d;
    }
    r.load_weights(before);

    auto obj = [&] { return r.loglik(inst.question, inst.reference, target); };
    double worst = 0.0;
    for (const auto& [name, g] : grad) {
      const double eps = 1e-5;
      r.nudge_weight(name, eps);
      double up = obj();
      r.nudge_weight(name, -2 * eps);
      double down = obj();
      r.nudge_weight(name, eps);
      double fd = (up - down) / (2 * eps);
      double denom = std::max({std::abs(fd), std::abs(g), 1e-8});
      worst = std::max(worst, std::abs(fd - g) / denom);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("reconstructor separates gold from spurious after training") {
  // Gold context words appear in the question; the spurious mention's do not.
  Instance inst;
  inst.family = Family::kSpan;
  DocumentRef d;
  d.tokens = {"lumo", "cat", "vasi", "x", "rade", "cat", "bopu"};
  inst.reference = RefInfo(std::move(d));
  inst.question = {"which", "cat", "near", "lumo", "vasi"};
  Solution gold(SpanSol{Span{SpanSource::kReference, 1, 1}});
  Solution spurious(SpanSol{Span{SpanSource::kReference, 5, 5}});
  Reconstructor r({"which", "cat", "near", "lumo", "vasi"});
  for (int i = 0; i < 200; ++i) r.sgd_step(inst.question, inst.reference, gold, 0.2);
  CHECK(r.loglik(inst.question, inst.reference, gold) >
        r.loglik(inst.question, inst.reference, spurious));
}

TEST_CASE("factorized sql scorer agrees with explicit enumeration") {
  DetRng rng(606);
  EnumConfig cfg;
  for (int trial = 0; trial < 8; ++trial) {
    Instance inst = random_sql_instance(rng, "f" + std::to_string(trial));
    TaskModel m;
    GrammarScorer scorer(m, inst, cfg, nullptr);

    // Explicit candidate list: same caps, brute force.
    const auto* table = as_table(inst.reference);
    std::vector<SqlCond> all_conds;
    const int cols = static_cast<int>(table->header.size());
    for (int c = 0; c < cols; ++c)
      for (Cmp cmp : {Cmp::kEq, Cmp::kLt, Cmp::kGt})
        for (int s = 0; s < static_cast<int>(inst.question.size()); ++s)
          for (int e = s;
               e < std::min<int>(inst.question.size(), s + cfg.max_cond_span_len); ++e)
            all_conds.push_back(SqlCond{c, cmp, Span{SpanSource::kQuestion, s, e}});
    std::sort(all_conds.begin(), all_conds.end());
    std::vector<Solution> cands;
    const int nc = static_cast<int>(all_conds.size());
    for (int k = 0; k <= cfg.max_conds; ++k)
      subsets_of_size(nc, k, [&](const std::vector<int>& pick) {
        for (int sel = 0; sel < cols; ++sel)
          for (int a = 0; a < 6; ++a) {
            SqlSol s;
            s.select_col = sel;
            s.agg = static_cast<Agg>(a);
            for (int i : pick) s.conds.push_back(all_conds[i]);
            cands.push_back(Solution(std::move(s)));
          }
      });

    // randomize a few weights through a dummy ascent
    for (int i = 0; i < 3; ++i) {
      SparseFeats f = m.extract(inst, cands[rng.next_below(cands.size())]);
      m.ascend(f, rng.next_unit() - 0.5);
    }

    // log partition agreement
    double direct = 0.0;
    double mx = -1e300;
    std::vector<double> scores;
    scores.reserve(cands.size());
    for (const auto& z : cands) {
      SparseFeats f = m.extract(inst, z);
      scores.push_back(m.score(f));
      mx = std::max(mx, scores.back());
    }
    for (double s : scores) direct += std::exp(s - mx);
    double log_z_explicit = mx + std::log(direct);
    CHECK(scorer.log_partition() == doctest::Approx(log_z_explicit).epsilon(1e-9));

    // argmax agreement, ties resolved to enumeration order
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    CHECK(render_solution(canonicalize_solution(scorer.argmax())) ==
          render_solution(canonicalize_solution(cands[best])));

    // per-solution scores agree
    for (int probe = 0; probe < 5; ++probe) {
      const Solution& z = cands[rng.next_below(cands.size())];
      SparseFeats f = m.extract(inst, z);
      CHECK(scorer.score_solution(z) == doctest::Approx(m.score(f)).epsilon(1e-9));
    }
  }
}

TEST_CASE("weight views have no zero entries and are finite") {
  TaskModel m;
  m.nudge_weight("a", 1.5);
  m.nudge_weight("b", 0.0);
  FeatureVector w = m.weights_view();
  CHECK(w.count("a") == 1);
  CHECK(w.count("b") == 0);
  for (const auto& [name, v] : w) CHECK(std::isfinite(v));
}
