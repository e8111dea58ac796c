#include "wsqa/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace wsqa {

std::vector<double> posterior_over_Z(TaskModel& m, const Instance& inst,
                                     const SolutionSet& z_set) {
  if (z_set.solutions.empty()) throw std::invalid_argument("posterior over empty solution set");
  std::vector<SparseFeats> feats;
  feats.reserve(z_set.solutions.size());
  for (const auto& z : z_set.solutions) feats.push_back(m.extract(inst, z));
  return task_distribution(m, feats);
}

namespace {

struct SolutionOrder {
  bool operator()(const Solution& a, const Solution& b) const { return solution_less(a, b); }
};

struct Combinations {
  int n, k;
  std::vector<int> idx;
  bool done = false;
  Combinations(int n_, int k_) : n(n_), k(k_) {
    if (k > n || k < 0) {
      done = true;
      return;
    }
    idx.resize(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
  }
  bool next() {
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) {
      done = true;
      return false;
    }
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    return true;
  }
};

double lse(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double x : v) z += std::exp(x - m);
  return m + std::log(z);
}

}  // namespace

// ---------------------------------------------------------------------------
// Explicit grammars (span and discrete families).
// ---------------------------------------------------------------------------

namespace {

// Grammar candidates in deterministic enumeration order, canonical form.
std::vector<Solution> explicit_grammar(const Instance& inst, const EnumConfig& cfg) {
  std::vector<Solution> out;
  const auto* doc = as_document(inst.reference);
  if (!doc) return out;
  const int dlen = static_cast<int>(doc->tokens.size());

  auto add_spans = [&](SpanSource src, int len_limit) {
    const int n = src == SpanSource::kReference ? dlen : static_cast<int>(inst.question.size());
    for (int s = 0; s < n; ++s)
      for (int e = s; e < std::min(n, s + len_limit); ++e)
        out.push_back(SpanSol{Span{src, s, e}});
  };

  if (inst.family == Family::kSpan) {
    add_spans(SpanSource::kReference, cfg.max_span_len);
    return out;
  }

  // Discrete family: document and question spans, equations, sorts,
  // counting subsets, key-value sorts. Multi-span list solutions are not
  // enumerable without the answer and are not part of the grammar.
  add_spans(SpanSource::kReference, cfg.max_span_len);
  add_spans(SpanSource::kQuestion, cfg.max_span_len);

  std::vector<NumberRef> pool;
  for (int i = 0; i < static_cast<int>(doc->numbers.size()); ++i) pool.push_back(NumberRef::doc(i));
  std::vector<Decimal> consts = cfg.constants;
  std::sort(consts.begin(), consts.end());
  consts.erase(std::unique(consts.begin(), consts.end()), consts.end());
  for (Decimal c : consts) pool.push_back(NumberRef::constant(c));

  for (int k = 1; k <= cfg.max_terms; ++k) {
    for (Combinations c(static_cast<int>(pool.size()), k); !c.done; c.next()) {
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        if (mask == (1u << k) - 1) continue;
        ArithSol sol;
        for (int j = 0; j < k; ++j)
          sol.terms.push_back(
              ArithTerm{(mask >> j) & 1 ? Sign::kMinus : Sign::kPlus, pool[c.idx[j]]});
        out.push_back(canonicalize_solution(Solution(std::move(sol))));
      }
    }
  }

  const int n_mentions = static_cast<int>(doc->numbers.size());
  for (int k = 2; k <= cfg.kv_subset_max; ++k) {
    for (Combinations c(n_mentions, k); !c.done; c.next()) {
      for (SortOp op : {SortOp::kMax, SortOp::kMin})
        out.push_back(SortSol{op, std::vector<int>(c.idx.begin(), c.idx.end())});
    }
  }

  if (!inst.mention_candidates.empty()) {
    std::vector<Span> cands = inst.mention_candidates;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    const int n = static_cast<int>(cands.size());
    for (int k = 1; k <= n; ++k) {
      if (binomial_capped(n, k, cfg.count_subset_budget) <= cfg.count_subset_budget) {
        for (Combinations c(n, k); !c.done; c.next()) {
          CountSol sol;
          for (int j = 0; j < k; ++j) sol.spans.push_back(cands[c.idx[j]]);
          out.push_back(Solution(std::move(sol)));
        }
      } else {
        CountSol sol;
        for (int j = 0; j < k; ++j) sol.spans.push_back(cands[j]);
        out.push_back(Solution(std::move(sol)));
      }
    }
  }

  if (!inst.kv_candidates.empty()) {
    std::vector<KvCandidate> kvs = inst.kv_candidates;
    std::sort(kvs.begin(), kvs.end());
    kvs.erase(std::unique(kvs.begin(), kvs.end()), kvs.end());
    for (int k = 2; k <= cfg.kv_subset_max; ++k) {
      for (Combinations c(static_cast<int>(kvs.size()), k); !c.done; c.next()) {
        for (KvOp op : {KvOp::kArgmax, KvOp::kArgmin}) {
          KvSortSol sol;
          sol.op = op;
          for (int j = 0; j < k; ++j)
            sol.pairs.push_back(KvPair{kvs[c.idx[j]].span, kvs[c.idx[j]].mention_index});
          out.push_back(Solution(std::move(sol)));
        }
      }
    }
  }
  return out;
}

}  // namespace

void GrammarScorer::build_explicit(const EnumConfig& cfg, const SolutionSet* z_set) {
  cands_ = explicit_grammar(*inst_, cfg);
  std::set<Solution, SolutionOrder> seen;
  std::vector<Solution> dedup;
  dedup.reserve(cands_.size());
  for (auto& z : cands_)
    if (seen.insert(z).second) dedup.push_back(std::move(z));
  // Sidecar solutions outside the grammar caps still get probability mass.
  if (z_set)
    for (const auto& z : z_set->solutions)
      if (seen.insert(z).second) dedup.push_back(z);
  cands_ = std::move(dedup);
  cand_feats_.reserve(cands_.size());
  for (const auto& z : cands_) cand_feats_.push_back(model_->extract(*inst_, z));
}

// ---------------------------------------------------------------------------
// Factorized sql grammar.
// ---------------------------------------------------------------------------

struct GrammarScorer::SqlFactor {
  int cols = 0;
  int max_conds = 0;
  std::vector<SparseFeats> sel_feats;
  std::vector<SparseFeats> agg_feats;  // six aggregators, enum order
  std::vector<SparseFeats> cnt_feats;  // per condition count 0..max_conds
  std::vector<SqlCond> conds;          // canonical order
  std::vector<SparseFeats> cond_feats;
  std::map<SqlCond, int> cond_index;

  struct Scores {
    std::vector<double> sel, agg, cnt, cond;
    std::vector<double> x;          // exp(cond - m), m = max cond score
    double m = 0.0;                 // shift
    std::vector<std::vector<double>> pre, suf;  // elementary symmetric prefix/suffix
    std::vector<double> ek;         // e_k over all conds, shifted domain
    std::vector<double> level;      // cnt[k] + k*m + log(e_k)
    double log_z_conds = 0.0;
    double log_z = 0.0;
  };

  Scores compute(const TaskModel& m) const {
    Scores s;
    for (const auto& f : sel_feats) s.sel.push_back(m.score(f));
    for (const auto& f : agg_feats) s.agg.push_back(m.score(f));
    for (const auto& f : cnt_feats) s.cnt.push_back(m.score(f));
    for (const auto& f : cond_feats) s.cond.push_back(m.score(f));
    const int n = static_cast<int>(conds.size());
    const int kmax = std::min(max_conds, n);
    s.m = 0.0;
    for (double v : s.cond) s.m = std::max(s.m, v);
    s.x.resize(n);
    for (int i = 0; i < n; ++i) s.x[i] = std::exp(s.cond[i] - s.m);
    // pre[i][j] = e_j(x_0..x_{i-1}); suf[i][j] = e_j(x_i..x_{n-1}).
    s.pre.assign(n + 1, std::vector<double>(kmax + 1, 0.0));
    s.suf.assign(n + 2, std::vector<double>(kmax + 1, 0.0));
    for (int i = 0; i <= n; ++i) s.pre[i][0] = 1.0;
    for (int i = 0; i <= n + 1; ++i) s.suf[i][0] = 1.0;
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= kmax; ++j)
        s.pre[i][j] = s.pre[i - 1][j] + s.x[i - 1] * s.pre[i - 1][j - 1];
    for (int i = n; i >= 1; --i)
      for (int j = 1; j <= kmax; ++j)
        s.suf[i][j] = s.suf[i + 1][j] + s.x[i - 1] * s.suf[i + 1][j - 1];
    s.ek.resize(kmax + 1);
    for (int j = 0; j <= kmax; ++j) s.ek[j] = s.pre[n][j];
    s.level.clear();
    for (int k = 0; k <= kmax; ++k)
      if (s.ek[k] > 0.0) s.level.push_back(s.cnt[k] + k * s.m + std::log(s.ek[k]));
    s.log_z_conds = lse(s.level);
    s.log_z = lse(s.sel) + lse(s.agg) + s.log_z_conds;
    return s;
  }
};

void GrammarScorer::build_sql(const EnumConfig& cfg, const SolutionSet* z_set) {
  sql_ = std::make_unique<SqlFactor>();
  const auto* table = as_table(inst_->reference);
  if (!table) throw std::invalid_argument("sql grammar over non-table reference");
  sql_->cols = static_cast<int>(table->header.size());
  sql_->max_conds = cfg.max_conds;
  for (int c = 0; c < sql_->cols; ++c) sql_->sel_feats.push_back(model_->sql_sel_feats(*inst_, c));
  for (Agg a : {Agg::kNone, Agg::kSum, Agg::kMean, Agg::kMax, Agg::kMin, Agg::kCount})
    sql_->agg_feats.push_back(model_->sql_agg_feats(*inst_, a));
  for (int k = 0; k <= cfg.max_conds; ++k)
    sql_->cnt_feats.push_back(model_->sql_count_feats(*inst_, k));
  for (int col = 0; col < sql_->cols; ++col)
    for (Cmp cmp : {Cmp::kEq, Cmp::kLt, Cmp::kGt})
      for (int s = 0; s < static_cast<int>(inst_->question.size()); ++s) {
        int max_e = std::min(static_cast<int>(inst_->question.size()) - 1,
                             s + cfg.max_cond_span_len - 1);
        for (int e = s; e <= max_e; ++e)
          sql_->conds.push_back(SqlCond{col, cmp, Span{SpanSource::kQuestion, s, e}});
      }
  std::sort(sql_->conds.begin(), sql_->conds.end());
  for (int i = 0; i < static_cast<int>(sql_->conds.size()); ++i) {
    sql_->cond_index[sql_->conds[i]] = i;
    sql_->cond_feats.push_back(model_->sql_cond_feats(*inst_, sql_->conds[i]));
  }
  if (z_set) {
    for (const auto& z : z_set->solutions) {
      const auto* s = std::get_if<SqlSol>(&z);
      if (!s || static_cast<int>(s->conds.size()) > cfg.max_conds)
        throw DataError("sidecar solution outside the sql grammar caps for " + inst_->id);
      for (const auto& c : s->conds)
        if (!sql_->cond_index.count(c))
          throw DataError("sidecar condition outside the sql grammar caps for " + inst_->id);
    }
  }
}

GrammarScorer::~GrammarScorer() = default;

GrammarScorer::GrammarScorer(TaskModel& model, const Instance& inst, const EnumConfig& cfg,
                             const SolutionSet* z_set)
    : model_(&model), inst_(&inst) {
  if (inst.family == Family::kSql)
    build_sql(cfg, z_set);
  else
    build_explicit(cfg, z_set);
  if (z_set) {
    z_solutions_ = z_set->solutions;
    z_feats_.reserve(z_solutions_.size());
    for (const auto& z : z_solutions_) z_feats_.push_back(model_->extract(inst, z));
  }
}

double GrammarScorer::log_partition() const {
  if (sql_) return sql_->compute(*model_).log_z;
  if (cand_feats_.empty()) throw std::invalid_argument("empty grammar for " + inst_->id);
  std::vector<double> s = task_scores(*model_, cand_feats_);
  return lse(s);
}

double GrammarScorer::score_solution(const Solution& z) const {
  if (!sql_) {
    SparseFeats f = model_->extract(*inst_, z);
    return model_->score(f);
  }
  const auto& s = std::get<SqlSol>(z);
  double total = model_->score(sql_->cnt_feats[s.conds.size()]) +
                 model_->score(sql_->sel_feats[s.select_col]) +
                 model_->score(sql_->agg_feats[static_cast<int>(s.agg)]);
  for (const auto& c : s.conds) {
    auto it = sql_->cond_index.find(c);
    if (it == sql_->cond_index.end()) throw std::invalid_argument("condition outside grammar");
    total += model_->score(sql_->cond_feats[it->second]);
  }
  return total;
}

void GrammarScorer::ascend_expectation(double step) {
  if (step == 0.0) return;
  if (!sql_) {
    std::vector<double> p = task_distribution(*model_, cand_feats_);
    for (std::size_t i = 0; i < cand_feats_.size(); ++i)
      if (p[i] != 0.0) model_->ascend(cand_feats_[i], step * p[i]);
    return;
  }

  auto s = sql_->compute(*model_);
  const int n = static_cast<int>(sql_->conds.size());
  const int kmax = std::min(sql_->max_conds, n);
  std::vector<double> psel = softmax(s.sel), pagg = softmax(s.agg);
  for (int i = 0; i < static_cast<int>(psel.size()); ++i)
    model_->ascend(sql_->sel_feats[i], step * psel[i]);
  for (int a = 0; a < static_cast<int>(pagg.size()); ++a)
    model_->ascend(sql_->agg_feats[a], step * pagg[a]);
  // P(K = k) and per-condition inclusion probabilities.
  for (int k = 0; k <= kmax; ++k) {
    if (s.ek[k] <= 0.0) continue;
    double pk = std::exp(s.cnt[k] + k * s.m + std::log(s.ek[k]) - s.log_z_conds);
    model_->ascend(sql_->cnt_feats[k], step * pk);
  }
  for (int c = 0; c < n; ++c) {
    double incl = 0.0;
    for (int k = 1; k <= kmax; ++k) {
      // e_{k-1} over all conds except c, from prefix/suffix tables.
      double ek_minus = 0.0;
      for (int a = 0; a <= k - 1; ++a) ek_minus += s.pre[c][a] * s.suf[c + 2][k - 1 - a];
      if (ek_minus <= 0.0) continue;
      incl += std::exp(s.cnt[k] + k * s.m + std::log(s.x[c]) + std::log(ek_minus) -
                       s.log_z_conds);
    }
    if (incl != 0.0) model_->ascend(sql_->cond_feats[c], step * incl);
  }
}

void GrammarScorer::ascend_z_targets(const std::vector<std::pair<int, double>>& targets,
                                     double lr) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  double total = 0.0;
  for (const auto& [idx, w] : targets) {
    if (w == 0.0) continue;
    model_->ascend(z_feats_[idx], lr * w);
    total += w;
  }
  if (total == 0.0) return;
  ascend_expectation(-lr * total);
}

Solution GrammarScorer::argmax() const {
  if (!sql_) {
    if (cand_feats_.empty()) throw std::invalid_argument("empty grammar for " + inst_->id);
    std::vector<double> s = task_scores(*model_, cand_feats_);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > s[best]) best = i;
    return cands_[best];
  }
  auto tops = top_k(1);
  return tops.front().first;
}

std::vector<std::pair<Solution, double>> GrammarScorer::top_k(int k) const {
  std::vector<std::pair<Solution, double>> pool;
  if (!sql_) {
    std::vector<double> s = task_scores(*model_, cand_feats_);
    std::vector<std::size_t> idx(s.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    for (std::size_t i = 0; i < idx.size() && static_cast<int>(i) < k; ++i)
      pool.emplace_back(cands_[idx[i]], s[idx[i]]);
    return pool;
  }
  auto s = sql_->compute(*model_);
  const int n = static_cast<int>(sql_->conds.size());
  const int kmax = std::min(sql_->max_conds, n);
  // Highest-scoring subset of each size: stable sort by (score desc, canonical
  // order asc), then take prefixes; equal-score swaps keep canonical order.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return s.cond[a] > s.cond[b]; });
  std::vector<double> prefix(kmax + 1, 0.0);
  for (int j = 1; j <= kmax; ++j) prefix[j] = prefix[j - 1] + s.cond[order[j - 1]];
  for (int kc = 0; kc <= kmax; ++kc) {
    std::vector<SqlCond> conds;
    for (int j = 0; j < kc; ++j) conds.push_back(sql_->conds[order[j]]);
    std::sort(conds.begin(), conds.end());
    for (int sel = 0; sel < sql_->cols; ++sel) {
      for (int a = 0; a < 6; ++a) {
        SqlSol sol;
        sol.select_col = sel;
        sol.agg = static_cast<Agg>(a);
        sol.conds = conds;
        pool.emplace_back(Solution(std::move(sol)), s.cnt[kc] + prefix[kc] + s.sel[sel] + s.agg[a]);
      }
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<int>(pool.size()) > k) pool.resize(k);
  return pool;
}

Solution GrammarScorer::sample(DetRng& rng) const {
  if (!sql_) {
    std::vector<double> p = task_distribution(*model_, cand_feats_);
    double u = rng.next_unit();
    double cum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      cum += p[i];
      if (u < cum) return cands_[i];
    }
    return cands_.back();
  }
  auto s = sql_->compute(*model_);
  const int n = static_cast<int>(sql_->conds.size());
  const int kmax = std::min(sql_->max_conds, n);
  // Draw the condition count, then a uniform-by-weight subset of that size,
  // then the select column and aggregator.
  std::vector<double> pk;
  std::vector<int> ks;
  for (int k = 0; k <= kmax; ++k) {
    if (s.ek[k] <= 0.0) continue;
    pk.push_back(std::exp(s.cnt[k] + k * s.m + std::log(s.ek[k]) - s.log_z_conds));
    ks.push_back(k);
  }
  double u = rng.next_unit(), cum = 0.0;
  int kc = ks.back();
  for (std::size_t i = 0; i < pk.size(); ++i) {
    cum += pk[i];
    if (u < cum) {
      kc = ks[i];
      break;
    }
  }
  SqlSol sol;
  int remaining = kc;
  for (int c = 0; c < n && remaining > 0; ++c) {
    // P(include c | r of the conds c..n-1 still to pick).
    double denom = s.suf[c + 1][remaining];
    double num = s.x[c] * s.suf[c + 2][remaining - 1];
    double pr = denom > 0.0 ? num / denom : 0.0;
    if (rng.next_unit() < pr) {
      sol.conds.push_back(sql_->conds[c]);
      --remaining;
    }
  }
  std::vector<double> psel = softmax(s.sel);
  u = rng.next_unit();
  cum = 0.0;
  sol.select_col = sql_->cols - 1;
  for (int i = 0; i < sql_->cols; ++i) {
    cum += psel[i];
    if (u < cum) {
      sol.select_col = i;
      break;
    }
  }
  std::vector<double> pagg = softmax(s.agg);
  u = rng.next_unit();
  cum = 0.0;
  sol.agg = Agg::kCount;
  for (int a = 0; a < 6; ++a) {
    cum += pagg[a];
    if (u < cum) {
      sol.agg = static_cast<Agg>(a);
      break;
    }
  }
  return Solution(std::move(sol));
}

std::optional<Solution> predict_solution(TaskModel& m, const Instance& inst,
                                         const EnumConfig& cfg) {
  GrammarScorer g(m, inst, cfg, nullptr);
  try {
    return g.argmax();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace wsqa
