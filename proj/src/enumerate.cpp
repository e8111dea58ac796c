#include "wsqa/enumerate.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "wsqa/answer_match.hpp"

namespace wsqa {

long long binomial_capped(long long n, long long k, long long cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap + 1;
  }
  return r;
}

namespace {

struct SolutionOrder {
  bool operator()(const Solution& a, const Solution& b) const { return solution_less(a, b); }
};

// Iterates k-combinations of {0..n-1} in lexicographic order.
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

std::vector<Span> find_matches(const TokenSeq& hay, SpanSource src, const TokenSeq& needle) {
  std::vector<Span> out;
  if (needle.empty() || hay.size() < needle.size()) return out;
  for (int s = 0; s + static_cast<int>(needle.size()) <= static_cast<int>(hay.size()); ++s) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j)
      if (hay[s + j] != needle[j]) {
        ok = false;
        break;
      }
    if (ok) out.push_back(Span{src, s, s + static_cast<int>(needle.size()) - 1});
  }
  return out;
}

}  // namespace

SolutionSet enumerate_spans(const Instance& inst) {
  SolutionSet out;
  out.instance_id = inst.id;
  const auto* doc = as_document(inst.reference);
  const auto* text = std::get_if<TextValue>(&inst.answer);
  if (!doc || !text) return out;
  for (const Span& s : find_matches(doc->tokens, SpanSource::kReference, text->tokens))
    out.solutions.push_back(SpanSol{s});
  return out;
}

SolutionSet enumerate_numeric(const Instance& inst, const EnumConfig& cfg) {
  SolutionSet out;
  out.instance_id = inst.id;
  const auto* doc = as_document(inst.reference);
  const auto* num = std::get_if<NumberValue>(&inst.answer);
  if (!doc || !num) return out;
  const Decimal target = num->value;

  // Operand pool: document occurrences first, then constants.
  std::vector<NumberRef> pool;
  for (int i = 0; i < static_cast<int>(doc->numbers.size()); ++i) pool.push_back(NumberRef::doc(i));
  std::vector<Decimal> consts = cfg.constants;
  std::sort(consts.begin(), consts.end());
  consts.erase(std::unique(consts.begin(), consts.end()), consts.end());
  for (Decimal c : consts) pool.push_back(NumberRef::constant(c));

  auto value_of = [&](const NumberRef& r) {
    return r.kind == NumberRef::Kind::kConstant ? r.value : doc->numbers[r.mention_index].value;
  };

  for (int k = 1; k <= cfg.max_terms; ++k) {
    for (Combinations c(static_cast<int>(pool.size()), k); !c.done; c.next()) {
      for (unsigned mask = 0; mask < (1u << k); ++mask) {
        if (mask == (1u << k) - 1) continue;  // at least one plus term
        Decimal sum;
        for (int j = 0; j < k; ++j) {
          Decimal v = value_of(pool[c.idx[j]]);
          sum = (mask >> j) & 1 ? sum - v : sum + v;
        }
        if (sum == target) {
          ArithSol sol;
          for (int j = 0; j < k; ++j)
            sol.terms.push_back(
                ArithTerm{(mask >> j) & 1 ? Sign::kMinus : Sign::kPlus, pool[c.idx[j]]});
          out.solutions.push_back(canonicalize_solution(Solution(std::move(sol))));
        }
      }
    }
  }

  const int n_mentions = static_cast<int>(doc->numbers.size());
  for (int k = 2; k <= cfg.kv_subset_max; ++k) {
    for (Combinations c(n_mentions, k); !c.done; c.next()) {
      for (SortOp op : {SortOp::kMax, SortOp::kMin}) {
        std::optional<Decimal> best;
        for (int j = 0; j < k; ++j) {
          Decimal v = doc->numbers[c.idx[j]].value;
          if (!best || (op == SortOp::kMax ? v > *best : v < *best)) best = v;
        }
        if (*best == target)
          out.solutions.push_back(Solution(SortSol{op, std::vector<int>(c.idx.begin(), c.idx.end())}));
      }
    }
  }

  // Counting: all size-a subsets of the provided mention candidates, unless
  // the combination count exceeds the budget; then only the lexicographically
  // first subset, with the set marked truncated.
  auto a_int = target.as_int();
  if (a_int && *a_int >= 1 && !inst.mention_candidates.empty()) {
    std::vector<Span> cands = inst.mention_candidates;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    const int n = static_cast<int>(cands.size());
    const int a = static_cast<int>(*a_int);
    if (a <= n) {
      long long total = binomial_capped(n, a, cfg.count_subset_budget);
      if (total <= cfg.count_subset_budget) {
        for (Combinations c(n, a); !c.done; c.next()) {
          CountSol sol;
          for (int j = 0; j < a; ++j) sol.spans.push_back(cands[c.idx[j]]);
          out.solutions.push_back(Solution(std::move(sol)));
        }
      } else {
        CountSol sol;
        for (int j = 0; j < a; ++j) sol.spans.push_back(cands[j]);
        out.solutions.push_back(Solution(std::move(sol)));
        out.truncated = true;
      }
    }
  }
  return out;
}

SolutionSet enumerate_span_like(const Instance& inst, const EnumConfig& cfg) {
  SolutionSet out;
  out.instance_id = inst.id;
  const auto* doc = as_document(inst.reference);
  if (!doc) return out;

  if (const auto* text = std::get_if<TextValue>(&inst.answer)) {
    for (const Span& s : find_matches(doc->tokens, SpanSource::kReference, text->tokens))
      out.solutions.push_back(SpanSol{s});
    for (const Span& s : find_matches(inst.question, SpanSource::kQuestion, text->tokens))
      out.solutions.push_back(SpanSol{s});

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
          Solution z(std::move(sol));
          auto r = execute_solution(z, inst.reference, inst.question);
          if (r && answer_equal(*r, inst.answer)) out.solutions.push_back(std::move(z));
        }
      }
    }
    return out;
  }

  const auto* list = std::get_if<TextListValue>(&inst.answer);
  if (!list || list->items.empty()) return out;
  std::vector<std::vector<Span>> per_item;
  for (const auto& item : list->items) {
    std::vector<Span> matches = find_matches(doc->tokens, SpanSource::kReference, item);
    for (const Span& s : find_matches(inst.question, SpanSource::kQuestion, item))
      matches.push_back(s);
    if (matches.empty()) return out;  // some item has no mention: empty Z
    per_item.push_back(std::move(matches));
  }
  // Odometer over per-item matches; capped cross product.
  std::set<Solution, SolutionOrder> seen;
  std::vector<std::size_t> pick(per_item.size(), 0);
  long long produced = 0;
  while (true) {
    if (produced >= cfg.z_cap) {
      out.truncated = true;
      break;
    }
    SpansSol sol;
    for (std::size_t i = 0; i < per_item.size(); ++i) sol.spans.push_back(per_item[i][pick[i]]);
    Solution z = canonicalize_solution(Solution(std::move(sol)));
    if (seen.insert(z).second) out.solutions.push_back(std::move(z));
    ++produced;
    std::size_t i = per_item.size();
    while (i > 0) {
      --i;
      if (++pick[i] < per_item[i].size()) break;
      pick[i] = 0;
      if (i == 0) return out;
    }
  }
  return out;
}

namespace {

using RowMask = std::vector<std::uint64_t>;

RowMask mask_and(const RowMask& a, const RowMask& b) {
  RowMask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
  return out;
}

std::string join_tokens_local(const TokenSeq& q, const Span& s) {
  std::string out;
  for (int i = s.start; i <= s.end; ++i) {
    if (i > s.start) out.push_back(' ');
    out += q[i];
  }
  return out;
}

// Mirrors the executor's aggregation semantics over a precomputed row mask.
// build_solution_set re-verifies every emitted member with execute_solution.
std::optional<AnswerValue> exec_masked(const TableRef& table, const RowMask& mask, int sel,
                                       Agg agg) {
  std::vector<const Cell*> projected;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (mask[r >> 6] & (1ULL << (r & 63))) projected.push_back(&table.rows[r][sel]);
  if (agg == Agg::kCount)
    return AnswerValue(NumberValue{Decimal::from_int(static_cast<std::int64_t>(projected.size()))});
  if (agg == Agg::kNone) {
    if (projected.size() != 1) return std::nullopt;
    const Cell& c = *projected[0];
    if (c.is_number()) return AnswerValue(NumberValue{*c.number()});
    TokenSeq toks;
    std::string cur;
    for (char ch : *c.text()) {
      if (ch == ' ' || ch == '\t') {
        if (!cur.empty()) toks.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) toks.push_back(cur);
    if (toks.empty()) return std::nullopt;
    return AnswerValue(TextValue{std::move(toks)});
  }
  if (projected.empty()) return std::nullopt;
  std::vector<Decimal> vals;
  for (const Cell* c : projected) {
    auto v = c->as_number();
    if (!v) return std::nullopt;
    vals.push_back(*v);
  }
  switch (agg) {
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

constexpr Agg kAllAggs[] = {Agg::kNone, Agg::kSum, Agg::kMean, Agg::kMax, Agg::kMin, Agg::kCount};

}  // namespace

SolutionSet enumerate_sql(const Instance& inst, const EnumConfig& cfg) {
  SolutionSet out;
  out.instance_id = inst.id;
  const auto* table = as_table(inst.reference);
  if (!table) return out;
  const int cols = static_cast<int>(table->header.size());
  const std::size_t n_rows = table->rows.size();
  const std::size_t words = (n_rows + 63) / 64 == 0 ? 1 : (n_rows + 63) / 64;

  // All candidate conditions in canonical order, each with its row mask.
  // Conditions whose comparison is undefined on some row can never appear in
  // an executing query and are dropped here.
  struct CondInfo {
    SqlCond cond;
    RowMask mask;
  };
  std::vector<CondInfo> conds;
  for (int col = 0; col < cols; ++col) {
    for (Cmp cmp : {Cmp::kEq, Cmp::kLt, Cmp::kGt}) {
      for (int s = 0; s < static_cast<int>(inst.question.size()); ++s) {
        int max_e = std::min(static_cast<int>(inst.question.size()) - 1,
                             s + cfg.max_cond_span_len - 1);
        for (int e = s; e <= max_e; ++e) {
          SqlCond c{col, cmp, Span{SpanSource::kQuestion, s, e}};
          std::string text = join_tokens_local(inst.question, c.value);
          std::optional<Decimal> tv = Decimal::parse(text);
          RowMask mask(words, 0);
          bool error = false;
          for (std::size_t r = 0; r < n_rows; ++r) {
            const Cell& cell = table->rows[r][col];
            std::optional<Decimal> cv = cell.as_number();
            bool match = false;
            if (cv && tv) {
              match = cmp == Cmp::kEq ? *cv == *tv : (cmp == Cmp::kLt ? *cv < *tv : *cv > *tv);
            } else if (cmp == Cmp::kEq) {
              match = cell.display() == text;
            } else {
              error = true;
              break;
            }
            if (match) mask[r >> 6] |= 1ULL << (r & 63);
          }
          if (!error) conds.push_back(CondInfo{c, std::move(mask)});
        }
      }
    }
  }
  std::sort(conds.begin(), conds.end(),
            [](const CondInfo& a, const CondInfo& b) { return a.cond < b.cond; });

  // Group conditions by row mask; a query's result depends only on the
  // intersected mask, the selected column, and the aggregator.
  std::vector<RowMask> group_mask;
  std::vector<std::vector<int>> group_conds;
  {
    std::map<RowMask, int> ids;
    for (int i = 0; i < static_cast<int>(conds.size()); ++i) {
      auto [it, fresh] = ids.try_emplace(conds[i].mask, static_cast<int>(group_mask.size()));
      if (fresh) {
        group_mask.push_back(conds[i].mask);
        group_conds.push_back({});
      }
      group_conds[it->second].push_back(i);
    }
  }
  const int n_groups = static_cast<int>(group_mask.size());

  std::map<std::pair<RowMask, std::pair<int, int>>, bool> eq_memo;
  auto matches_answer = [&](const RowMask& mask, int sel, Agg agg) {
    auto key = std::make_pair(mask, std::make_pair(sel, static_cast<int>(agg)));
    auto it = eq_memo.find(key);
    if (it != eq_memo.end()) return it->second;
    auto r = exec_masked(*table, mask, sel, agg);
    bool ok = r && answer_equal(*r, inst.answer);
    eq_memo.emplace(std::move(key), ok);
    return ok;
  };

  // Group multisets with total multiplicity k, in deterministic order.
  auto group_multisets = [&](int k) {
    std::vector<std::vector<std::pair<int, int>>> out_ms;  // (group, count)
    auto size_ok = [&](int g, int c) { return c <= static_cast<int>(group_conds[g].size()); };
    if (k == 0) {
      out_ms.push_back({});
    } else if (k == 1) {
      for (int g = 0; g < n_groups; ++g)
        if (size_ok(g, 1)) out_ms.push_back({{g, 1}});
    } else if (k == 2) {
      for (int g = 0; g < n_groups; ++g) {
        if (size_ok(g, 2)) out_ms.push_back({{g, 2}});
        for (int h = g + 1; h < n_groups; ++h)
          if (size_ok(g, 1) && size_ok(h, 1)) out_ms.push_back({{g, 1}, {h, 1}});
      }
    } else {
      for (int g = 0; g < n_groups; ++g) {
        if (size_ok(g, 3)) out_ms.push_back({{g, 3}});
        for (int h = g + 1; h < n_groups; ++h) {
          if (size_ok(g, 2) && size_ok(h, 1)) out_ms.push_back({{g, 2}, {h, 1}});
          if (size_ok(g, 1) && size_ok(h, 2)) out_ms.push_back({{g, 1}, {h, 2}});
          for (int l = h + 1; l < n_groups; ++l)
            if (size_ok(g, 1) && size_ok(h, 1) && size_ok(l, 1))
              out_ms.push_back({{g, 1}, {h, 1}, {l, 1}});
        }
      }
    }
    return out_ms;
  };

  const RowMask all_rows = [&] {
    RowMask m(words, 0);
    for (std::size_t r = 0; r < n_rows; ++r) m[r >> 6] |= 1ULL << (r & 63);
    return m;
  }();

  long long total_matches = 0;
  long long cap = cfg.z_cap;
  for (int k = 0; k <= cfg.max_conds; ++k) {
    auto multisets = group_multisets(k);
    std::vector<RowMask> ms_mask;
    ms_mask.reserve(multisets.size());
    std::vector<long long> ms_combos;
    for (const auto& ms : multisets) {
      RowMask m = all_rows;
      long long combos = 1;
      for (auto [g, c] : ms) {
        m = mask_and(m, group_mask[g]);
        combos *= binomial_capped(static_cast<long long>(group_conds[g].size()), c, 1LL << 40);
      }
      ms_mask.push_back(std::move(m));
      ms_combos.push_back(combos);
    }
    for (int sel = 0; sel < cols; ++sel) {
      for (Agg agg : kAllAggs) {
        // Count first, then materialize only as much as the cap requires.
        std::vector<int> hits;
        long long block_count = 0;
        for (int m = 0; m < static_cast<int>(multisets.size()); ++m) {
          if (matches_answer(ms_mask[m], sel, agg)) {
            hits.push_back(m);
            block_count += ms_combos[m];
          }
        }
        if (hits.empty()) continue;
        total_matches += block_count;
        long long remaining = cap - static_cast<long long>(out.solutions.size());
        if (remaining <= 0) continue;

        std::vector<std::vector<int>> cond_lists;  // candidate cond-index sets
        for (int m : hits) {
          const auto& ms = multisets[m];
          // Odometer over per-group combinations.
          std::vector<Combinations> iters;
          for (auto [g, c] : ms) iters.emplace_back(static_cast<int>(group_conds[g].size()), c);
          bool alive = true;
          while (alive) {
            std::vector<int> ids;
            for (std::size_t gi = 0; gi < ms.size(); ++gi)
              for (int pos : iters[gi].idx) ids.push_back(group_conds[ms[gi].first][pos]);
            std::sort(ids.begin(), ids.end());
            cond_lists.push_back(std::move(ids));
            // advance odometer
            std::size_t gi = ms.size();
            alive = false;
            while (gi > 0) {
              --gi;
              if (iters[gi].next()) {
                alive = true;
                break;
              }
              iters[gi] = Combinations(static_cast<int>(group_conds[ms[gi].first].size()),
                                       ms[gi].second);
            }
            if (ms.empty()) break;
          }
        }
        std::sort(cond_lists.begin(), cond_lists.end(),
                  [&](const std::vector<int>& a, const std::vector<int>& b) {
                    for (std::size_t i = 0; i < a.size(); ++i) {
                      if (conds[a[i]].cond < conds[b[i]].cond) return true;
                      if (conds[b[i]].cond < conds[a[i]].cond) return false;
                    }
                    return false;
                  });
        for (const auto& ids : cond_lists) {
          if (remaining-- <= 0) break;
          SqlSol sol;
          sol.select_col = sel;
          sol.agg = agg;
          for (int ci : ids) sol.conds.push_back(conds[ci].cond);
          out.solutions.push_back(Solution(std::move(sol)));
        }
      }
    }
  }
  out.truncated = total_matches > cap;

  // Output order: condition count ascending, then canonical solution order.
  std::stable_sort(out.solutions.begin(), out.solutions.end(),
                   [](const Solution& a, const Solution& b) {
                     std::size_t ka = std::get<SqlSol>(a).conds.size();
                     std::size_t kb = std::get<SqlSol>(b).conds.size();
                     if (ka != kb) return ka < kb;
                     return solution_less(a, b);
                   });
  if (static_cast<long long>(out.solutions.size()) > cap) out.solutions.resize(cap);
  return out;
}

SolutionSet build_solution_set(const Instance& inst, const EnumConfig& cfg) {
  SolutionSet raw;
  raw.instance_id = inst.id;
  switch (inst.family) {
    case Family::kSpan:
      if (std::holds_alternative<TextValue>(inst.answer)) raw = enumerate_spans(inst);
      break;
    case Family::kDiscrete:
      if (std::holds_alternative<NumberValue>(inst.answer))
        raw = enumerate_numeric(inst, cfg);
      else
        raw = enumerate_span_like(inst, cfg);
      break;
    case Family::kSql: raw = enumerate_sql(inst, cfg); break;
  }

  SolutionSet out;
  out.instance_id = inst.id;
  out.truncated = raw.truncated;
  std::set<Solution, SolutionOrder> seen;
  for (auto& z : raw.solutions) {
    Solution canon = canonicalize_solution(z);
    if (!seen.insert(canon).second) continue;
    if (static_cast<int>(out.solutions.size()) >= cfg.z_cap) {
      out.truncated = true;
      break;
    }
    auto r = execute_solution(canon, inst.reference, inst.question);
    if (!r || !answer_equal(*r, inst.answer))
      throw std::logic_error("enumerated solution does not execute to the answer: " +
                             render_solution(canon) + " on " + inst.id);
    out.solutions.push_back(std::move(canon));
  }
  return out;
}

void save_sidecar(const std::vector<SolutionSet>& sets, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& s : sets) {
    ojson j;
    j["instance_id"] = s.instance_id;
    ojson arr = ojson::array();
    for (const auto& z : s.solutions) arr.push_back(solution_to_json(z));
    j["solutions"] = std::move(arr);
    j["truncated"] = s.truncated;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failure: " + path);
}

SolutionSidecar load_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sidecar file: " + path);
  SolutionSidecar out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      ojson j = ojson::parse(line);
      SolutionSet s;
      s.instance_id = jstr(j, "instance_id");
      for (const auto& jz : jreq(j, "solutions")) s.solutions.push_back(solution_from_json(jz));
      s.truncated = jreq(j, "truncated").get<bool>();
      std::string id = s.instance_id;
      if (!out.emplace(id, std::move(s)).second)
        throw SchemaError("duplicate instance_id \"" + id + "\"");
    } catch (const std::exception& e) {
      throw DataError("sidecar line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SolutionSet> enumerate_dataset(const Dataset& d, const EnumConfig& cfg) {
  std::vector<SolutionSet> out;
  out.reserve(d.instances.size());
  for (const auto& inst : d.instances) out.push_back(build_solution_set(inst, cfg));
  return out;
}

}  // namespace wsqa
