// Independent brute-force oracles used to pin expected values. These
// deliberately share no code with the production enumerators: plain nested
// loops, direct execution, set semantics via sorted vectors.
#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "wsqa/answer_match.hpp"
#include "wsqa/enumerate.hpp"
#include "wsqa/rng.hpp"

namespace wsqa::testutil {

inline std::vector<Solution> sorted_canonical(std::vector<Solution> zs) {
  for (auto& z : zs) z = canonicalize_solution(z);
  std::sort(zs.begin(), zs.end(), solution_less);
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  return zs;
}

inline bool same_solution_set(const std::vector<Solution>& a, const std::vector<Solution>& b) {
  return sorted_canonical(a) == sorted_canonical(b);
}

inline void subsets_of_size(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == k) {
      f(pick);
      return;
    }
    for (int i = start; i < n; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

// Everything in the bounded grammar that executes to the instance's answer,
// by direct evaluation of every candidate.
inline std::vector<Solution> oracle_solution_set(const Instance& inst, const EnumConfig& cfg) {
  std::vector<Solution> out;
  auto hit = [&](Solution z) {
    auto r = execute_solution(z, inst.reference, inst.question);
    if (r && answer_equal(*r, inst.answer)) out.push_back(std::move(z));
  };

  if (inst.family == Family::kSpan) {
    if (const auto* doc = as_document(inst.reference)) {
      const int n = static_cast<int>(doc->tokens.size());
      for (int s = 0; s < n; ++s)
        for (int e = s; e < n; ++e) hit(SpanSol{Span{SpanSource::kReference, s, e}});
    }
    return sorted_canonical(out);
  }

  if (inst.family == Family::kDiscrete) {
    const auto* doc = as_document(inst.reference);
    if (!doc) return {};
    if (std::holds_alternative<NumberValue>(inst.answer)) {
      std::vector<NumberRef> pool;
      for (int i = 0; i < static_cast<int>(doc->numbers.size()); ++i)
        pool.push_back(NumberRef::doc(i));
      std::vector<Decimal> consts = cfg.constants;
      std::sort(consts.begin(), consts.end());
      consts.erase(std::unique(consts.begin(), consts.end()), consts.end());
      for (Decimal c : consts) pool.push_back(NumberRef::constant(c));
      const int p = static_cast<int>(pool.size());
      for (int k = 1; k <= cfg.max_terms; ++k) {
        subsets_of_size(p, k, [&](const std::vector<int>& pick) {
          for (unsigned m = 0; m + 1 < (1u << k); ++m) {  // skip all-minus
            ArithSol sol;
            for (int j = 0; j < k; ++j)
              sol.terms.push_back(
                  ArithTerm{(m >> j) & 1 ? Sign::kMinus : Sign::kPlus, pool[pick[j]]});
            hit(Solution(std::move(sol)));
          }
        });
      }
      const int nm = static_cast<int>(doc->numbers.size());
      for (int k = 2; k <= cfg.kv_subset_max; ++k)
        subsets_of_size(nm, k, [&](const std::vector<int>& pick) {
          hit(SortSol{SortOp::kMax, pick});
          hit(SortSol{SortOp::kMin, pick});
        });
      std::vector<Span> cands = inst.mention_candidates;
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
      auto a_int = std::get<NumberValue>(inst.answer).value.as_int();
      if (a_int && *a_int >= 1 && *a_int <= static_cast<long long>(cands.size())) {
        const int n = static_cast<int>(cands.size());
        const int a = static_cast<int>(*a_int);
        long long total = binomial_capped(n, a, cfg.count_subset_budget);
        if (total <= cfg.count_subset_budget) {
          subsets_of_size(n, a, [&](const std::vector<int>& pick) {
            CountSol sol;
            for (int i : pick) sol.spans.push_back(cands[i]);
            hit(Solution(std::move(sol)));
          });
        } else {
          CountSol sol;
          for (int i = 0; i < a; ++i) sol.spans.push_back(cands[i]);
          hit(Solution(std::move(sol)));
        }
      }
      return sorted_canonical(out);
    }
    // Text / list answers.
    const int nd = static_cast<int>(doc->tokens.size());
    const int nq = static_cast<int>(inst.question.size());
    if (std::holds_alternative<TextValue>(inst.answer)) {
      for (int s = 0; s < nd; ++s)
        for (int e = s; e < nd; ++e) hit(SpanSol{Span{SpanSource::kReference, s, e}});
      for (int s = 0; s < nq; ++s)
        for (int e = s; e < nq; ++e) hit(SpanSol{Span{SpanSource::kQuestion, s, e}});
      std::vector<KvCandidate> kvs = inst.kv_candidates;
      std::sort(kvs.begin(), kvs.end());
      kvs.erase(std::unique(kvs.begin(), kvs.end()), kvs.end());
      for (int k = 2; k <= cfg.kv_subset_max; ++k)
        subsets_of_size(static_cast<int>(kvs.size()), k, [&](const std::vector<int>& pick) {
          for (KvOp op : {KvOp::kArgmax, KvOp::kArgmin}) {
            KvSortSol sol;
            sol.op = op;
            for (int i : pick) sol.pairs.push_back(KvPair{kvs[i].span, kvs[i].mention_index});
            hit(Solution(std::move(sol)));
          }
        });
      return sorted_canonical(out);
    }
    const auto& items = std::get<TextListValue>(inst.answer).items;
    std::vector<std::vector<Span>> matches(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& item = items[i];
      auto scan = [&](const TokenSeq& toks, SpanSource src) {
        for (int s = 0; s + static_cast<int>(item.size()) <= static_cast<int>(toks.size()); ++s) {
          bool ok = true;
          for (std::size_t j = 0; j < item.size(); ++j)
            if (toks[s + j] != item[j]) {
              ok = false;
              break;
            }
          if (ok)
            matches[i].push_back(
                Span{src, s, s + static_cast<int>(item.size()) - 1});
        }
      };
      scan(doc->tokens, SpanSource::kReference);
      scan(inst.question, SpanSource::kQuestion);
      if (matches[i].empty()) return {};
    }
    std::vector<std::size_t> pick(items.size(), 0);
    while (true) {
      SpansSol sol;
      for (std::size_t i = 0; i < items.size(); ++i) sol.spans.push_back(matches[i][pick[i]]);
      hit(Solution(std::move(sol)));
      std::size_t i = items.size();
      bool carry = true;
      while (i > 0 && carry) {
        --i;
        carry = ++pick[i] == matches[i].size();
        if (carry) pick[i] = 0;
      }
      if (carry) break;
    }
    return sorted_canonical(out);
  }

  // sql: every (select, agg, condition subset) candidate, evaluated row by row.
  const auto* table = as_table(inst.reference);
  if (!table) return {};
  const int cols = static_cast<int>(table->header.size());
  std::vector<SqlCond> all_conds;
  for (int c = 0; c < cols; ++c)
    for (Cmp cmp : {Cmp::kEq, Cmp::kLt, Cmp::kGt})
      for (int s = 0; s < static_cast<int>(inst.question.size()); ++s)
        for (int e = s;
             e < std::min<int>(inst.question.size(), s + cfg.max_cond_span_len); ++e)
          all_conds.push_back(SqlCond{c, cmp, Span{SpanSource::kQuestion, s, e}});
  const int nc = static_cast<int>(all_conds.size());
  for (int k = 0; k <= cfg.max_conds; ++k) {
    subsets_of_size(nc, k, [&](const std::vector<int>& pick) {
      for (int sel = 0; sel < cols; ++sel) {
        for (Agg agg : {Agg::kNone, Agg::kSum, Agg::kMean, Agg::kMax, Agg::kMin, Agg::kCount}) {
          SqlSol sol;
          sol.select_col = sel;
          sol.agg = agg;
          for (int i : pick) sol.conds.push_back(all_conds[i]);
          hit(Solution(std::move(sol)));
        }
      }
    });
  }
  return sorted_canonical(out);
}

// --------------------------------------------------------------------------
// Random small instances for oracle-equivalence and gradient checks.
// --------------------------------------------------------------------------

inline Instance random_span_instance(DetRng& rng, const std::string& id) {
  static const TokenSeq kWords = {"ash", "bur", "cor", "dag", "elm", "fen"};
  Instance inst;
  inst.id = id;
  inst.family = Family::kSpan;
  DocumentRef doc;
  int n = static_cast<int>(rng.next_in(6, 16));
  for (int i = 0; i < n; ++i) doc.tokens.push_back(kWords[rng.next_below(kWords.size())]);
  TokenSeq ans;
  int alen = static_cast<int>(rng.next_in(1, 2));
  if (rng.next_unit() < 0.8) {
    int s = static_cast<int>(rng.next_below(n - alen + 1));
    for (int i = 0; i < alen; ++i) ans.push_back(doc.tokens[s + i]);
  } else {
    ans.push_back("zzz");  // unreachable answer: empty Z
  }
  inst.reference = RefInfo(std::move(doc));
  inst.question = {"which", kWords[rng.next_below(kWords.size())], "here"};
  inst.answer = Answer(TextValue{ans});
  return inst;
}

inline Instance random_discrete_instance(DetRng& rng, const std::string& id) {
  static const TokenSeq kWords = {"oak", "pine", "sage", "rye", "ivy"};
  Instance inst;
  inst.id = id;
  inst.family = Family::kDiscrete;
  DocumentRef doc;
  const int n_numbers = static_cast<int>(rng.next_in(2, 12));
  std::vector<long long> values;
  for (int i = 0; i < n_numbers; ++i) {
    doc.tokens.push_back(kWords[rng.next_below(kWords.size())]);
    values.push_back(rng.next_in(1, 9));
    doc.numbers.push_back(
        NumberMention{static_cast<int>(doc.tokens.size()), Decimal::from_int(values.back())});
    doc.tokens.push_back(std::to_string(values.back()));
  }
  doc.tokens.push_back(kWords[rng.next_below(kWords.size())]);
  // A few one-token mention/kv candidates over the word positions.
  std::vector<Span> mentions;
  for (int i = 0; i < static_cast<int>(doc.tokens.size()); i += 3)
    mentions.push_back(Span{SpanSource::kReference, i, i});
  if (mentions.size() > 6) mentions.resize(6);
  inst.mention_candidates = mentions;
  for (int i = 0; i < std::min(3, n_numbers); ++i)
    inst.kv_candidates.push_back(KvCandidate{mentions[i % mentions.size()], i});
  inst.question = {"how", "many", kWords[rng.next_below(kWords.size())]};
  Instance out = inst;
  out.reference = RefInfo(doc);

  double u = rng.next_unit();
  if (u < 0.55) {
    long long target;
    if (rng.next_unit() < 0.7) {
      long long i = rng.next_below(values.size()), j = rng.next_below(values.size());
      target = rng.next_unit() < 0.5 ? values[i] + values[j] : values[i] - values[j];
    } else {
      target = rng.next_in(0, 12);
    }
    out.answer = Answer(NumberValue{Decimal::from_int(target)});
  } else if (u < 0.8) {
    out.answer = Answer(NumberValue{Decimal::from_int(rng.next_in(1, 4))});
  } else if (u < 0.92) {
    out.answer = Answer(TextValue{{doc.tokens[rng.next_below(doc.tokens.size())]}});
  } else {
    TextListValue items;
    items.items.push_back({doc.tokens[rng.next_below(doc.tokens.size())]});
    items.items.push_back({doc.tokens[rng.next_below(doc.tokens.size())]});
    out.answer = Answer(std::move(items));
  }
  return out;
}

inline Instance random_sql_instance(DetRng& rng, const std::string& id) {
  static const TokenSeq kNames = {"kedo", "mur", "tiv"};
  static const TokenSeq kEnts = {"ann", "bob", "cid", "dot", "eli", "fay"};
  Instance inst;
  inst.id = id;
  inst.family = Family::kSql;
  TableRef table;
  const int cols = static_cast<int>(rng.next_in(2, 3));
  const int rows = static_cast<int>(rng.next_in(2, 6));
  for (int c = 0; c < cols; ++c) table.header.push_back({kNames[c]});
  for (int r = 0; r < rows; ++r) {
    std::vector<Cell> row;
    row.push_back(Cell{kEnts[rng.next_below(kEnts.size())]});
    for (int c = 1; c < cols; ++c) row.push_back(Cell{Decimal::from_int(rng.next_in(1, 6))});
    table.rows.push_back(std::move(row));
  }
  inst.question = {"what", kNames[rng.next_below(cols)], "for",
                   kEnts[rng.next_below(kEnts.size())], std::to_string(rng.next_in(1, 6))};
  double u = rng.next_unit();
  if (u < 0.4 && cols >= 2) {
    int r = static_cast<int>(rng.next_below(rows));
    inst.answer = Answer(NumberValue{*table.rows[r][1].number()});
  } else if (u < 0.6) {
    inst.answer = Answer(NumberValue{Decimal::from_int(rng.next_in(0, rows))});
  } else if (u < 0.8) {
    inst.answer = Answer(TextValue{{*table.rows[rng.next_below(rows)][0].text()}});
  } else {
    inst.answer = Answer(NumberValue{Decimal::from_int(rng.next_in(1, 12))});
  }
  inst.reference = RefInfo(std::move(table));
  return inst;
}

}  // namespace wsqa::testutil
