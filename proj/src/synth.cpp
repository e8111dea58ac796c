#include "wsqa/synth.hpp"

#include <algorithm>
#include <cmath>

#include "wsqa/answer_match.hpp"
#include "wsqa/models.hpp"

namespace wsqa {

std::vector<std::string> synth_words(int n) {
  static const char* kConsonants[] = {"b", "d", "f", "g", "k", "l", "m",
                                      "n", "p", "r", "s", "t", "v", "z"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::vector<std::string> syllables;
  for (const char* c : kConsonants)
    for (const char* v : kVowels) syllables.push_back(std::string(c) + v);
  std::vector<std::string> out;
  for (std::size_t a = 0; a < syllables.size() && static_cast<int>(out.size()) < n; ++a)
    for (std::size_t b = 0; b < syllables.size() && static_cast<int>(out.size()) < n; ++b)
      out.push_back(syllables[a] + syllables[(a + b * 7 + 3) % syllables.size()]);
  return out;
}

namespace {

struct Pools {
  std::vector<std::string> entities;
  std::vector<std::string> clues;
  std::vector<std::string> fillers;
  std::vector<std::string> colnames;
};

Pools build_pools(int vocab_size) {
  int n = std::max(vocab_size, 24);
  std::vector<std::string> words = synth_words(n);
  Pools p;
  int e = n * 2 / 5, c = n * 3 / 10, f = n * 3 / 10 - 6;
  p.entities.assign(words.begin(), words.begin() + e);
  p.clues.assign(words.begin() + e, words.begin() + e + c);
  p.fillers.assign(words.begin() + e + c, words.begin() + e + c + std::max(f, 4));
  p.colnames.assign(words.end() - 6, words.end());
  return p;
}

const std::string& pick(const std::vector<std::string>& pool, DetRng& rng) {
  return pool[rng.next_below(pool.size())];
}

std::vector<std::string> pick_distinct(const std::vector<std::string>& pool, int k, DetRng& rng) {
  std::vector<std::size_t> idx;
  while (static_cast<int>(idx.size()) < k) {
    std::size_t i = rng.next_below(pool.size());
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  std::vector<std::string> out;
  for (std::size_t i : idx) out.push_back(pool[i]);
  return out;
}

// --------------------------------------------------------------------------
// Span family: several same-surface mentions of the answer; only the gold
// mention sits between the two clue words that also appear in the question.
// --------------------------------------------------------------------------

Instance gen_span_instance(const GenConfig& cfg, const Pools& pools, DetRng& rng,
                           const std::string& id) {
  Instance inst;
  inst.id = id;
  inst.family = Family::kSpan;

  const int ans_len = rng.next_unit() < 0.4 ? 2 : 1;
  std::vector<std::string> ans = pick_distinct(pools.entities, ans_len, rng);
  int k;
  if (rng.next_unit() < 0.28)
    k = static_cast<int>(rng.next_in(16, std::max(17, cfg.distractor_mentions)));
  else
    k = static_cast<int>(rng.next_in(1, 4));
  auto clue = pick_distinct(pools.clues, 2, rng);
  const int gold_site = static_cast<int>(rng.next_below(k + 1));

  DocumentRef doc;
  Span gold_span{SpanSource::kReference, 0, 0};
  for (int site = 0; site <= k; ++site) {
    int lead = static_cast<int>(rng.next_in(1, 2));
    for (int i = 0; i < lead; ++i) doc.tokens.push_back(pick(pools.fillers, rng));
    std::string left = site == gold_site ? clue[0] : pick(pools.fillers, rng);
    std::string right = site == gold_site ? clue[1] : pick(pools.fillers, rng);
    doc.tokens.push_back(left);
    if (site == gold_site) gold_span.start = static_cast<int>(doc.tokens.size());
    for (const auto& t : ans) doc.tokens.push_back(t);
    if (site == gold_site) gold_span.end = static_cast<int>(doc.tokens.size()) - 1;
    doc.tokens.push_back(right);
  }
  doc.tokens.push_back(pick(pools.fillers, rng));
  inst.reference = RefInfo(std::move(doc));

  static const std::vector<std::vector<std::string>> kTemplates = {
      {"which", "thing", "near", "%1", "and", "%2"},
      {"what", "stands", "by", "%1", "before", "%2"},
      {"find", "the", "item", "with", "%1", "then", "%2"},
      {"who", "sits", "between", "%1", "and", "%2"},
  };
  const auto& tpl = kTemplates[rng.next_below(kTemplates.size())];
  for (const auto& t : tpl) {
    if (t == "%1")
      inst.question.push_back(clue[0]);
    else if (t == "%2")
      inst.question.push_back(clue[1]);
    else
      inst.question.push_back(t);
  }
  inst.answer = Answer(TextValue{ans});
  inst.gold_solution = Solution(SpanSol{gold_span});
  return inst;
}

// --------------------------------------------------------------------------
// Discrete family.
// --------------------------------------------------------------------------

struct DocBuilder {
  DocumentRef doc;
  std::vector<Span> entity_spans;  // one-token entity mentions, by word
  std::vector<std::string> entity_words;

  void fillers(const Pools& p, DetRng& rng, int lo, int hi) {
    int n = static_cast<int>(rng.next_in(lo, hi));
    for (int i = 0; i < n; ++i) doc.tokens.push_back(pick(p.fillers, rng));
  }

  int add_number(const std::string& tag, long long value) {
    doc.tokens.push_back(tag);
    int idx = static_cast<int>(doc.tokens.size());
    doc.tokens.push_back(std::to_string(value));
    doc.numbers.push_back(NumberMention{idx, Decimal::from_int(value)});
    return static_cast<int>(doc.numbers.size()) - 1;
  }

  Span add_entity(const std::string& word) {
    doc.tokens.push_back(word);
    Span s{SpanSource::kReference, static_cast<int>(doc.tokens.size()) - 1,
           static_cast<int>(doc.tokens.size()) - 1};
    entity_spans.push_back(s);
    entity_words.push_back(word);
    return s;
  }
};

TokenSeq fill_template(const std::vector<std::string>& tpl,
                       const std::vector<std::string>& slots) {
  TokenSeq out;
  for (const auto& t : tpl) {
    if (t.size() == 2 && t[0] == '%')
      out.push_back(slots[t[1] - '1']);
    else
      out.push_back(t);
  }
  return out;
}

Instance gen_discrete_instance(const GenConfig& cfg, const Pools& pools, DetRng& rng,
                               const std::string& id) {
  Instance inst;
  inst.id = id;
  inst.family = Family::kDiscrete;
  DocBuilder b;

  double u = rng.next_unit();
  const char* kind = u < 0.60 ? "arith" : (u < 0.75 ? "sort" : (u < 0.90 ? "count" : "kv"));

  if (kind == std::string("arith") || kind == std::string("sort")) {
    const int n = std::max(2, cfg.n_doc_numbers);
    std::vector<std::string> tags = pick_distinct(pools.entities, n, rng);
    std::vector<long long> values;
    std::vector<int> mention_of;
    b.fillers(pools, rng, 1, 2);
    for (int i = 0; i < n; ++i) {
      values.push_back(rng.next_in(cfg.value_min, cfg.value_max));
      mention_of.push_back(b.add_number(tags[i], values.back()));
      b.fillers(pools, rng, 1, 3);
    }
    int i = static_cast<int>(rng.next_below(n));
    int j = static_cast<int>(rng.next_below(n - 1));
    if (j >= i) ++j;

    if (kind == std::string("arith")) {
      bool minus = rng.next_unit() < 0.5;
      if (minus && values[i] < values[j]) std::swap(i, j);
      long long a = minus ? values[i] - values[j] : values[i] + values[j];
      if (rng.next_unit() < cfg.collision_boost) {
        // Coincidental derivations: a direct mention of the answer value or a
        // second pair with the same sum.
        auto extra_tags = pick_distinct(pools.entities, 2, rng);
        if (rng.next_unit() < 0.5 || a < 2) {
          b.add_number(extra_tags[0], a);
        } else {
          long long c1 = rng.next_in(1, a - 1);
          b.add_number(extra_tags[0], c1);
          b.fillers(pools, rng, 1, 2);
          b.add_number(extra_tags[1], a - c1);
        }
        b.fillers(pools, rng, 1, 2);
      }
      static const std::vector<std::vector<std::string>> kPlus = {
          {"how", "many", "%1", "and", "%2", "together"},
          {"what", "is", "the", "sum", "of", "%1", "and", "%2"},
      };
      static const std::vector<std::vector<std::string>> kMinus = {
          {"how", "many", "more", "%1", "than", "%2"},
          {"what", "is", "%1", "less", "%2"},
      };
      const auto& tset = minus ? kMinus : kPlus;
      inst.question = fill_template(tset[rng.next_below(tset.size())], {tags[i], tags[j]});
      inst.answer = Answer(NumberValue{Decimal::from_int(a)});
      ArithSol gold;
      gold.terms.push_back(ArithTerm{Sign::kPlus, NumberRef::doc(mention_of[i])});
      gold.terms.push_back(
          ArithTerm{minus ? Sign::kMinus : Sign::kPlus, NumberRef::doc(mention_of[j])});
      inst.gold_solution = canonicalize_solution(Solution(std::move(gold)));
    } else {
      if (values[i] == values[j]) {
        // distinct values keep the extremum unique
        values[j] += 1;
        b.doc.tokens[b.doc.numbers[mention_of[j]].token_index] = std::to_string(values[j]);
        b.doc.numbers[mention_of[j]].value = Decimal::from_int(values[j]);
      }
      bool use_max = rng.next_unit() < 0.5;
      long long a = use_max ? std::max(values[i], values[j]) : std::min(values[i], values[j]);
      if (rng.next_unit() < cfg.collision_boost) {
        auto extra = pick_distinct(pools.entities, 1, rng);
        b.add_number(extra[0], a);
        b.fillers(pools, rng, 1, 2);
      }
      static const std::vector<std::vector<std::string>> kMax = {
          {"what", "is", "the", "most", "of", "%1", "and", "%2"},
          {"how", "big", "is", "%1", "or", "%2", "at", "best"},
      };
      static const std::vector<std::vector<std::string>> kMin = {
          {"what", "is", "the", "least", "of", "%1", "and", "%2"},
          {"how", "small", "is", "%1", "or", "%2", "at", "worst"},
      };
      const auto& tset = use_max ? kMax : kMin;
      inst.question = fill_template(tset[rng.next_below(tset.size())], {tags[i], tags[j]});
      inst.answer = Answer(NumberValue{Decimal::from_int(a)});
      inst.gold_solution =
          canonicalize_solution(Solution(SortSol{use_max ? SortOp::kMax : SortOp::kMin,
                                                 {mention_of[i], mention_of[j]}}));
    }
  } else if (kind == std::string("count")) {
    auto words = pick_distinct(pools.entities, 3, rng);
    const std::string& target = words[0];
    int k_true = static_cast<int>(rng.next_in(2, 4));
    int decoys = static_cast<int>(rng.next_in(1, 3));
    std::vector<Span> gold_spans;
    b.fillers(pools, rng, 1, 2);
    for (int i = 0; i < k_true; ++i) {
      gold_spans.push_back(b.add_entity(target));
      b.fillers(pools, rng, 1, 2);
    }
    for (int i = 0; i < decoys; ++i) {
      b.add_entity(words[1 + static_cast<int>(rng.next_below(2))]);
      b.fillers(pools, rng, 1, 2);
    }
    // Background numbers keep equation noise realistic.
    auto tags = pick_distinct(pools.entities, 2, rng);
    b.add_number(tags[0], rng.next_in(cfg.value_min, cfg.value_max));
    b.fillers(pools, rng, 1, 2);
    if (rng.next_unit() < cfg.collision_boost) b.add_number(tags[1], k_true);
    static const std::vector<std::vector<std::string>> kTpl = {
        {"how", "many", "%1", "items", "appear"},
        {"count", "the", "%1", "entries"},
    };
    inst.question = fill_template(kTpl[rng.next_below(kTpl.size())], {target});
    inst.answer = Answer(NumberValue{Decimal::from_int(k_true)});
    inst.mention_candidates = b.entity_spans;
    inst.gold_solution = canonicalize_solution(Solution(CountSol{gold_spans}));
  } else {  // kv
    int extra = static_cast<int>(rng.next_in(0, 2));
    auto keys = pick_distinct(pools.entities, 2 + extra, rng);
    std::vector<long long> vals;
    std::vector<KvCandidate> kvs;
    b.fillers(pools, rng, 1, 2);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      long long v;
      do {
        v = rng.next_in(cfg.value_min, cfg.value_max);
      } while (std::find(vals.begin(), vals.end(), v) != vals.end());
      vals.push_back(v);
      Span key = b.add_entity(keys[i]);
      int m = b.add_number(pick(pools.fillers, rng), v);
      kvs.push_back(KvCandidate{key, m});
      b.fillers(pools, rng, 1, 2);
    }
    bool use_max = rng.next_unit() < 0.5;
    static const std::vector<std::vector<std::string>> kMax = {
        {"who", "has", "most", "points", "between", "%1", "and", "%2"},
    };
    static const std::vector<std::vector<std::string>> kMin = {
        {"who", "has", "least", "points", "between", "%1", "and", "%2"},
    };
    // The question names the two gold keys; the gold pair set is the first two.
    inst.question = fill_template((use_max ? kMax : kMin)[0], {keys[0], keys[1]});
    std::size_t gold_best = use_max ? (vals[0] >= vals[1] ? 0 : 1) : (vals[0] <= vals[1] ? 0 : 1);
    inst.answer = Answer(TextValue{{keys[gold_best]}});
    inst.kv_candidates = kvs;
    inst.gold_solution = canonicalize_solution(
        Solution(KvSortSol{use_max ? KvOp::kArgmax : KvOp::kArgmin,
                           {KvPair{kvs[0].span, kvs[0].mention_index},
                            KvPair{kvs[1].span, kvs[1].mention_index}}}));
  }
  inst.reference = RefInfo(std::move(b.doc));
  return inst;
}

// --------------------------------------------------------------------------
// SQL family.
// --------------------------------------------------------------------------

Span find_question_span(const TokenSeq& q, const std::string& token) {
  for (int i = 0; i < static_cast<int>(q.size()); ++i)
    if (q[i] == token) return Span{SpanSource::kQuestion, i, i};
  throw std::logic_error("generator: condition value missing from question");
}

Instance gen_sql_instance(const GenConfig& cfg, const Pools& pools, DetRng& rng,
                          const std::string& id) {
  Instance inst;
  inst.id = id;
  inst.family = Family::kSql;

  const int cols = std::max(2, cfg.n_cols);
  const int rows = std::max(2, cfg.n_rows);
  TableRef table;
  auto names = pick_distinct(pools.colnames, cols, rng);
  for (int c = 0; c < cols; ++c) table.header.push_back({names[c]});
  auto keys = pick_distinct(pools.entities, rows, rng);
  for (int r = 0; r < rows; ++r) {
    std::vector<Cell> row;
    row.push_back(Cell{keys[r]});
    for (int c = 1; c < cols; ++c)
      row.push_back(Cell{Decimal::from_int(rng.next_in(cfg.value_min, cfg.value_max))});
    table.rows.push_back(std::move(row));
  }

  double u = rng.next_unit();
  SqlSol gold;
  if (u < 0.45 || cols < 2) {
    // value lookup: select numeric column, key condition
    int sel = 1 + static_cast<int>(rng.next_below(cols - 1));
    int r = static_cast<int>(rng.next_below(rows));
    static const std::vector<std::vector<std::string>> kTpl = {
        {"what", "is", "%1", "for", "%2"},
        {"show", "%1", "of", "%2", "now"},
    };
    inst.question = fill_template(kTpl[rng.next_below(kTpl.size())], {names[sel], keys[r]});
    gold.select_col = sel;
    gold.agg = Agg::kNone;
    gold.conds.push_back(SqlCond{0, Cmp::kEq, find_question_span(inst.question, keys[r])});
    if (rng.next_unit() < cfg.collision_boost && cols >= 3) {
      // Copy the answer value somewhere else: more queries hit it.
      int other = 1 + static_cast<int>(rng.next_below(cols - 1));
      int r2 = static_cast<int>(rng.next_below(rows));
      if (other != sel || r2 != r) table.rows[r2][other] = table.rows[r][sel];
    }
  } else if (u < 0.65) {
    // extremum without conditions
    int sel = 1 + static_cast<int>(rng.next_below(cols - 1));
    bool use_max = rng.next_unit() < 0.5;
    // keep the extremum unique
    long long best = use_max ? -1 : 1LL << 40;
    int best_r = 0;
    for (int r = 0; r < rows; ++r) {
      long long v = *table.rows[r][sel].number()->as_int();
      if (use_max ? v > best : v < best) {
        best = v;
        best_r = r;
      }
    }
    for (int r = 0; r < rows; ++r) {
      if (r == best_r) continue;
      if (*table.rows[r][sel].number() == Decimal::from_int(best))
        table.rows[r][sel] = Cell{Decimal::from_int(best + (use_max ? -1 : 1))};
    }
    static const std::vector<std::vector<std::string>> kMax = {
        {"what", "is", "the", "top", "%1", "overall"},
        {"highest", "%1", "in", "the", "table"},
    };
    static const std::vector<std::vector<std::string>> kMin = {
        {"what", "is", "the", "lowest", "%1", "overall"},
        {"smallest", "%1", "in", "the", "table"},
    };
    inst.question =
        fill_template((use_max ? kMax : kMin)[rng.next_below(2)], {names[sel]});
    gold.select_col = sel;
    gold.agg = use_max ? Agg::kMax : Agg::kMin;
  } else if (u < 0.80 && cols >= 3) {
    // filtered sum over a numeric threshold
    int sel = 1 + static_cast<int>(rng.next_below(cols - 1));
    int cnd = 1 + static_cast<int>(rng.next_below(cols - 1));
    if (cnd == sel) cnd = 1 + (cnd % (cols - 1));
    long long threshold = rng.next_in(cfg.value_min, cfg.value_max);
    bool any = false;
    for (int r = 0; r < rows; ++r)
      any = any || *table.rows[r][cnd].number() > Decimal::from_int(threshold);
    if (!any) table.rows[0][cnd] = Cell{Decimal::from_int(threshold + 1)};
    static const std::vector<std::vector<std::string>> kTpl = {
        {"total", "%1", "where", "%2", "above", "%3"},
        {"sum", "of", "%1", "when", "%2", "over", "%3"},
    };
    inst.question = fill_template(kTpl[rng.next_below(kTpl.size())],
                                  {names[sel], names[cnd], std::to_string(threshold)});
    gold.select_col = sel;
    gold.agg = Agg::kSum;
    gold.conds.push_back(
        SqlCond{cnd, Cmp::kGt, find_question_span(inst.question, std::to_string(threshold))});
  } else {
    // reverse lookup: select the key column by a numeric value
    int cnd = 1 + static_cast<int>(rng.next_below(cols - 1));
    int r = static_cast<int>(rng.next_below(rows));
    long long v = *table.rows[r][cnd].number()->as_int();
    for (int r2 = 0; r2 < rows; ++r2) {
      if (r2 == r) continue;
      if (*table.rows[r2][cnd].number() == Decimal::from_int(v))
        table.rows[r2][cnd] = Cell{Decimal::from_int(v + 1 + static_cast<long long>(rng.next_below(3)))};
    }
    static const std::vector<std::vector<std::string>> kTpl = {
        {"which", "%1", "has", "%2", "of", "%3"},
        {"who", "holds", "%2", "at", "%3"},
    };
    const auto& tpl = kTpl[rng.next_below(kTpl.size())];
    inst.question = fill_template(tpl, {names[0], names[cnd], std::to_string(v)});
    gold.select_col = 0;
    gold.agg = Agg::kNone;
    gold.conds.push_back(
        SqlCond{cnd, Cmp::kEq, find_question_span(inst.question, std::to_string(v))});
  }

  inst.reference = RefInfo(std::move(table));
  Solution gold_z = canonicalize_solution(Solution(std::move(gold)));
  auto result = execute_solution(gold_z, inst.reference, inst.question);
  if (!result) throw std::logic_error("generator: gold sql query does not execute");
  inst.answer = *result;
  inst.gold_solution = std::move(gold_z);
  return inst;
}

Dataset gen_split(const GenConfig& cfg, const Pools& pools, DetRng rng, const char* split,
                  int n) {
  Dataset ds;
  ds.name = std::string(family_name(cfg.family)) + "-" + split;
  ds.family = cfg.family;
  for (int i = 0; i < n; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%s-%05d", family_name(cfg.family), split, i);
    Instance inst;
    switch (cfg.family) {
      case Family::kSpan: inst = gen_span_instance(cfg, pools, rng, id); break;
      case Family::kDiscrete: inst = gen_discrete_instance(cfg, pools, rng, id); break;
      case Family::kSql: inst = gen_sql_instance(cfg, pools, rng, id); break;
    }
    auto violations = validate_instance(inst);
    if (!violations.empty())
      throw std::logic_error("generator produced an invalid instance (" + inst.id +
                             "): " + violations[0]);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

// Trains a throwaway reconstructor on gold pairs and measures on how many dev
// instances gold outscores every spurious solution.
double separability(const Dataset& train, const Dataset& dev,
                    const std::vector<SolutionSet>& dev_sets) {
  std::vector<Token> vocab;
  for (const auto& inst : train.instances)
    vocab.insert(vocab.end(), inst.question.begin(), inst.question.end());
  Reconstructor recon(std::move(vocab));
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& inst : train.instances)
      recon.sgd_step(inst.question, inst.reference, *inst.gold_solution, 0.3);

  int separated = 0, total = 0;
  for (std::size_t i = 0; i < dev.instances.size(); ++i) {
    const Instance& inst = dev.instances[i];
    const SolutionSet& zs = dev_sets[i];
    if (!inst.gold_solution || zs.solutions.empty()) continue;
    Solution gold = canonicalize_solution(*inst.gold_solution);
    bool found = false;
    double gold_ll = 0.0;
    for (const auto& z : zs.solutions)
      if (z == gold) {
        gold_ll = recon.loglik(inst.question, inst.reference, z);
        found = true;
        break;
      }
    if (!found) continue;
    total += 1;
    bool ok = true;
    for (const auto& z : zs.solutions) {
      if (z == gold) continue;
      if (recon.loglik(inst.question, inst.reference, z) >= gold_ll) {
        ok = false;
        break;
      }
    }
    if (ok) ++separated;
  }
  return total == 0 ? 1.0 : static_cast<double>(separated) / total;
}

}  // namespace

Benchmark generate_benchmark(const GenConfig& cfg) {
  if (cfg.n_train <= 0 || cfg.n_dev <= 0 || cfg.n_test <= 0 || cfg.vocab_size < 24 ||
      cfg.collision_boost < 0.0 || cfg.collision_boost > 1.0 || cfg.value_min < 1 ||
      cfg.value_max <= cfg.value_min)
    throw std::invalid_argument("invalid generator configuration");
  Pools pools = build_pools(cfg.vocab_size);
  EnumConfig ecfg;

  Benchmark best;
  for (int attempt = 0; attempt <= cfg.separability_max_retries; ++attempt) {
    std::uint64_t seed = cfg.seed + 1000003ULL * static_cast<std::uint64_t>(attempt);
    DetRng root(seed);
    Benchmark b;
    b.train = gen_split(cfg, pools, root.fork(1), "train", cfg.n_train);
    b.dev = gen_split(cfg, pools, root.fork(2), "dev", cfg.n_dev);
    b.test = gen_split(cfg, pools, root.fork(3), "test", cfg.n_test);
    b.seed_used = seed;
    b.gate_attempts = attempt + 1;

    std::vector<SolutionSet> dev_sets = enumerate_dataset(b.dev, ecfg);
    b.gate_separation = separability(b.train, b.dev, dev_sets);

    std::vector<SolutionSet> train_sets = enumerate_dataset(b.train, ecfg);
    std::vector<std::size_t> sizes;
    double sum = 0.0;
    for (const auto& s : train_sets) {
      sizes.push_back(s.size());
      sum += static_cast<double>(s.size());
    }
    std::sort(sizes.begin(), sizes.end());
    b.train_z_median = sizes.empty() ? 0.0 : static_cast<double>(sizes[sizes.size() / 2]);
    b.train_z_mean = sizes.empty() ? 0.0 : sum / static_cast<double>(sizes.size());

    if (b.gate_separation >= 0.9) return b;
    best = std::move(b);
  }
  throw DataError("separability gate failed after " +
                  std::to_string(cfg.separability_max_retries + 1) + " attempts (best " +
                  std::to_string(best.gate_separation) + ")");
}

Dataset make_hard_split(const Dataset& ds, double fraction, const SolutionSidecar& sc) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("fraction must be in [0,1]");
  std::vector<std::pair<long long, std::size_t>> ranked;  // (-|Z|, index)
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    auto it = sc.find(ds.instances[i].id);
    if (it == sc.end()) throw DataError("missing sidecar entry for " + ds.instances[i].id);
    ranked.emplace_back(-static_cast<long long>(it->second.size()), i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::size_t keep = static_cast<std::size_t>(fraction * static_cast<double>(ds.instances.size()));
  keep = std::min(keep, ds.instances.size());
  std::vector<bool> selected(ds.instances.size(), false);
  for (std::size_t i = 0; i < keep; ++i) selected[ranked[i].second] = true;
  Dataset out;
  out.name = ds.name + "-hard";
  out.family = ds.family;
  for (std::size_t i = 0; i < ds.instances.size(); ++i)
    if (selected[i]) out.instances.push_back(ds.instances[i]);
  return out;
}

}  // namespace wsqa
