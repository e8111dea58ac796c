#include "wsqa/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wsqa {

namespace {

std::set<Token> question_token_set(const Instance& inst) {
  return std::set<Token>(inst.question.begin(), inst.question.end());
}

int position_bucket(int start, int source_len) {
  if (source_len <= 1) return 0;
  int b = 4 * start / source_len;
  return std::min(b, 3);
}

}  // namespace

// Span-level features shared by every solution kind: lexical overlap between
// the question and the span (and its one-token context window), plus the
// occurrence-ordinal / position / length / identity features that let a
// model express positional (spurious) preferences as easily as semantic ones.
static void add_span_feats(const Instance& inst, const Span& span, const std::set<Token>& qset,
                           FeatureInterner& in, SparseFeats& f) {
  const TokenSeq* toks = nullptr;
  if (span.source == SpanSource::kQuestion) {
    toks = &inst.question;
  } else if (const auto* doc = as_document(inst.reference)) {
    toks = &doc->tokens;
  }
  if (!toks || span.start < 0 || span.end >= static_cast<int>(toks->size())) return;

  int span_ovl = 0;
  for (int i = span.start; i <= span.end; ++i) span_ovl += qset.count((*toks)[i]) ? 1 : 0;
  int ctx_ovl = 0;
  if (span.start > 0 && qset.count((*toks)[span.start - 1])) ++ctx_ovl;
  if (span.end + 1 < static_cast<int>(toks->size()) && qset.count((*toks)[span.end + 1])) ++ctx_ovl;

  if (span.source == SpanSource::kReference) {
    if (span_ovl) f.add(in.intern("q_span_ovl"), span_ovl);
    if (ctx_ovl) f.add(in.intern("q_ctx_ovl"), ctx_ovl);
  }

  int ord = 0;
  const int len = span.length();
  for (int p = 0; p < span.start; ++p) {
    if (p + len > static_cast<int>(toks->size())) break;
    bool same = true;
    for (int j = 0; j < len; ++j)
      if ((*toks)[p + j] != (*toks)[span.start + j]) {
        same = false;
        break;
      }
    if (same) ++ord;
  }
  f.add(in.intern("sp_ord=" + std::to_string(std::min(ord, 3))), 1.0);
  f.add(in.intern("sp_pos=" + std::to_string(position_bucket(span.start,
                                                             static_cast<int>(toks->size())))),
        1.0);
  f.add(in.intern("sp_len=" + std::to_string(std::min(len, 4))), 1.0);
  f.add(in.intern(std::string("sp_src=") + (span.source == SpanSource::kQuestion ? "q" : "d")),
        1.0);
  for (int i = span.start; i <= span.end; ++i) f.add(in.intern("sp_tok=" + (*toks)[i]), 1.0);
}

static void add_mention_feats(const Instance& inst, int mention_index,
                              const std::set<Token>& qset, FeatureInterner& in, SparseFeats& f) {
  const auto* doc = as_document(inst.reference);
  if (!doc || mention_index < 0 || mention_index >= static_cast<int>(doc->numbers.size())) return;
  int t = doc->numbers[mention_index].token_index;
  add_span_feats(inst, Span{SpanSource::kReference, t, t}, qset, in, f);
}

SparseFeats TaskModel::sql_sel_feats(const Instance& inst, int col) {
  SparseFeats f;
  const auto* table = as_table(inst.reference);
  if (!table) return f;
  auto qset = question_token_set(inst);
  int ovl = 0;
  for (const auto& t : table->header[col]) ovl += qset.count(t) ? 1 : 0;
  if (ovl) f.add(interner_.intern("sel_ovl"), ovl);
  f.add(interner_.intern("sel_col=" + std::to_string(col)), 1.0);
  for (const auto& t : table->header[col]) f.add(interner_.intern("sel_tok=" + t), 1.0);
  return f;
}

SparseFeats TaskModel::sql_agg_feats(const Instance&, Agg agg) {
  SparseFeats f;
  f.add(interner_.intern(std::string("agg=") + agg_name(agg)), 1.0);
  return f;
}

SparseFeats TaskModel::sql_cond_feats(const Instance& inst, const SqlCond& cond) {
  SparseFeats f;
  const auto* table = as_table(inst.reference);
  if (!table) return f;
  auto qset = question_token_set(inst);
  int col_ovl = 0;
  for (const auto& t : table->header[cond.column]) col_ovl += qset.count(t) ? 1 : 0;
  if (col_ovl) f.add(interner_.intern("cond_col_ovl"), col_ovl);
  f.add(interner_.intern(std::string("cond_cmp=") + cmp_name(cond.cmp)), 1.0);
  f.add(interner_.intern("cond_col=" + std::to_string(cond.column)), 1.0);
  f.add(interner_.intern("cond_val_len=" + std::to_string(std::min(cond.value.length(), 4))), 1.0);
  std::string text;
  for (int i = cond.value.start; i <= cond.value.end && i < static_cast<int>(inst.question.size());
       ++i) {
    if (i > cond.value.start) text.push_back(' ');
    text += inst.question[i];
  }
  bool in_col = false;
  for (const auto& row : table->rows)
    if (row[cond.column].display() == text) {
      in_col = true;
      break;
    }
  if (in_col) f.add(interner_.intern("cond_val_in_col"), 1.0);
  for (int i = cond.value.start; i <= cond.value.end && i < static_cast<int>(inst.question.size());
       ++i)
    f.add(interner_.intern("cond_val_tok=" + inst.question[i]), 1.0);
  return f;
}

SparseFeats TaskModel::sql_count_feats(const Instance&, int n_conds) {
  SparseFeats f;
  f.add(interner_.intern("kind=sql"), 1.0);
  f.add(interner_.intern("conds=" + std::to_string(n_conds)), 1.0);
  return f;
}

SparseFeats TaskModel::extract(const Instance& inst, const Solution& z) {
  SparseFeats f;
  auto qset = question_token_set(inst);
  FeatureInterner& in = interner_;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SpanSol>) {
          f.add(in.intern("kind=span"), 1.0);
          add_span_feats(inst, x.span, qset, in, f);
        } else if constexpr (std::is_same_v<T, SpansSol>) {
          f.add(in.intern("kind=spans"), 1.0);
          f.add(in.intern("list_n=" + std::to_string(std::min<int>(x.spans.size(), 4))), 1.0);
          for (const auto& s : x.spans) add_span_feats(inst, s, qset, in, f);
        } else if constexpr (std::is_same_v<T, ArithSol>) {
          f.add(in.intern("kind=arith"), 1.0);
          f.add(in.intern("terms=" + std::to_string(x.terms.size())), 1.0);
          for (const auto& t : x.terms) {
            f.add(in.intern(t.sign == Sign::kPlus ? "sign=+" : "sign=-"), 1.0);
            if (t.ref.kind == NumberRef::Kind::kConstant)
              f.add(in.intern("const=" + t.ref.value.str()), 1.0);
            else
              add_mention_feats(inst, t.ref.mention_index, qset, in, f);
          }
        } else if constexpr (std::is_same_v<T, SortSol>) {
          f.add(in.intern("kind=sort"), 1.0);
          f.add(in.intern(std::string("op=") + sort_op_name(x.op)), 1.0);
          f.add(in.intern("sort_n=" + std::to_string(x.mention_indices.size())), 1.0);
          for (int m : x.mention_indices) add_mention_feats(inst, m, qset, in, f);
        } else if constexpr (std::is_same_v<T, CountSol>) {
          f.add(in.intern("kind=count"), 1.0);
          f.add(in.intern("count_n=" + std::to_string(std::min<int>(x.spans.size(), 8))), 1.0);
          for (const auto& s : x.spans) add_span_feats(inst, s, qset, in, f);
        } else if constexpr (std::is_same_v<T, KvSortSol>) {
          f.add(in.intern("kind=kv_sort"), 1.0);
          f.add(in.intern(std::string("op=") + kv_op_name(x.op)), 1.0);
          for (const auto& p : x.pairs) {
            add_span_feats(inst, p.key, qset, in, f);
            add_mention_feats(inst, p.mention_index, qset, in, f);
          }
        } else if constexpr (std::is_same_v<T, SqlSol>) {
          auto append = [&](const SparseFeats& g) {
            for (std::size_t i = 0; i < g.ids.size(); ++i) f.add(g.ids[i], g.vals[i]);
          };
          append(sql_count_feats(inst, static_cast<int>(x.conds.size())));
          append(sql_sel_feats(inst, x.select_col));
          append(sql_agg_feats(inst, x.agg));
          for (const auto& c : x.conds) append(sql_cond_feats(inst, c));
        }
      },
      z);
  return f;
}

FeatureVector TaskModel::weights_view() const {
  FeatureVector out;
  for (int id = 0; id < static_cast<int>(weights_.size()); ++id)
    if (weights_.get(id) != 0.0) out[interner_.name(id)] = weights_.get(id);
  return out;
}

void TaskModel::load_weights(const FeatureVector& w) {
  weights_.clear();
  for (const auto& [name, value] : w) weights_.set(interner_.intern(name), value);
}

double TaskModel::weight_by_name(const std::string& name) const {
  int id = interner_.find(name);
  return id < 0 ? 0.0 : weights_.get(id);
}

void TaskModel::nudge_weight(const std::string& name, double delta) {
  weights_.add(interner_.intern(name), delta);
}

std::vector<double> softmax(const std::vector<double>& scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::vector<double> task_scores(const TaskModel& m, const std::vector<SparseFeats>& cands) {
  std::vector<double> s(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) s[i] = m.score(cands[i]);
  return s;
}

std::vector<double> task_distribution(const TaskModel& m, const std::vector<SparseFeats>& cands) {
  return softmax(task_scores(m, cands));
}

void sgd_step_task(TaskModel& m, const std::vector<SparseFeats>& cands,
                   const std::vector<std::pair<int, double>>& targets, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  std::vector<double> p = task_distribution(m, cands);
  double total = 0.0;
  for (const auto& [idx, w] : targets) {
    if (w == 0.0) continue;
    m.ascend(cands[idx], lr * w);
    total += w;
  }
  if (total == 0.0) return;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (p[i] != 0.0) m.ascend(cands[i], -lr * total * p[i]);
}

// ---------------------------------------------------------------------------
// Reconstructor
// ---------------------------------------------------------------------------

Reconstructor::Reconstructor(std::vector<Token> vocab_tokens) {
  std::sort(vocab_tokens.begin(), vocab_tokens.end());
  vocab_tokens.erase(std::unique(vocab_tokens.begin(), vocab_tokens.end()), vocab_tokens.end());
  tokens_ = std::move(vocab_tokens);
  n_tokens_ = static_cast<int>(tokens_.size());
  for (int i = 0; i < n_tokens_; ++i) token_index_[tokens_[i]] = i;
  bigram_.assign(n_tokens_ + 2, std::vector<double>(vocab_size(), 0.0));
}

int Reconstructor::token_id(const Token& t) const {
  auto it = token_index_.find(t);
  return it == token_index_.end() ? oov_id() : it->second;
}

std::vector<int> Reconstructor::question_ids(const TokenSeq& q) const {
  std::vector<int> out;
  out.reserve(q.size());
  for (const auto& t : q) out.push_back(token_id(t));
  return out;
}

std::vector<int> Reconstructor::intern_encoding(const EncodedSolution& enc) {
  std::vector<int> ids;
  for (const auto& name : pooled_encoding_features(enc)) {
    int id = enc_features_.intern(name);
    if (id >= static_cast<int>(emission_.size()))
      emission_.resize(id + 1, std::vector<double>(vocab_size(), 0.0));
    ids.push_back(id);
  }
  return ids;
}

std::vector<int> Reconstructor::encode_and_intern(const Instance& inst, const Solution& z) {
  return intern_encoding(encode_solution(z, inst.reference, inst.question));
}

void Reconstructor::emission_scores(int prev_id, const std::vector<int>& enc_ids,
                                    std::vector<double>& out) const {
  const int v = vocab_size();
  out.assign(v, 0.0);
  const std::vector<double>& bg = bigram_[prev_id];
  for (int i = 0; i < v; ++i) out[i] = bg[i];
  for (int e : enc_ids) {
    const std::vector<double>& row = emission_[e];
    for (int i = 0; i < v; ++i) out[i] += row[i];
  }
}

double Reconstructor::loglik_ids(const std::vector<int>& q_ids,
                                 const std::vector<int>& enc_ids) const {
  double total = 0.0;
  std::vector<double> scores;
  const int n = static_cast<int>(q_ids.size());
  for (int t = 0; t <= n; ++t) {
    int prev = t == 0 ? bos_row() : q_ids[t - 1];
    int target = t == n ? end_id() : q_ids[t];
    emission_scores(prev, enc_ids, scores);
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - m);
    total += scores[target] - m - std::log(z);
  }
  return total;
}

double Reconstructor::loglik(const TokenSeq& q, const RefInfo& ref, const Solution& z) {
  std::vector<int> enc_ids = intern_encoding(encode_solution(z, ref, q));
  return loglik_ids(question_ids(q), enc_ids);
}

double Reconstructor::sgd_step_ids(const std::vector<int>& q_ids,
                                   const std::vector<int>& enc_ids, double lr) {
  double total = 0.0;
  std::vector<double> scores;
  std::vector<double> p;
  const int n = static_cast<int>(q_ids.size());
  const int v = vocab_size();
  for (int t = 0; t <= n; ++t) {
    int prev = t == 0 ? bos_row() : q_ids[t - 1];
    int target = t == n ? end_id() : q_ids[t];
    emission_scores(prev, enc_ids, scores);
    double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    p.assign(v, 0.0);
    for (int i = 0; i < v; ++i) {
      p[i] = std::exp(scores[i] - m);
      z += p[i];
    }
    total += scores[target] - m - std::log(z);
    std::vector<double>& bg = bigram_[prev];
    for (int i = 0; i < v; ++i) {
      double g = (i == target ? 1.0 : 0.0) - p[i] / z;
      if (g == 0.0) continue;
      bg[i] += lr * g;
      for (int e : enc_ids) emission_[e][i] += lr * g;
    }
  }
  return total;
}

double Reconstructor::sgd_step(const TokenSeq& q, const RefInfo& ref, const Solution& z,
                               double lr) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  std::vector<int> enc_ids = intern_encoding(encode_solution(z, ref, q));
  return sgd_step_ids(question_ids(q), enc_ids, lr);
}

namespace {

std::string emit_name(const std::vector<Token>& tokens, int n_tokens, int v) {
  if (v < n_tokens) return tokens[v];
  return v == n_tokens ? "<oov>" : "<end>";
}

}  // namespace

FeatureVector Reconstructor::weights_view() const {
  FeatureVector out;
  const int v = vocab_size();
  for (int prev = 0; prev < static_cast<int>(bigram_.size()); ++prev) {
    std::string pname =
        prev < n_tokens_ ? tokens_[prev] : (prev == oov_id() ? "<oov>" : "<bos>");
    for (int i = 0; i < v; ++i)
      if (bigram_[prev][i] != 0.0)
        out["bg:" + pname + "->" + emit_name(tokens_, n_tokens_, i)] = bigram_[prev][i];
  }
  for (int e = 0; e < static_cast<int>(emission_.size()); ++e)
    for (int i = 0; i < v; ++i)
      if (emission_[e][i] != 0.0)
        out["em:" + enc_features_.name(e) + "->" + emit_name(tokens_, n_tokens_, i)] =
            emission_[e][i];
  return out;
}

namespace {

int emit_id_from_name(const std::unordered_map<std::string, int>& index, int n_tokens,
                      const std::string& name) {
  if (name == "<oov>") return n_tokens;
  if (name == "<end>") return n_tokens + 1;
  auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

}  // namespace

void Reconstructor::load_weights(const FeatureVector& w) {
  for (auto& row : bigram_) std::fill(row.begin(), row.end(), 0.0);
  for (auto& row : emission_) std::fill(row.begin(), row.end(), 0.0);
  for (const auto& [name, value] : w) nudge_weight(name, value);
}

double Reconstructor::weight_by_name(const std::string& name) const {
  auto arrow = name.rfind("->");
  if (arrow == std::string::npos || name.size() < 4) return 0.0;
  std::string head = name.substr(0, arrow);
  int v = emit_id_from_name(token_index_, n_tokens_, name.substr(arrow + 2));
  if (v < 0) return 0.0;
  if (head.rfind("bg:", 0) == 0) {
    std::string pname = head.substr(3);
    int prev = pname == "<bos>" ? bos_row()
                                : (pname == "<oov>" ? oov_id()
                                                    : emit_id_from_name(token_index_, n_tokens_,
                                                                        pname));
    if (prev < 0 || prev >= static_cast<int>(bigram_.size())) return 0.0;
    return bigram_[prev][v];
  }
  if (head.rfind("em:", 0) == 0) {
    int e = enc_features_.find(head.substr(3));
    if (e < 0 || e >= static_cast<int>(emission_.size())) return 0.0;
    return emission_[e][v];
  }
  return 0.0;
}

void Reconstructor::nudge_weight(const std::string& name, double delta) {
  auto arrow = name.rfind("->");
  if (arrow == std::string::npos) throw std::invalid_argument("bad reconstructor weight name");
  std::string head = name.substr(0, arrow);
  int v = emit_id_from_name(token_index_, n_tokens_, name.substr(arrow + 2));
  if (v < 0) throw std::invalid_argument("unknown emission symbol in " + name);
  if (head.rfind("bg:", 0) == 0) {
    std::string pname = head.substr(3);
    int prev = pname == "<bos>" ? bos_row()
                                : (pname == "<oov>" ? oov_id()
                                                    : emit_id_from_name(token_index_, n_tokens_,
                                                                        pname));
    if (prev < 0) throw std::invalid_argument("unknown context symbol in " + name);
    bigram_[prev][v] += delta;
    return;
  }
  if (head.rfind("em:", 0) == 0) {
    int e = enc_features_.intern(head.substr(3));
    if (e >= static_cast<int>(emission_.size()))
      emission_.resize(e + 1, std::vector<double>(vocab_size(), 0.0));
    emission_[e][v] += delta;
    return;
  }
  throw std::invalid_argument("bad reconstructor weight name: " + name);
}

}  // namespace wsqa
