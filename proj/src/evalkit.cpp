#include "wsqa/evalkit.hpp"

#include <algorithm>

#include "wsqa/rng.hpp"

namespace wsqa {

EmF1 answer_em_f1_of(const AnswerValue& predicted, const Answer& gold) {
  return answer_em_f1(predicted, gold);
}

const char* z_bucket_label(std::size_t z) {
  if (z <= 1) return "1";
  if (z <= 4) return "2-4";
  if (z <= 16) return "5-16";
  return "17+";
}

MetricsReport evaluate(const PredictFn& predict, const Dataset& ds, const SolutionSidecar& sc) {
  MetricsReport r;
  std::map<std::string, BucketMetrics> buckets;
  for (const char* label : {"1", "2-4", "5-16", "17+"}) buckets[label].label = label;

  for (const auto& inst : ds.instances) {
    r.n_eval += 1;
    std::size_t z_size = 0;
    auto it = sc.find(inst.id);
    if (it != sc.end()) z_size = it->second.size();
    BucketMetrics& bucket = buckets[z_bucket_label(z_size)];
    bucket.n += 1;

    double em = 0.0, f1 = 0.0, exec = 0.0, lf = 0.0;
    std::optional<Solution> pred = predict(inst);
    if (pred) {
      auto value = execute_solution(*pred, inst.reference, inst.question);
      if (value) {
        EmF1 s = answer_em_f1(*value, inst.answer);
        em = s.em;
        f1 = s.f1;
        exec = answer_equal(*value, inst.answer) ? 1.0 : 0.0;
      }
      if (inst.gold_solution &&
          canonicalize_solution(*pred) == canonicalize_solution(*inst.gold_solution))
        lf = 1.0;
    }
    r.answer_em += em;
    r.answer_f1 += f1;
    r.exec_acc += exec;
    bucket.em += em;
    bucket.f1 += f1;
    if (inst.gold_solution) {
      r.n_gold += 1;
      r.lf_acc += lf;
      bucket.n_gold += 1;
      bucket.lf_acc += lf;
    }
  }

  if (r.n_eval > 0) {
    r.answer_em /= r.n_eval;
    r.answer_f1 /= r.n_eval;
    r.exec_acc /= r.n_eval;
  }
  if (r.n_gold > 0) r.lf_acc /= r.n_gold;
  for (const char* label : {"1", "2-4", "5-16", "17+"}) {
    BucketMetrics b = buckets[label];
    if (b.n > 0) {
      b.em /= b.n;
      b.f1 /= b.n;
    }
    if (b.n_gold > 0) b.lf_acc /= b.n_gold;
    r.by_z_bucket.push_back(std::move(b));
  }
  return r;
}

MetricsReport evaluate_model(TaskModel& m, const Dataset& ds, const SolutionSidecar& sc,
                             const EnumConfig& cfg) {
  return evaluate([&](const Instance& inst) { return predict_solution(m, inst, cfg); }, ds, sc);
}

ojson metrics_to_json(const MetricsReport& r) {
  ojson j;
  j["answer_em"] = r.answer_em;
  j["answer_f1"] = r.answer_f1;
  j["exec_acc"] = r.exec_acc;
  j["lf_acc"] = r.lf_acc;
  j["n_eval"] = r.n_eval;
  j["n_gold"] = r.n_gold;
  ojson buckets = ojson::array();
  for (const auto& b : r.by_z_bucket) {
    ojson jb;
    jb["bucket"] = b.label;
    jb["n"] = b.n;
    jb["em"] = b.em;
    jb["f1"] = b.f1;
    jb["lf_acc"] = b.lf_acc;
    buckets.push_back(std::move(jb));
  }
  j["by_z_bucket"] = std::move(buckets);
  return j;
}

SelectionResult sql_selection_eval(const SolutionScorer& scorer, const Dataset& ds,
                                   const SolutionSidecar& sc, std::uint64_t seed) {
  SelectionResult out;
  DetRng rng(seed);
  double correct = 0.0;
  for (const auto& inst : ds.instances) {
    if (inst.family != Family::kSql || !inst.gold_solution) continue;
    auto it = sc.find(inst.id);
    if (it == sc.end() || it->second.solutions.empty()) {
      out.n_skipped += 1;
      continue;
    }
    const auto& zs = it->second.solutions;
    Solution gold = canonicalize_solution(*inst.gold_solution);
    int gold_idx = -1;
    for (int i = 0; i < static_cast<int>(zs.size()); ++i)
      if (zs[i] == gold) {
        gold_idx = i;
        break;
      }
    if (gold_idx < 0) {
      out.n_skipped += 1;
      continue;
    }
    const int m = std::min<int>(10, static_cast<int>(zs.size()));
    // Partial Fisher-Yates over the non-gold indices, then gold added back;
    // candidates keep enumeration order.
    std::vector<int> others;
    for (int i = 0; i < static_cast<int>(zs.size()); ++i)
      if (i != gold_idx) others.push_back(i);
    for (int i = 0; i < m - 1; ++i) {
      int j = i + static_cast<int>(rng.next_below(others.size() - i));
      std::swap(others[i], others[j]);
    }
    std::vector<int> cand(others.begin(), others.begin() + (m - 1));
    cand.push_back(gold_idx);
    std::sort(cand.begin(), cand.end());

    int best = cand[0];
    double best_score = scorer(inst, zs[cand[0]]);
    for (int i = 1; i < m; ++i) {
      double s = scorer(inst, zs[cand[i]]);
      if (s > best_score) {
        best_score = s;
        best = cand[i];
      }
    }
    out.n_scored += 1;
    if (best == gold_idx) correct += 1.0;
  }
  if (out.n_scored > 0) out.accuracy = correct / out.n_scored;
  return out;
}

}  // namespace wsqa
