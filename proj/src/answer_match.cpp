#include "wsqa/answer_match.hpp"

#include <algorithm>
#include <map>

namespace wsqa {

namespace {

std::vector<TokenSeq> sorted_items(const TextListValue& l) {
  std::vector<TokenSeq> items = l.items;
  std::sort(items.begin(), items.end());
  return items;
}

double bag_f1(const TokenSeq& pred, const TokenSeq& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::map<Token, int> want;
  for (const auto& t : gold) want[t] += 1;
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = want.find(t);
    if (it != want.end() && it->second > 0) {
      it->second -= 1;
      overlap += 1;
    }
  }
  if (overlap == 0) return 0.0;
  double p = static_cast<double>(overlap) / pred.size();
  double r = static_cast<double>(overlap) / gold.size();
  return 2.0 * p * r / (p + r);
}

std::optional<std::vector<TokenSeq>> as_items(const AnswerValue& a) {
  if (const auto* t = std::get_if<TextValue>(&a)) return std::vector<TokenSeq>{t->tokens};
  if (const auto* l = std::get_if<TextListValue>(&a)) return l->items;
  return std::nullopt;
}

double list_f1(const std::vector<TokenSeq>& pred, const std::vector<TokenSeq>& gold) {
  if (pred.empty() || gold.empty()) return 0.0;
  std::vector<bool> used_p(pred.size(), false), used_g(gold.size(), false);
  double total = 0.0;
  std::size_t pairs = std::min(pred.size(), gold.size());
  for (std::size_t k = 0; k < pairs; ++k) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (used_p[i]) continue;
      for (std::size_t j = 0; j < gold.size(); ++j) {
        if (used_g[j]) continue;
        double f = bag_f1(pred[i], gold[j]);
        if (f > best) {
          best = f;
          bi = i;
          bj = j;
        }
      }
    }
    used_p[bi] = true;
    used_g[bj] = true;
    total += best;
  }
  return total / std::max(pred.size(), gold.size());
}

}  // namespace

bool answer_equal(const AnswerValue& predicted, const Answer& gold) {
  if (predicted.index() != gold.index()) return false;
  if (const auto* t = std::get_if<TextValue>(&predicted))
    return t->tokens == std::get<TextValue>(gold).tokens;
  if (const auto* n = std::get_if<NumberValue>(&predicted))
    return n->value == std::get<NumberValue>(gold).value;
  return sorted_items(std::get<TextListValue>(predicted)) ==
         sorted_items(std::get<TextListValue>(gold));
}

EmF1 answer_em_f1(const AnswerValue& predicted, const Answer& gold) {
  EmF1 out;
  out.em = answer_equal(predicted, gold) ? 1.0 : 0.0;
  const bool pred_num = std::holds_alternative<NumberValue>(predicted);
  const bool gold_num = std::holds_alternative<NumberValue>(gold);
  if (pred_num || gold_num) {
    // Numbers score F1 = EM; a number against text never partially matches.
    out.f1 = pred_num && gold_num ? out.em : 0.0;
    return out;
  }
  auto pred_items = as_items(predicted);
  auto gold_items = as_items(gold);
  const bool any_list = std::holds_alternative<TextListValue>(predicted) ||
                        std::holds_alternative<TextListValue>(gold);
  if (any_list)
    out.f1 = list_f1(*pred_items, *gold_items);
  else
    out.f1 = bag_f1((*pred_items)[0], (*gold_items)[0]);
  return out;
}

}  // namespace wsqa
