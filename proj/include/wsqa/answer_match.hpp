#pragma once

#include "wsqa/types.hpp"

namespace wsqa {

// Exact answer equality: numbers by decimal value, text by token sequence,
// lists as multisets of token sequences. Kinds must match.
bool answer_equal(const AnswerValue& predicted, const Answer& gold);

struct EmF1 {
  double em = 0.0;
  double f1 = 0.0;
};

// EM is answer_equal. F1 is token-level bag overlap; numbers score F1 = EM;
// lists align items greedily (highest pairwise F1 first) and divide the
// summed item F1 by max(|predicted|, |gold|). A bare text against a list is
// treated as a one-item list.
EmF1 answer_em_f1(const AnswerValue& predicted, const Answer& gold);

}  // namespace wsqa
