// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <vector>

namespace refdic {

// Per-step next-word probabilities P(w_t | w_1..t-1, I), each in (0, 1].
using TokenProbabilities = std::vector<double>;

struct SampledCaption {
  double log_prob = 0;  // sequence log-probability, <= 0
  double reward = 0;
};

using SampledCaptionBatch = std::vector<SampledCaption>;

// Cross-entropy over a caption: -sum_t ln P(w_t | ...). Always >= 0.
double xe_loss(const TokenProbabilities& probs);

// Policy-gradient loss with a mean-reward baseline:
//   b = mean(r), loss = -(1/n) sum_i (r_i - b) * log_prob_i.
double rl_loss(const SampledCaptionBatch& batch);

}  // namespace refdic
