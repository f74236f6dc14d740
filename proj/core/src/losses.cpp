// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/losses.hpp"

#include <cmath>
#include <string>

#include "refdic/errors.hpp"

namespace refdic {

double xe_loss(const TokenProbabilities& probs) {
  double loss = 0;
  for (std::size_t t = 0; t < probs.size(); ++t) {
    double p = probs[t];
    if (!(p > 0.0) || p > 1.0) {
      throw DomainError("xe_loss: probability at step " + std::to_string(t) +
                        " is outside (0, 1]");
    }
    loss -= std::log(p);
  }
  return loss;
}

double rl_loss(const SampledCaptionBatch& batch) {
  if (batch.empty()) throw DomainError("rl_loss: batch must contain n >= 1 samples");
  double baseline = 0;
  for (const auto& s : batch) baseline += s.reward;
  baseline /= static_cast<double>(batch.size());
  double loss = 0;
  for (const auto& s : batch) loss += (s.reward - baseline) * s.log_prob;
  return -loss / static_cast<double>(batch.size());
}

}  // namespace refdic
