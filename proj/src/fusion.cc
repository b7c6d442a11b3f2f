// Copyright (c) 2026 The cdasr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdasr/fusion.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cdasr {

FusedLogits fuse_single(std::span<const float> pos, std::span<const float> neg,
                        double alpha) {
  if (pos.size() != neg.size()) {
    throw FusionError("length mismatch: " + std::to_string(pos.size()) +
                      " vs " + std::to_string(neg.size()));
  }
  FusedLogits out(pos.size());
  for (std::size_t v = 0; v < pos.size(); ++v) {
    out[v] = (1.0 + alpha) * pos[v] - alpha * neg[v];
  }
  return out;
}

double tempered_log_mean_exp(std::span<const double> values, double tau) {
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double x : values) sum += std::exp((x - m) / tau);
  return m + tau * std::log(sum / static_cast<double>(values.size()));
}

FusedLogits fuse_multi(std::span<const float> pos,
                       std::span<const LogitVector> negs, double alpha,
                       double tau) {
  if (negs.empty()) throw FusionError("need at least one negative path");
  if (!(tau > 0.0)) throw FusionError("tau must be positive");
  for (const auto& neg : negs) {
    if (neg.size() != pos.size()) {
      throw FusionError("length mismatch: " + std::to_string(pos.size()) +
                        " vs " + std::to_string(neg.size()));
    }
  }

  const double strength = alpha * tau;
  FusedLogits out(pos.size());
  std::vector<double> column(negs.size());
  for (std::size_t v = 0; v < pos.size(); ++v) {
    for (std::size_t k = 0; k < negs.size(); ++k) column[k] = negs[k][v];
    // alpha*tau * lme(neg / tau) == alpha * (tau * lme(neg / tau)).
    const double aggregate = tempered_log_mean_exp(column, tau);
    out[v] = (1.0 + strength) * pos[v] - alpha * aggregate;
    if (!std::isfinite(out[v])) {
      throw FusionError("non-finite fused logit at token " + std::to_string(v));
    }
  }
  return out;
}

void log_softmax(std::span<double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(m)) return;
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - m);
  const double lse = m + std::log(sum);
  for (double& x : logits) x -= lse;
}

}  // namespace cdasr
