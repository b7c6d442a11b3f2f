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

#ifndef CDASR_FUSION_H_
#define CDASR_FUSION_H_

#include <span>
#include <stdexcept>
#include <vector>

#include "cdasr/backend.h"

namespace cdasr {

// Contrastive logits are kept in double precision.
using FusedLogits = std::vector<double>;

class FusionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (1 + alpha) * pos - alpha * neg, elementwise.
FusedLogits fuse_single(std::span<const float> pos, std::span<const float> neg,
                        double alpha);

// Multi-negative contrast:
//   (1 + alpha*tau) * pos - alpha*tau * log(mean_k exp(neg_k / tau))
// The log-mean-exp subtracts the per-component max before exponentiating.
// Throws FusionError on length mismatch, empty `negs`, tau <= 0 or a
// non-finite result.
FusedLogits fuse_multi(std::span<const float> pos,
                       std::span<const LogitVector> negs, double alpha,
                       double tau);

// log(mean_k exp(values_k / tau)) * tau, computed stably.
double tempered_log_mean_exp(std::span<const double> values, double tau);

// In-place log-softmax over `logits`. Entries equal to -inf stay -inf.
void log_softmax(std::span<double> logits);

}  // namespace cdasr

#endif  // CDASR_FUSION_H_
