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

#ifndef CDASR_TESTS_WER_ORACLE_H_
#define CDASR_TESTS_WER_ORACLE_H_

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace cdasr::testing {

// Top-down memoised edit distance that walks back from (i, j) preferring
// match, substitution, deletion, insertion among optimal moves. Returns
// {substitutions, deletions, insertions}.
class WerOracle {
 public:
  WerOracle(const std::vector<std::string>& ref, const std::vector<std::string>& hyp)
      : ref_(ref), hyp_(hyp) {}

  std::array<std::size_t, 3> counts() {
    std::array<std::size_t, 3> c{0, 0, 0};
    std::size_t i = ref_.size(), j = hyp_.size();
    while (i > 0 || j > 0) {
      const std::size_t here = cost(i, j);
      if (i > 0 && j > 0 && ref_[i - 1] == hyp_[j - 1] && cost(i - 1, j - 1) == here) {
        --i, --j;
      } else if (i > 0 && j > 0 && cost(i - 1, j - 1) + 1 == here) {
        ++c[0], --i, --j;
      } else if (i > 0 && cost(i - 1, j) + 1 == here) {
        ++c[1], --i;
      } else {
        ++c[2], --j;
      }
    }
    return c;
  }

 private:
  std::size_t cost(std::size_t i, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    if (auto it = memo_.find({i, j}); it != memo_.end()) return it->second;
    const std::size_t sub = cost(i - 1, j - 1) + (ref_[i - 1] == hyp_[j - 1] ? 0 : 1);
    const std::size_t v = std::min({sub, cost(i - 1, j) + 1, cost(i, j - 1) + 1});
    memo_[{i, j}] = v;
    return v;
  }

  const std::vector<std::string>& ref_;
  const std::vector<std::string>& hyp_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo_;
};

}  // namespace cdasr::testing

#endif  // CDASR_TESTS_WER_ORACLE_H_
