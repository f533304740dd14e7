/*
 * Copyright 2026 The EAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Brute-force reference computations used only by tests. Nothing here calls
// into the library code paths it is compared against.

#ifndef EAT_TESTS_ORACLES_HPP_
#define EAT_TESTS_ORACLES_HPP_

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eat/metrics.hpp"

namespace eat::oracle {

// O(n^2) pairwise AUC: wins + ties / 2 over positive-negative pairs.
inline double pairwise_auc(std::span<const PredictionRecord> records) {
  double credit = 0.0;
  double pairs = 0.0;
  for (const auto& p : records) {
    if (p.y != 1) continue;
    for (const auto& n : records) {
      if (n.y != 0) continue;
      pairs += 1.0;
      if (p.score > n.score) credit += 1.0;
      else if (p.score == n.score) credit += 0.5;
    }
  }
  return credit / pairs;
}

// p(y_hat = 1 | z, optionally y) by counting.
inline double positive_rate(std::span<const PredictionRecord> records, int z, int y = -1) {
  double hits = 0.0;
  double total = 0.0;
  for (const auto& r : records) {
    if (r.z != z || (y >= 0 && r.y != y)) continue;
    total += 1.0;
    hits += r.y_hat;
  }
  return hits / total;
}

inline double counted_parity(std::span<const PredictionRecord> records, int y = -1) {
  return 1.0 - std::abs(positive_rate(records, 1, y) - positive_rate(records, 0, y));
}

inline double pinned_ed(std::span<const PredictionRecord> records, const std::string& family,
                        const std::vector<std::string>& tags) {
  const double overall = pairwise_auc(records);
  double total = 0.0;
  for (const auto& tag : tags) {
    std::vector<PredictionRecord> group;
    for (const auto& r : records) {
      for (const auto& s : r.subgroups) {
        if (s.family == family && s.tag == tag) group.push_back(r);
      }
    }
    total += std::abs(overall - pairwise_auc(group));
  }
  return total;
}

// Randomized small record set with coarse scores (frequent ties), both z
// strata, both gold classes within each stratum, and every tag of a
// three-tag family carrying both classes.
inline std::vector<PredictionRecord> random_records(std::mt19937_64& rng, std::size_t pairs) {
  std::uniform_int_distribution<int> coarse(0, 8);
  std::uniform_int_distribution<int> bit(0, 1);
  const std::vector<std::string> tags = {"a", "b", "c"};
  std::vector<PredictionRecord> out;
  for (std::size_t p = 0; p < pairs; ++p) {
    const int y = static_cast<int>(p % 2);
    const std::string& tag = tags[(p / 2) % 3];
    for (int z = 0; z < 2; ++z) {
      PredictionRecord r;
      r.score = coarse(rng) / 8.0;
      r.y_hat = bit(rng);
      r.y = y;
      r.z = z;
      r.pair_id = p;
      r.subgroups = {{"fam", tag}};
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace eat::oracle

#endif  // EAT_TESTS_ORACLES_HPP_
