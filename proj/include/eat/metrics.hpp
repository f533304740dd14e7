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

// Performance and group-fairness metrics over scored predictions.
//
// Fairness metrics use hard labels y_hat; z = 0 marks examples with their
// original gendered words and z = 1 their gender-flipped twins.

#ifndef EAT_METRICS_HPP_
#define EAT_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eat/subgroup.hpp"

namespace eat {

struct PredictionRecord {
  double score = 0.0;  // probability of class 1
  int y_hat = 0;
  int y = 0;
  int z = 0;
  std::uint64_t pair_id = 0;
  std::vector<Subgroup> subgroups;
};

// Probability that a random positive outscores a random negative, ties
// credited 1/2. Throws DomainError if either class is absent.
double auc(std::span<const PredictionRecord> records);

// 1 - |p(y_hat = 1 | z = 1) - p(y_hat = 1 | z = 0)|.
double demographic_parity(std::span<const PredictionRecord> records);

// Same as demographic_parity within the gold class y = 1 (resp. y = 0).
double eq_opp1(std::span<const PredictionRecord> records);
double eq_opp0(std::span<const PredictionRecord> records);
double eq_odd(std::span<const PredictionRecord> records);

// Sum over tags t of `family` of |AUC - AUC_t|, with AUC_t restricted to
// records tagged t. Throws DomainError listing every tag whose records miss
// a gold class.
double pinned_auc_ed(std::span<const PredictionRecord> records, const std::string& family);

// Throws DomainError unless every z = 1 record has a z = 0 twin with the same
// pair_id.
void check_counterfactual_pairs(std::span<const PredictionRecord> records);

struct FairnessReport {
  double auc = 0.0;
  double dp = 0.0;
  double eq_opp1 = 0.0;
  double eq_opp0 = 0.0;
  double eq_odd = 0.0;
  std::vector<std::pair<std::string, double>> pinned_auc_ed;  // in family order

  bool operator==(const FairnessReport&) const = default;
};

// Fairness metrics over `fairness` records (the counterfactual template
// set). AUC is taken over `performance` records when given, otherwise over
// `fairness`.
FairnessReport fairness_report(std::span<const PredictionRecord> fairness,
                               std::span<const std::string> families,
                               std::span<const PredictionRecord> performance = {});

// {auc, dp, eq_opp1, eq_opp0, eq_odd, pinned_auc_ed: {family: value}}
nlohmann::ordered_json to_json(const FairnessReport& report);
FairnessReport fairness_report_from_json(const nlohmann::ordered_json& j);

}  // namespace eat

#endif  // EAT_METRICS_HPP_
