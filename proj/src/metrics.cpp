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

#include "eat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "eat/error.hpp"

namespace eat {

double auc(std::span<const PredictionRecord> records) {
  std::size_t positives = 0;
  for (const auto& r : records) {
    if (r.y != 0 && r.y != 1) throw DomainError("auc: gold label must be 0 or 1");
    if (!std::isfinite(r.score)) throw DomainError("auc: non-finite score");
    positives += static_cast<std::size_t>(r.y);
  }
  const std::size_t negatives = records.size() - positives;
  if (positives == 0) throw DomainError("auc: no positive (y = 1) records");
  if (negatives == 0) throw DomainError("auc: no negative (y = 0) records");

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].score < records[b].score; });
  // Mann-Whitney U from midranks; all partial sums are exact halves.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t tied_positives = 0;
    while (j < order.size() && records[order[j]].score == records[order[i]].score) {
      tied_positives += static_cast<std::size_t>(records[order[j]].y);
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    positive_rank_sum += midrank * static_cast<double>(tied_positives);
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

namespace {

struct Rate {
  std::size_t positive = 0;
  std::size_t total = 0;
  double value() const { return static_cast<double>(positive) / static_cast<double>(total); }
};

// Positive prediction rate per z stratum, optionally restricted to gold `y`.
std::pair<Rate, Rate> rates_by_z(std::span<const PredictionRecord> records, int gold, const char* metric) {
  Rate by_z[2];
  for (const auto& r : records) {
    if (r.z != 0 && r.z != 1) throw DomainError(std::string(metric) + ": z must be 0 or 1");
    if (r.y_hat != 0 && r.y_hat != 1) throw DomainError(std::string(metric) + ": y_hat must be 0 or 1");
    if (gold >= 0 && r.y != gold) continue;
    by_z[r.z].total += 1;
    by_z[r.z].positive += static_cast<std::size_t>(r.y_hat);
  }
  for (int z = 0; z < 2; ++z) {
    if (by_z[z].total == 0) {
      std::string cell = "z = " + std::to_string(z);
      if (gold >= 0) cell += ", y = " + std::to_string(gold);
      throw DomainError(std::string(metric) + ": empty cell (" + cell + ")");
    }
  }
  return {by_z[0], by_z[1]};
}

double parity(std::span<const PredictionRecord> records, int gold, const char* metric) {
  const auto [z0, z1] = rates_by_z(records, gold, metric);
  return 1.0 - std::abs(z1.value() - z0.value());
}

}  // namespace

double demographic_parity(std::span<const PredictionRecord> records) {
  return parity(records, -1, "demographic_parity");
}

double eq_opp1(std::span<const PredictionRecord> records) { return parity(records, 1, "eq_opp1"); }

double eq_opp0(std::span<const PredictionRecord> records) { return parity(records, 0, "eq_opp0"); }

double eq_odd(std::span<const PredictionRecord> records) {
  return 0.5 * (eq_opp1(records) + eq_opp0(records));
}

double pinned_auc_ed(std::span<const PredictionRecord> records, const std::string& family) {
  std::map<std::string, std::vector<PredictionRecord>> by_tag;
  for (const auto& r : records) {
    for (const auto& s : r.subgroups) {
      if (s.family == family) by_tag[s.tag].push_back(r);
    }
  }
  if (by_tag.empty()) throw DomainError("pinned_auc_ed: no records tagged with family '" + family + "'");
  std::string offending;
  for (const auto& [tag, group] : by_tag) {
    const bool has_pos = std::any_of(group.begin(), group.end(), [](const auto& r) { return r.y == 1; });
    const bool has_neg = std::any_of(group.begin(), group.end(), [](const auto& r) { return r.y == 0; });
    if (!has_pos || !has_neg) offending += (offending.empty() ? "" : ", ") + tag;
  }
  if (!offending.empty()) {
    throw DomainError("pinned_auc_ed: family '" + family + "' has single-class subgroups: " + offending);
  }
  const double overall = auc(records);
  double total = 0.0;
  for (const auto& [tag, group] : by_tag) total += std::abs(overall - auc(group));
  return total;
}

void check_counterfactual_pairs(std::span<const PredictionRecord> records) {
  std::set<std::uint64_t> originals;
  for (const auto& r : records) {
    if (r.z == 0) originals.insert(r.pair_id);
  }
  for (const auto& r : records) {
    if (r.z == 1 && !originals.contains(r.pair_id)) {
      throw DomainError("counterfactual record with pair_id " + std::to_string(r.pair_id) +
                        " has no z = 0 twin");
    }
  }
}

FairnessReport fairness_report(std::span<const PredictionRecord> fairness,
                               std::span<const std::string> families,
                               std::span<const PredictionRecord> performance) {
  FairnessReport report;
  report.auc = auc(performance.empty() ? fairness : performance);
  report.dp = demographic_parity(fairness);
  report.eq_opp1 = eq_opp1(fairness);
  report.eq_opp0 = eq_opp0(fairness);
  report.eq_odd = 0.5 * (report.eq_opp1 + report.eq_opp0);
  for (const auto& family : families) report.pinned_auc_ed.emplace_back(family, pinned_auc_ed(fairness, family));
  return report;
}

nlohmann::ordered_json to_json(const FairnessReport& report) {
  nlohmann::ordered_json j;
  j["auc"] = report.auc;
  j["dp"] = report.dp;
  j["eq_opp1"] = report.eq_opp1;
  j["eq_opp0"] = report.eq_opp0;
  j["eq_odd"] = report.eq_odd;
  j["pinned_auc_ed"] = nlohmann::ordered_json::object();
  for (const auto& [family, value] : report.pinned_auc_ed) j["pinned_auc_ed"][family] = value;
  return j;
}

FairnessReport fairness_report_from_json(const nlohmann::ordered_json& j) {
  FairnessReport r;
  r.auc = j.at("auc").get<double>();
  r.dp = j.at("dp").get<double>();
  r.eq_opp1 = j.at("eq_opp1").get<double>();
  r.eq_opp0 = j.at("eq_opp0").get<double>();
  r.eq_odd = j.at("eq_odd").get<double>();
  for (const auto& [family, value] : j.at("pinned_auc_ed").items()) {
    r.pinned_auc_ed.emplace_back(family, value.get<double>());
  }
  return r;
}

}  // namespace eat
