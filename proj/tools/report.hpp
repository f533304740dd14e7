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

#ifndef EAT_TOOLS_REPORT_HPP_
#define EAT_TOOLS_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eat/metrics.hpp"

namespace eat::cli {

// One method evaluated on one trained model.
struct ReportEntry {
  std::uint64_t seed = 0;   // corpus seed, display only
  std::string model;        // identifies the trained model the method was applied to
  std::string method;       // vanilla, eat or perturbation
  std::string setting;      // e.g. "beta=0.4"
  FairnessReport test;
  FairnessReport vanilla;   // the same model at beta = 1
};

struct ReportRow {
  ReportEntry entry;
  double delta_dp = 0.0;  // percentage points against the vanilla report
  double dp_rank = 0.0;   // 1 is fairest within the model; ties share the mean rank
};

struct MethodSummary {
  std::string method;
  std::size_t seeds = 0;
  double mean_rank = 0.0;
  double mean_dp = 0.0;
  double mean_auc = 0.0;
  double mean_delta_dp = 0.0;
  std::vector<std::pair<std::string, double>> mean_pinned_auc_ed;
};

struct Report {
  std::vector<std::string> families;
  std::vector<ReportRow> rows;            // ordered by seed, model, method
  std::vector<MethodSummary> summary;     // vanilla, eat, perturbation, then others
};

// Throws ConfigError on duplicate (model, method) entries or inconsistent families.
Report build_report(std::span<const ReportEntry> entries);

void write_report_csv(std::ostream& out, const Report& report);
void write_report_markdown(std::ostream& out, const Report& report);

}  // namespace eat::cli

#endif  // EAT_TOOLS_REPORT_HPP_
