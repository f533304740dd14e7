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

#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "eat/error.hpp"

namespace eat::cli {
namespace {

int method_order(const std::string& method) {
  if (method == "vanilla") return 0;
  if (method == "eat") return 1;
  if (method == "perturbation") return 2;
  return 3;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> families_of(const FairnessReport& r) {
  std::vector<std::string> out;
  for (const auto& [family, value] : r.pinned_auc_ed) out.push_back(family);
  return out;
}

}  // namespace

Report build_report(std::span<const ReportEntry> entries) {
  Report report;
  if (!entries.empty()) report.families = families_of(entries.front().test);

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries) {
    if (!seen.emplace(e.model, e.method).second) {
      throw ConfigError("report: more than one '" + e.method + "' run for model " + e.model);
    }
    if (families_of(e.test) != report.families) {
      throw ConfigError("report: runs disagree on identity families");
    }
    report.rows.push_back({e, 100.0 * (e.test.dp - e.vanilla.dp), 0.0});
  }

  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.entry.seed != b.entry.seed) return a.entry.seed < b.entry.seed;
    if (a.entry.model != b.entry.model) return a.entry.model < b.entry.model;
    return method_order(a.entry.method) < method_order(b.entry.method);
  });

  // Rank within each model by test DP, highest first.
  for (std::size_t begin = 0; begin < report.rows.size();) {
    std::size_t end = begin;
    while (end < report.rows.size() && report.rows[end].entry.model == report.rows[begin].entry.model) ++end;
    for (std::size_t i = begin; i < end; ++i) {
      std::size_t higher = 0, equal = 0;
      for (std::size_t j = begin; j < end; ++j) {
        const double other = report.rows[j].entry.test.dp, mine = report.rows[i].entry.test.dp;
        if (other > mine) ++higher;
        if (other == mine) ++equal;
      }
      report.rows[i].dp_rank = static_cast<double>(higher) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    begin = end;
  }

  std::map<std::pair<int, std::string>, MethodSummary> by_method;
  for (const auto& row : report.rows) {
    auto& s = by_method[{method_order(row.entry.method), row.entry.method}];
    if (s.seeds == 0) {
      s.method = row.entry.method;
      for (const auto& f : report.families) s.mean_pinned_auc_ed.emplace_back(f, 0.0);
    }
    ++s.seeds;
    s.mean_rank += row.dp_rank;
    s.mean_dp += row.entry.test.dp;
    s.mean_auc += row.entry.test.auc;
    s.mean_delta_dp += row.delta_dp;
    for (std::size_t f = 0; f < report.families.size(); ++f) {
      s.mean_pinned_auc_ed[f].second += row.entry.test.pinned_auc_ed[f].second;
    }
  }
  for (auto& [key, s] : by_method) {
    const double n = static_cast<double>(s.seeds);
    s.mean_rank /= n;
    s.mean_dp /= n;
    s.mean_auc /= n;
    s.mean_delta_dp /= n;
    for (auto& [f, v] : s.mean_pinned_auc_ed) v /= n;
    report.summary.push_back(s);
  }
  return report;
}

void write_report_csv(std::ostream& out, const Report& report) {
  out << "seed,model,method,setting,auc,dp,eq_opp1,eq_opp0,eq_odd";
  for (const auto& f : report.families) out << ",pinned_auc_ed_" << f;
  out << ",delta_dp_pp,dp_rank\n";
  for (const auto& row : report.rows) {
    const auto& t = row.entry.test;
    out << row.entry.seed << ',' << row.entry.model << ',' << row.entry.method << ',' << row.entry.setting << ','
        << full(t.auc) << ',' << full(t.dp) << ',' << full(t.eq_opp1) << ',' << full(t.eq_opp0) << ','
        << full(t.eq_odd);
    for (const auto& [f, v] : t.pinned_auc_ed) out << ',' << full(v);
    out << ',' << full(row.delta_dp) << ',' << full(row.dp_rank) << '\n';
  }
}

void write_report_markdown(std::ostream& out, const Report& report) {
  out << "# Fairness comparison\n\n";
  out << "Test-split metrics per trained model. DP rank 1 is the fairest method for that model.\n\n";
  out << "| seed | method | setting | AUC | DP | EqOpp1 | EqOpp0 | EqOdd |";
  for (const auto& f : report.families) out << " pinned AUC ED " << f << " |";
  out << " dDP (pp) | DP rank |\n|";
  for (std::size_t i = 0; i < 10 + report.families.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& row : report.rows) {
    const auto& t = row.entry.test;
    out << "| " << row.entry.seed << " | " << row.entry.method << " | " << row.entry.setting << " | "
        << fixed(t.auc, 4) << " | " << fixed(t.dp, 4) << " | " << fixed(t.eq_opp1, 4) << " | "
        << fixed(t.eq_opp0, 4) << " | " << fixed(t.eq_odd, 4) << " |";
    for (const auto& [f, v] : t.pinned_auc_ed) out << ' ' << fixed(v, 4) << " |";
    out << ' ' << fixed(row.delta_dp, 2) << " | " << fixed(row.dp_rank, 1) << " |\n";
  }
  out << "\n## Rank summary\n\n| method | seeds | mean DP rank | mean DP | mean AUC | mean dDP (pp) |";
  for (const auto& f : report.families) out << " mean pinned AUC ED " << f << " |";
  out << "\n|";
  for (std::size_t i = 0; i < 6 + report.families.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& s : report.summary) {
    out << "| " << s.method << " | " << s.seeds << " | " << fixed(s.mean_rank, 2) << " | " << fixed(s.mean_dp, 4)
        << " | " << fixed(s.mean_auc, 4) << " | " << fixed(s.mean_delta_dp, 2) << " |";
    for (const auto& [f, v] : s.mean_pinned_auc_ed) out << ' ' << fixed(v, 4) << " |";
    out << '\n';
  }
}

}  // namespace eat::cli
