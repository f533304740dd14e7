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

#include "eat/entropy.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "eat/numerics.hpp"
#include "eat/parallel.hpp"

namespace eat {

EntropyReport attention_entropy(const ForwardTrace& trace, std::size_t sentence_len) {
  if (trace.attention.empty()) throw DomainError("attention_entropy: trace has no layers");
  const auto width = static_cast<std::size_t>(trace.attention.front().front().cols());
  if (sentence_len < 1 || sentence_len > width) {
    throw DomainError("attention_entropy: sentence length " + std::to_string(sentence_len) +
                      " outside [1, " + std::to_string(width) + "]");
  }
  const auto n = static_cast<Eigen::Index>(sentence_len);
  EntropyReport report;
  report.sentence_len = sentence_len;
  std::vector<double> averaged(sentence_len);
  std::vector<double> probs(sentence_len);
  const std::vector<bool> live(sentence_len, true);
  for (const auto& heads : trace.attention) {
    const double num_heads = static_cast<double>(heads.size());
    double layer_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (const auto& map : heads) s += map(i, j);
        averaged[j] = s / num_heads;
      }
      detail::masked_softmax(std::span<const double>(averaged), live, std::span<double>(probs));
      layer_sum += shannon_entropy(std::span<const double>(probs));
    }
    report.per_layer.push_back(layer_sum / static_cast<double>(n));
  }
  for (double h : report.per_layer) report.total += h;
  return report;
}

EntropyReport attention_entropy(const std::optional<ForwardTrace>& trace, std::size_t sentence_len) {
  if (!trace) throw DomainError("attention_entropy: forward pass was run without capture");
  return attention_entropy(*trace, sentence_len);
}

std::size_t baseline_index(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 1.0) return i;
  }
  throw ConfigError("beta grid must contain 1.0 as the unmodulated baseline");
}

std::vector<EntropySweepRow> entropy_sweep(const ModelWeights& weights, std::span<const Example> sample,
                                           std::span<const double> grid, std::size_t threads) {
  if (sample.empty()) throw DomainError("entropy_sweep: empty sample");
  const std::size_t base = baseline_index(grid);
  std::vector<EntropySweepRow> rows(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const Temperature temperature(grid[b]);
    std::vector<double> totals(sample.size());
    parallel_for(sample.size(), threads, [&](std::size_t i) {
      const auto result = forward(sample[i].tokens, weights, temperature, true);
      totals[i] = attention_entropy(result.trace, sample[i].tokens.size()).total;
    });
    double sum = 0.0;
    for (double t : totals) sum += t;
    rows[b].beta = grid[b];
    rows[b].mean_total_entropy = sum / static_cast<double>(sample.size());
  }
  const double reference = rows[base].mean_total_entropy;
  for (auto& row : rows) {
    if (reference == 0.0) {
      row.pct_change = row.mean_total_entropy == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    } else {
      row.pct_change = 100.0 * (row.mean_total_entropy - reference) / reference;
    }
  }
  return rows;
}

void write_entropy_csv(std::ostream& out, std::span<const EntropySweepRow> rows) {
  out << "beta,mean_total_entropy_nats,pct_change_vs_beta1\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(6);
  for (const auto& row : rows) {
    out << row.beta << ',' << row.mean_total_entropy << ',' << row.pct_change << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace eat
