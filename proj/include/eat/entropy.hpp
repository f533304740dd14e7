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

// Attention entropy of a captured forward pass: head-averaged attention is
// re-normalized with a softmax over the true positions, each row's Shannon
// entropy (nats) is averaged over tokens per layer, and layers are summed.

#ifndef EAT_ENTROPY_HPP_
#define EAT_ENTROPY_HPP_

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "eat/corpus.hpp"
#include "eat/model.hpp"

namespace eat {

struct EntropyReport {
  std::vector<double> per_layer;  // H^l, nats
  double total = 0.0;             // sum over layers
  std::size_t sentence_len = 0;
};

EntropyReport attention_entropy(const ForwardTrace& trace, std::size_t sentence_len);
// Throws DomainError when the trace was not captured.
EntropyReport attention_entropy(const std::optional<ForwardTrace>& trace, std::size_t sentence_len);

struct EntropySweepRow {
  double beta = 1.0;
  double mean_total_entropy = 0.0;  // nats, averaged over the sample
  double pct_change = 0.0;          // relative to the beta = 1 row, percent
};

// Mean total attention entropy over `sample` for every beta in `grid`
// (which must contain 1). Rows follow grid order.
std::vector<EntropySweepRow> entropy_sweep(const ModelWeights& weights, std::span<const Example> sample,
                                           std::span<const double> grid, std::size_t threads = 1);

// CSV with header beta,mean_total_entropy_nats,pct_change_vs_beta1.
void write_entropy_csv(std::ostream& out, std::span<const EntropySweepRow> rows);

// Index of the entry equal to 1 in `grid`; throws ConfigError if absent.
std::size_t baseline_index(std::span<const double> grid);

}  // namespace eat

#endif  // EAT_ENTROPY_HPP_
