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

// Reverse-mode gradients, a finite-difference checker and the training loop
// for the toy classifier. Training always runs with unmodulated attention.

#ifndef EAT_TRAIN_HPP_
#define EAT_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eat/corpus.hpp"
#include "eat/model.hpp"

namespace eat {

enum class OptimizerKind { kGradientDescent, kAdam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  double learning_rate = 3e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;  // batch order
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double init_stddev = 0.02;
  std::size_t threads = 1;

  void validate() const;
  static TrainConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

// Counts losses whose gold probability had to be clamped.
struct LossStats {
  std::size_t clamped = 0;
};

inline constexpr double kMinGoldProbability = 1e-12;

// -log p(gold) in nats; p(gold) is clamped below at kMinGoldProbability.
double cross_entropy(const VectorXd& probs, int gold, LossStats* stats = nullptr);

struct BackwardResult {
  double loss = 0.0;
  VectorXd probs;
  Gradients gradients;
};

// Exact gradients of cross_entropy(forward(tokens), gold) at beta = 1.
BackwardResult backward(std::span<const TokenId> tokens, int gold, const ModelWeights& weights);

struct GradCheckEntry {
  std::string tensor;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  // Entries above tolerance, worst first.
  std::vector<GradCheckEntry> offenders;

  bool passed() const { return offenders.empty(); }
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  // 0 checks every parameter, otherwise a seeded sample of this size.
  std::size_t max_parameters = 0;
  std::uint64_t seed = 0;
  double step = 1e-5;
  double absolute_floor = 1e-6;
};

// Compares analytic gradients with central differences. The relative error
// is |a - n| / max(|a|, |n|, absolute_floor). Never throws on mismatch.
GradCheckReport grad_check(const ModelWeights& weights, const Example& sample,
                           const GradCheckOptions& options = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_auc = 0.0;
};

nlohmann::ordered_json to_json(const EpochRecord& record);

struct FitResult {
  ModelWeights weights;
  std::vector<EpochRecord> log;
  bool diverged = false;
  std::size_t clamped_losses = 0;
};

// Trains from a seeded Gaussian initialization. On a non-finite loss the
// weights from the end of the last finite epoch are returned with
// diverged = true.
FitResult fit(std::span<const Example> corpus, const TrainConfig& config, std::uint64_t init_seed,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace eat

#endif  // EAT_TRAIN_HPP_
