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

// Intra-processing mitigation: attention temperature search and the random
// weight perturbation baseline, both selected on validation demographic
// parity under a bounded relative AUC loss.

#ifndef EAT_INTRA_HPP_
#define EAT_INTRA_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eat/corpus.hpp"
#include "eat/metrics.hpp"
#include "eat/model.hpp"

namespace eat {

// Performance examples feed AUC; counterfactual templates feed the fairness
// metrics.
struct EvalSet {
  std::vector<Example> performance;
  std::vector<Example> fairness;
  std::vector<std::string> families;
};

struct Evaluation {
  FairnessReport report;
  std::vector<PredictionRecord> performance_records;
  std::vector<PredictionRecord> fairness_records;
};

std::vector<PredictionRecord> score_examples(const ModelWeights& weights, std::span<const Example> examples,
                                             Temperature temperature, std::size_t threads = 1);

Evaluation evaluate_at_beta(const ModelWeights& weights, double beta, const EvalSet& eval_set,
                            std::size_t threads = 1);

enum class Regime { kMaximization, kMinimization, kNone };

// beta < 1 raises attention entropy, beta > 1 lowers it.
Regime regime_for(double beta);
std::string to_string(Regime regime);

// {0.0, 0.1, ..., 10.0}
std::vector<double> default_beta_grid();

struct SearchConfig {
  std::vector<double> beta_grid = default_beta_grid();
  double max_auc_degradation = 0.03;
  std::size_t threads = 1;

  void validate() const;
  static SearchConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

struct SearchRow {
  double beta = 1.0;
  double auc = 0.0;
  double dp = 0.0;
  bool feasible = false;
};

struct SearchResult {
  double best_beta = 1.0;
  Regime regime = Regime::kNone;
  double baseline_auc = 0.0;
  std::vector<SearchRow> rows;  // grid order
};

// Marks rows with auc >= (1 - max_degradation) * auc(beta = 1) feasible and
// returns the feasible beta of highest DP. Ties go to the beta closest to 1,
// then to the smaller beta. Row auc/dp values must already be filled in.
SearchResult select_beta(std::vector<SearchRow> rows, double max_degradation);

SearchResult eat_search(const ModelWeights& weights, const EvalSet& validation, const SearchConfig& config);

// {best_beta, regime, baseline_auc, rows: [{beta, auc, dp, feasible}]}
nlohmann::ordered_json to_json(const SearchResult& result);

// Adds N(0, (sigma * rms(tensor))^2) noise to every entry of every tensor.
ModelWeights random_perturbation(const ModelWeights& weights, double sigma, std::uint64_t seed);

struct PerturbCandidate {
  double sigma = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double auc = 0.0;
  double dp = 0.0;
  bool feasible = false;
};

struct PerturbSearchResult {
  double best_sigma = 0.0;
  std::uint64_t best_seed = 0;
  double baseline_auc = 0.0;
  std::vector<PerturbCandidate> candidates;  // baseline first, then sigma-major
  ModelWeights best_weights;
};

// Seed of trial `trial` at sigma index `sigma_index` under `base_seed`.
std::uint64_t perturbation_seed(std::uint64_t base_seed, std::size_t sigma_index, std::size_t trial);

// Evaluates the unperturbed model once and `trials` perturbations for every
// non-zero sigma; selection follows select_beta's feasibility rule, ties to
// the earlier candidate.
PerturbSearchResult perturb_search(const ModelWeights& weights, const EvalSet& validation,
                                   std::span<const double> sigma_grid, std::size_t trials,
                                   const SearchConfig& config, std::uint64_t base_seed);

nlohmann::ordered_json to_json(const PerturbSearchResult& result);

}  // namespace eat

#endif  // EAT_INTRA_HPP_
