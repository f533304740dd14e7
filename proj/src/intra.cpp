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

#include "eat/intra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "eat/entropy.hpp"
#include "eat/parallel.hpp"

namespace eat {

using nlohmann::ordered_json;

std::vector<PredictionRecord> score_examples(const ModelWeights& weights, std::span<const Example> examples,
                                             Temperature temperature, std::size_t threads) {
  std::vector<PredictionRecord> records(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    const Example& e = examples[i];
    const double score = forward(e.tokens, weights, temperature).positive_probability();
    records[i] = {score, predict(score), e.label, e.z, e.pair_id, e.subgroups};
  });
  return records;
}

Evaluation evaluate_at_beta(const ModelWeights& weights, double beta, const EvalSet& eval_set,
                            std::size_t threads) {
  const Temperature temperature(beta);
  Evaluation out;
  out.fairness_records = score_examples(weights, eval_set.fairness, temperature, threads);
  check_counterfactual_pairs(out.fairness_records);
  if (!eval_set.performance.empty()) {
    out.performance_records = score_examples(weights, eval_set.performance, temperature, threads);
  }
  out.report = fairness_report(out.fairness_records, eval_set.families, out.performance_records);
  return out;
}

Regime regime_for(double beta) {
  if (beta < 1.0) return Regime::kMaximization;
  if (beta > 1.0) return Regime::kMinimization;
  return Regime::kNone;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kMaximization: return "maximization";
    case Regime::kMinimization: return "minimization";
    case Regime::kNone: return "none";
  }
  return "none";
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

void SearchConfig::validate() const {
  if (beta_grid.empty()) throw ConfigError("SearchConfig: empty beta grid");
  for (double b : beta_grid) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("SearchConfig: beta values must be finite and >= 0");
  }
  baseline_index(beta_grid);
  if (!(max_auc_degradation > 0.0 && max_auc_degradation < 1.0)) {
    throw ConfigError("SearchConfig: max_auc_degradation must lie in (0, 1)");
  }
  if (threads < 1) throw ConfigError("SearchConfig: threads must be >= 1");
}

SearchConfig SearchConfig::from_json(const ordered_json& j) {
  SearchConfig c;
  try {
    if (j.contains("beta_grid")) c.beta_grid = j.at("beta_grid").get<std::vector<double>>();
    c.max_auc_degradation = j.value("max_auc_degradation", c.max_auc_degradation);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("SearchConfig: ") + e.what());
  }
  return c;
}

ordered_json SearchConfig::to_json() const {
  ordered_json j;
  j["beta_grid"] = beta_grid;
  j["max_auc_degradation"] = max_auc_degradation;
  return j;
}

SearchResult select_beta(std::vector<SearchRow> rows, double max_degradation) {
  std::vector<double> grid;
  for (const auto& r : rows) grid.push_back(r.beta);
  const std::size_t base = baseline_index(grid);
  SearchResult result;
  result.baseline_auc = rows[base].auc;
  const double floor = (1.0 - max_degradation) * result.baseline_auc;
  std::size_t best = base;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].feasible = i == base || rows[i].auc >= floor;
    if (!rows[i].feasible) continue;
    const double dp = rows[i].dp;
    const double best_dp = rows[best].dp;
    const double dist = std::abs(rows[i].beta - 1.0);
    const double best_dist = std::abs(rows[best].beta - 1.0);
    if (dp > best_dp || (dp == best_dp && (dist < best_dist || (dist == best_dist && rows[i].beta < rows[best].beta)))) {
      best = i;
    }
  }
  result.best_beta = rows[best].beta;
  result.regime = regime_for(result.best_beta);
  result.rows = std::move(rows);
  return result;
}

SearchResult eat_search(const ModelWeights& weights, const EvalSet& validation, const SearchConfig& config) {
  config.validate();
  std::vector<SearchRow> rows;
  rows.reserve(config.beta_grid.size());
  for (double beta : config.beta_grid) {
    const Evaluation eval = evaluate_at_beta(weights, beta, validation, config.threads);
    rows.push_back({beta, eval.report.auc, eval.report.dp, false});
  }
  return select_beta(std::move(rows), config.max_auc_degradation);
}

ordered_json to_json(const SearchResult& result) {
  ordered_json j;
  j["best_beta"] = result.best_beta;
  j["regime"] = to_string(result.regime);
  j["baseline_auc"] = result.baseline_auc;
  j["rows"] = ordered_json::array();
  for (const auto& r : result.rows) {
    j["rows"].push_back({{"beta", r.beta}, {"auc", r.auc}, {"dp", r.dp}, {"feasible", r.feasible}});
  }
  return j;
}

ModelWeights random_perturbation(const ModelWeights& weights, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError("random_perturbation: sigma must be finite and >= 0");
  }
  ModelWeights out = weights;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.for_each_tensor([&](const std::string&, MatrixXd& t) {
    double sum_sq = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) sum_sq += t.data()[i] * t.data()[i];
    const double rms = std::sqrt(sum_sq / static_cast<double>(t.size()));
    const double scale = sigma * rms;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double noise = normal(rng);
      if (scale > 0.0) t.data()[i] += scale * noise;
    }
  });
  return out;
}

std::uint64_t perturbation_seed(std::uint64_t base_seed, std::size_t sigma_index, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(sigma_index), static_cast<std::uint32_t>(trial)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

PerturbSearchResult perturb_search(const ModelWeights& weights, const EvalSet& validation,
                                   std::span<const double> sigma_grid, std::size_t trials,
                                   const SearchConfig& config, std::uint64_t base_seed) {
  if (trials < 1) throw ConfigError("perturb_search: trials must be >= 1");
  for (double s : sigma_grid) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("perturb_search: sigma values must be finite and >= 0");
  }
  PerturbSearchResult result;
  const Evaluation base = evaluate_at_beta(weights, 1.0, validation, config.threads);
  result.baseline_auc = base.report.auc;
  result.candidates.push_back({0.0, 0, 0, base.report.auc, base.report.dp, true});
  for (std::size_t s = 0; s < sigma_grid.size(); ++s) {
    if (sigma_grid[s] == 0.0) continue;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::uint64_t seed = perturbation_seed(base_seed, s, t);
      const ModelWeights perturbed = random_perturbation(weights, sigma_grid[s], seed);
      const Evaluation eval = evaluate_at_beta(perturbed, 1.0, validation, config.threads);
      result.candidates.push_back({sigma_grid[s], t, seed, eval.report.auc, eval.report.dp, false});
    }
  }
  const double floor = (1.0 - config.max_auc_degradation) * result.baseline_auc;
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.candidates.size(); ++i) {
    auto& c = result.candidates[i];
    c.feasible = c.auc >= floor;
    if (c.feasible && c.dp > result.candidates[best].dp) best = i;
  }
  result.best_sigma = result.candidates[best].sigma;
  result.best_seed = result.candidates[best].seed;
  result.best_weights = random_perturbation(weights, result.best_sigma, result.best_seed);
  return result;
}

ordered_json to_json(const PerturbSearchResult& result) {
  ordered_json j;
  j["best_sigma"] = result.best_sigma;
  j["best_seed"] = result.best_seed;
  j["baseline_auc"] = result.baseline_auc;
  j["candidates"] = ordered_json::array();
  for (const auto& c : result.candidates) {
    j["candidates"].push_back({{"sigma", c.sigma},
                               {"trial", c.trial},
                               {"seed", c.seed},
                               {"auc", c.auc},
                               {"dp", c.dp},
                               {"feasible", c.feasible}});
  }
  return j;
}

}  // namespace eat
