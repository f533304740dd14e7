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

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "eat/train.hpp"
#include "gtest/gtest.h"
#include "reference_forward.hpp"

namespace eat {
namespace {

std::vector<SearchRow> table(std::vector<double> betas, std::vector<double> aucs, std::vector<double> dps) {
  std::vector<SearchRow> rows;
  for (std::size_t i = 0; i < betas.size(); ++i) rows.push_back({betas[i], aucs[i], dps[i], false});
  return rows;
}

// Default corpus, seed 0, trained with the default recipe; shared by the tests below.
class TrainedModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const Lexicon lex = Lexicon::builtin();
    const CorpusConfig c;
    const auto corpus = gen_train_corpus(c, lex);
    const auto parts = split(corpus, c.split_ratios, c.seed);
    const auto templates = gen_eval_templates(c, lex);
    auto [tv, tt] = split_pairs(templates, c.seed);
    validation_ = new EvalSet{parts.validation, std::move(tv), {"religion", "race"}};
    TrainConfig t;
    t.model.vocab_size = Vocabulary(lex, c.task_tokens, c.noise_tokens).size();
    t.model.max_len = c.max_len;
    weights_ = new ModelWeights(fit(parts.train, t, 0).weights);
  }
  static void TearDownTestSuite() {
    delete validation_;
    delete weights_;
  }
  static EvalSet* validation_;
  static ModelWeights* weights_;
};
EvalSet* TrainedModel::validation_ = nullptr;
ModelWeights* TrainedModel::weights_ = nullptr;

TEST(Regime, Labels) {
  EXPECT_EQ(regime_for(0.4), Regime::kMaximization);
  EXPECT_EQ(regime_for(1.0), Regime::kNone);
  EXPECT_EQ(regime_for(2.5), Regime::kMinimization);
  EXPECT_EQ(to_string(Regime::kMaximization), "maximization");
  EXPECT_EQ(to_string(Regime::kMinimization), "minimization");
  EXPECT_EQ(to_string(Regime::kNone), "none");
}

TEST(DefaultGrid, HundredOnePointsWithUnitTemperature) {
  const auto g = default_beta_grid();
  ASSERT_EQ(g.size(), 101u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 10.0);
  EXPECT_EQ(g[10], 1.0);
  EXPECT_EQ(g[4], 0.4);
}

TEST(SelectBeta, ConstantDpKeepsUnitTemperature) {
  const auto r = select_beta(table({0.0, 0.5, 1.0, 2.0}, {0.9, 0.9, 0.9, 0.9}, {0.7, 0.7, 0.7, 0.7}), 0.03);
  EXPECT_EQ(r.best_beta, 1.0);
  EXPECT_EQ(r.regime, Regime::kNone);
}

TEST(SelectBeta, PlantedPeakInsideFeasibleSet) {
  const auto r = select_beta(table({0.0, 0.4, 1.0, 3.0}, {0.95, 0.95, 0.96, 0.80}, {0.6, 0.9, 0.5, 0.99}), 0.03);
  EXPECT_EQ(r.best_beta, 0.4);
  EXPECT_EQ(r.regime, Regime::kMaximization);
  EXPECT_EQ(r.baseline_auc, 0.96);
  EXPECT_TRUE(r.rows[1].feasible);
  EXPECT_FALSE(r.rows[3].feasible);
}

TEST(SelectBeta, FeasibilityBoundaryIsInclusive) {
  const double floor = (1.0 - 0.03) * 0.9;
  const auto r = select_beta(table({1.0, 2.0}, {0.9, floor}, {0.5, 0.6}), 0.03);
  EXPECT_TRUE(r.rows[1].feasible);
  EXPECT_EQ(r.best_beta, 2.0);
  EXPECT_EQ(r.regime, Regime::kMinimization);
}

TEST(SelectBeta, TieBreakClosestToOneThenSmaller) {
  auto r = select_beta(table({0.2, 0.8, 1.0, 1.3}, {0.9, 0.9, 0.9, 0.9}, {0.8, 0.8, 0.5, 0.8}), 0.03);
  EXPECT_EQ(r.best_beta, 0.8);
  r = select_beta(table({0.5, 1.0, 1.5}, {0.9, 0.9, 0.9}, {0.8, 0.5, 0.8}), 0.03);
  EXPECT_EQ(r.best_beta, 0.5);
  r = select_beta(table({1.5, 1.0, 0.5}, {0.9, 0.9, 0.9}, {0.8, 0.5, 0.8}), 0.03);
  EXPECT_EQ(r.best_beta, 0.5);
}

TEST(SelectBeta, RequiresUnitTemperature) {
  EXPECT_THROW(select_beta(table({0.5, 2.0}, {0.9, 0.9}, {0.8, 0.8}), 0.03), ConfigError);
}

TEST(SearchConfig, ValidationAndJson) {
  SearchConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(SearchConfig::from_json(c.to_json()).to_json(), c.to_json());
  c.beta_grid = {0.0, 2.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = SearchConfig{};
  c.max_auc_degradation = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.max_auc_degradation = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SearchConfig{};
  c.beta_grid.push_back(-1.0);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RandomPerturbation, ZeroSigmaAndSeedDeterminism) {
  ModelConfig mc;
  const ModelWeights w = ModelWeights::gaussian(mc, 1, 0.1);
  EXPECT_TRUE(random_perturbation(w, 0.0, 99) == w);
  EXPECT_TRUE(random_perturbation(w, 0.05, 3) == random_perturbation(w, 0.05, 3));
  EXPECT_FALSE(random_perturbation(w, 0.05, 3) == random_perturbation(w, 0.05, 4));
  EXPECT_THROW(random_perturbation(w, -0.1, 0), DomainError);
}

TEST(RandomPerturbation, NoiseScalesWithTensorRms) {
  ModelConfig mc;
  mc.vocab_size = 4000;
  const ModelWeights w = ModelWeights::gaussian(mc, 2, 0.5);
  const ModelWeights p = random_perturbation(w, 0.1, 5);
  const MatrixXd diff = p.token_embedding - w.token_embedding;
  const double rms = std::sqrt(w.token_embedding.squaredNorm() / static_cast<double>(w.token_embedding.size()));
  const double noise = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
  EXPECT_NEAR(noise / rms, 0.1, 0.002);
  // All-zero tensors have zero RMS and stay zero.
  EXPECT_TRUE(p.classifier_bias.isZero(0.0));
}

TEST(PerturbationSeed, DistinctPerCandidate) {
  std::set<std::uint64_t> seeds;
  for (std::size_t s = 0; s < 10; ++s) {
    for (std::size_t t = 0; t < 10; ++t) seeds.insert(perturbation_seed(7, s, t));
  }
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(perturbation_seed(7, 3, 4), perturbation_seed(7, 3, 4));
}

TEST_F(TrainedModel, UnitTemperatureEqualsUnmodifiedModel) {
  const Evaluation e = evaluate_at_beta(*weights_, 1.0, *validation_);
  std::vector<PredictionRecord> fair, perf;
  for (const auto& x : validation_->fairness) {
    const double s = forward(x.tokens, *weights_).positive_probability();
    fair.push_back({s, predict(s), x.label, x.z, x.pair_id, x.subgroups});
  }
  for (const auto& x : validation_->performance) {
    const double s = forward(x.tokens, *weights_).positive_probability();
    perf.push_back({s, predict(s), x.label, x.z, x.pair_id, x.subgroups});
  }
  const FairnessReport direct = fairness_report(fair, validation_->families, perf);
  EXPECT_NEAR(e.report.auc, direct.auc, 1e-12);
  EXPECT_NEAR(e.report.dp, direct.dp, 1e-12);
  EXPECT_NEAR(e.report.eq_odd, direct.eq_odd, 1e-12);
  EXPECT_EQ(e.report, direct);
}

TEST_F(TrainedModel, DoubledTemperatureMatchesIndependentForward) {
  const Evaluation e = evaluate_at_beta(*weights_, 2.0, *validation_);
  std::vector<PredictionRecord> fair, perf;
  for (const auto& x : validation_->fairness) {
    const double s = reference::positive_probability(reference::reference_forward(x.tokens, *weights_, 2.0).logits);
    fair.push_back({s, predict(s), x.label, x.z, x.pair_id, x.subgroups});
  }
  for (const auto& x : validation_->performance) {
    const double s = reference::positive_probability(reference::reference_forward(x.tokens, *weights_, 2.0).logits);
    perf.push_back({s, predict(s), x.label, x.z, x.pair_id, x.subgroups});
  }
  const FairnessReport ref = fairness_report(fair, validation_->families, perf);
  EXPECT_NEAR(e.report.auc, ref.auc, 1e-12);
  EXPECT_NEAR(e.report.dp, ref.dp, 1e-12);
  EXPECT_NEAR(e.report.eq_opp1, ref.eq_opp1, 1e-12);
  EXPECT_NEAR(e.report.eq_opp0, ref.eq_opp0, 1e-12);
  for (std::size_t f = 0; f < ref.pinned_auc_ed.size(); ++f) {
    EXPECT_NEAR(e.report.pinned_auc_ed[f].second, ref.pinned_auc_ed[f].second, 1e-12);
  }
}

TEST_F(TrainedModel, ConstantModelIsPerfectlyFairAndUninformative) {
  ModelWeights w = *weights_;
  w.classifier.setZero();
  const Evaluation e = evaluate_at_beta(w, 1.0, *validation_);
  EXPECT_EQ(e.report.dp, 1.0);
  EXPECT_EQ(e.report.auc, 0.5);
}

// Regression fixture: default corpus and recipe at seed 0.
TEST_F(TrainedModel, SearchMovesAwayFromUnitTemperature) {
  SearchConfig c;
  const SearchResult r = eat_search(*weights_, *validation_, c);
  ASSERT_EQ(r.rows.size(), 101u);
  const SearchRow& base = r.rows[10];
  ASSERT_EQ(base.beta, 1.0);
  EXPECT_TRUE(base.feasible);
  EXPECT_NE(r.best_beta, 1.0);
  EXPECT_EQ(r.regime, regime_for(r.best_beta));
  const auto best = std::find_if(r.rows.begin(), r.rows.end(), [&](const SearchRow& x) { return x.beta == r.best_beta; });
  EXPECT_TRUE(best->feasible);
  EXPECT_GT(best->dp, base.dp);
  for (const auto& row : r.rows) {
    if (row.feasible) {
      EXPECT_LE(row.dp, best->dp);
    }
  }
  RecordProperty("best_beta", std::to_string(r.best_beta));
  RecordProperty("validation_delta_dp", std::to_string(best->dp - base.dp));
}

TEST_F(TrainedModel, SearchIsPureAndThreadIndependent) {
  SearchConfig c;
  c.beta_grid = {0.0, 0.5, 1.0, 4.0};
  const auto a = to_json(eat_search(*weights_, *validation_, c));
  c.threads = 3;
  const auto b = to_json(eat_search(*weights_, *validation_, c));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST_F(TrainedModel, PerturbSearchCountsAndBaseline) {
  SearchConfig c;
  const std::vector<double> zero = {0.0};
  const auto base = perturb_search(*weights_, *validation_, zero, 3, c, 1);
  EXPECT_EQ(base.candidates.size(), 1u);
  EXPECT_TRUE(base.best_weights == *weights_);
  EXPECT_EQ(base.best_sigma, 0.0);

  const std::vector<double> grid = {0.0, 0.01, 0.05};
  const auto r = perturb_search(*weights_, *validation_, grid, 3, c, 1);
  EXPECT_EQ(r.candidates.size(), 7u);
  EXPECT_TRUE(r.candidates.front().feasible);
  const auto again = perturb_search(*weights_, *validation_, grid, 3, c, 1);
  EXPECT_EQ(to_json(r).dump(), to_json(again).dump());
  double best_dp = 0.0;
  for (const auto& cand : r.candidates) {
    if (cand.feasible) best_dp = std::max(best_dp, cand.dp);
  }
  EXPECT_TRUE(random_perturbation(*weights_, r.best_sigma, r.best_seed) == r.best_weights);
  const auto chosen = std::find_if(r.candidates.begin(), r.candidates.end(), [&](const PerturbCandidate& x) {
    return x.sigma == r.best_sigma && x.seed == r.best_seed;
  });
  ASSERT_NE(chosen, r.candidates.end());
  EXPECT_EQ(chosen->dp, best_dp);
}

TEST_F(TrainedModel, SmallPerturbationAucChangeIsRecorded) {
  const double base = evaluate_at_beta(*weights_, 1.0, *validation_).report.auc;
  const double noisy = evaluate_at_beta(random_perturbation(*weights_, 0.05, 11), 1.0, *validation_).report.auc;
  RecordProperty("auc_change_sigma_0.05", std::to_string(noisy - base));
  EXPECT_LT(std::abs(noisy - base), 0.1);
}

}  // namespace
}  // namespace eat
