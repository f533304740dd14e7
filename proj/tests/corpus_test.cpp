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

#include "eat/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "eat/metrics.hpp"
#include "gtest/gtest.h"

namespace eat {
namespace {

const Lexicon& lexicon() {
  static const Lexicon lex = Lexicon::builtin();
  return lex;
}

const Vocabulary& vocab() {
  static const Vocabulary v(lexicon(), 8, 12);
  return v;
}

int gender_side(const Example& e) {
  for (TokenId t : e.tokens) {
    if (vocab().is_feminine(t)) return 1;
    if (vocab().is_masculine(t)) return 0;
  }
  return -1;
}

double phi(const std::vector<Example>& corpus) {
  double n = 0, gy = 0, g = 0, y = 0;
  for (const auto& e : corpus) {
    const int s = gender_side(e);
    n += 1;
    g += s;
    y += e.label;
    gy += s * e.label;
  }
  const double cov = gy / n - (g / n) * (y / n);
  const double vg = g / n * (1 - g / n), vy = y / n * (1 - y / n);
  return cov / std::sqrt(vg * vy);
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Lexicon, BuiltinMatchesShippedResource) {
  const Lexicon shipped = Lexicon::load(std::filesystem::path(EAT_SOURCE_DIR) / "resources" / "lexicon.json");
  EXPECT_EQ(shipped.to_json(), Lexicon::builtin().to_json());
}

TEST(Lexicon, JsonRoundTripAndValidation) {
  EXPECT_EQ(Lexicon::from_json(lexicon().to_json()).to_json(), lexicon().to_json());
  Lexicon bad = lexicon();
  bad.gender_pairs.push_back({"he", "zir"});
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = lexicon();
  bad.identity_families[0].second.push_back("woman");
  EXPECT_THROW(bad.validate(), ConfigError);
  auto j = lexicon().to_json();
  j["version"] = 2;
  EXPECT_THROW(Lexicon::from_json(j), ConfigError);
}

TEST(Vocabulary, ReservedIdsAndPairs) {
  EXPECT_EQ(vocab().id("<pad>"), kPadToken);
  EXPECT_EQ(vocab().id("<bos>"), kBosToken);
  EXPECT_EQ(vocab().size(), 2u + 16u + 6u + 8u + 12u);
  for (const auto& [m, f] : vocab().gender_pairs()) {
    EXPECT_EQ(vocab().partner(m), f);
    EXPECT_EQ(vocab().partner(f), m);
    EXPECT_TRUE(vocab().is_masculine(m));
    EXPECT_TRUE(vocab().is_feminine(f));
  }
  EXPECT_FALSE(vocab().partner(vocab().id("w0")).has_value());
  EXPECT_THROW(vocab().id("doctor"), DomainError);
}

TEST(FlipGender, Examples) {
  const std::vector<std::string> she = {"<bos>", "she", "w0", "w1"};
  const std::vector<std::string> he = {"<bos>", "he", "w0", "w1"};
  EXPECT_EQ(flip_gender(vocab().encode(she), vocab()), vocab().encode(he));
  const std::vector<std::string> plain = {"<bos>", "pos0", "w3", "christian"};
  EXPECT_EQ(flip_gender(vocab().encode(plain), vocab()), vocab().encode(plain));
}

TEST(FlipGender, InvolutionOnRandomSequences) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<TokenId> id(0, static_cast<TokenId>(vocab().size() - 1));
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TokenId> t(1 + trial % 12);
    for (auto& x : t) x = id(rng);
    const auto once = flip_gender(t, vocab());
    EXPECT_EQ(once.size(), t.size());
    EXPECT_EQ(flip_gender(once, vocab()), t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!vocab().partner(t[i])) {
        EXPECT_EQ(once[i], t[i]);
      }
    }
  }
}

TEST(CorpusConfig, ValidationAndJson) {
  CorpusConfig c;
  EXPECT_NO_THROW(c.validate(lexicon()));
  EXPECT_EQ(CorpusConfig::from_json(c.to_json()).to_json(), c.to_json());
  c.shortcut_strength = 1.2;
  EXPECT_THROW(c.validate(lexicon()), ConfigError);
  c = CorpusConfig{};
  c.eval_pairs = 20;
  EXPECT_THROW(c.validate(lexicon()), ConfigError);
  c = CorpusConfig{};
  c.split_ratios = {0.7, 0.1, 0.1};
  EXPECT_THROW(c.validate(lexicon()), ConfigError);
  c = CorpusConfig{};
  c.max_len = 5;
  EXPECT_THROW(c.validate(lexicon()), ConfigError);
  EXPECT_THROW(parse_gender_placement("middle"), ConfigError);
  for (auto p : {GenderPlacement::kAnywhere, GenderPlacement::kProximal, GenderPlacement::kDistal}) {
    EXPECT_EQ(parse_gender_placement(to_string(p)), p);
  }
}

TEST(TrainCorpus, ShapeBalanceAndDeterminism) {
  const CorpusConfig c;
  const auto a = gen_train_corpus(c, lexicon());
  const auto b = gen_train_corpus(c, lexicon());
  ASSERT_EQ(a.size(), c.train_size);
  EXPECT_EQ(a, b);
  std::size_t positives = 0;
  for (const auto& e : a) {
    ASSERT_GE(e.tokens.size(), c.min_len);
    ASSERT_LE(e.tokens.size(), c.max_len);
    EXPECT_EQ(e.tokens.front(), kBosToken);
    EXPECT_EQ(e.text.size(), e.tokens.size());
    const auto gendered = std::count_if(e.tokens.begin(), e.tokens.end(),
                                        [](TokenId t) { return vocab().partner(t).has_value(); });
    EXPECT_EQ(gendered, 1);
    positives += static_cast<std::size_t>(e.label);
  }
  EXPECT_NEAR(static_cast<double>(positives) / static_cast<double>(a.size()), 0.5, 0.05);

  const auto dir = std::filesystem::temp_directory_path();
  write_jsonl(dir / "eat_corpus_a.jsonl", a);
  write_jsonl(dir / "eat_corpus_b.jsonl", b);
  EXPECT_EQ(file_bytes(dir / "eat_corpus_a.jsonl"), file_bytes(dir / "eat_corpus_b.jsonl"));
  EXPECT_EQ(read_jsonl(dir / "eat_corpus_a.jsonl"), a);
}

TEST(TrainCorpus, ShortcutStrengthControlsCorrelation) {
  CorpusConfig c;
  c.shortcut_strength = 0.5;
  EXPECT_NEAR(phi(gen_train_corpus(c, lexicon())), 0.0, 0.05);
  c.shortcut_strength = 0.95;
  EXPECT_GE(phi(gen_train_corpus(c, lexicon())), 0.8);
}

TEST(TrainCorpus, PlacementPinsTheGenderedSlot) {
  CorpusConfig c;
  c.train_size = 200;
  c.placement = GenderPlacement::kProximal;
  for (const auto& e : gen_train_corpus(c, lexicon())) EXPECT_TRUE(vocab().partner(e.tokens[1]).has_value());
  c.placement = GenderPlacement::kDistal;
  for (const auto& e : gen_train_corpus(c, lexicon())) EXPECT_TRUE(vocab().partner(e.tokens.back()).has_value());
}

TEST(Templates, PairsDifferOnlyAtGenderedPositions) {
  const CorpusConfig c;
  const auto t = gen_eval_templates(c, lexicon());
  ASSERT_EQ(t.size(), 2 * c.eval_pairs);
  for (std::size_t i = 0; i < t.size(); i += 2) {
    const Example& a = t[i];
    const Example& b = t[i + 1];
    EXPECT_EQ(a.z, 0);
    EXPECT_EQ(b.z, 1);
    EXPECT_EQ(a.pair_id, b.pair_id);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.subgroups, b.subgroups);
    ASSERT_EQ(a.tokens.size(), b.tokens.size());
    for (std::size_t k = 0; k < a.tokens.size(); ++k) {
      if (a.tokens[k] != b.tokens[k]) {
        EXPECT_EQ(vocab().partner(a.tokens[k]), b.tokens[k]);
      }
    }
    EXPECT_EQ(flip_gender(a.tokens, vocab()), b.tokens);
  }
}

TEST(Templates, BalancedCellsAndMetricCoverage) {
  const CorpusConfig c;
  const auto t = gen_eval_templates(c, lexicon());
  std::map<std::pair<std::vector<Subgroup>, int>, int> cells;
  int z1_fem_pos = 0, z1_fem = 0, labels = 0;
  std::vector<PredictionRecord> records;
  for (const auto& e : t) {
    ++cells[{e.subgroups, e.label}];
    labels += e.label;
    if (e.z == 1) {
      z1_fem += gender_side(e);
      z1_fem_pos += gender_side(e) * e.label;
    }
    PredictionRecord r;
    r.score = 0.5;
    r.y_hat = 1;
    r.y = e.label;
    r.z = e.z;
    r.pair_id = e.pair_id;
    r.subgroups = e.subgroups;
    records.push_back(r);
  }
  EXPECT_EQ(cells.size(), 18u);
  for (const auto& [cell, count] : cells) EXPECT_EQ(count, static_cast<int>(2 * c.eval_pairs / 18));
  EXPECT_EQ(2 * labels, static_cast<int>(t.size()));
  // Labels do not depend on z; the gender side is fixed by z.
  EXPECT_EQ(z1_fem, static_cast<int>(c.eval_pairs));
  EXPECT_EQ(2 * z1_fem_pos, static_cast<int>(c.eval_pairs));
  EXPECT_NO_THROW(check_counterfactual_pairs(records));
  EXPECT_NO_THROW(fairness_report(records, std::vector<std::string>{"religion", "race"}));
}

TEST(Split, EightOneOne) {
  CorpusConfig c;
  c.train_size = 1000;
  const auto corpus = gen_train_corpus(c, lexicon());
  const auto s = split(corpus, {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.validation.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
  std::set<std::uint64_t> ids;
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    for (const auto& e : *part) EXPECT_TRUE(ids.insert(e.id).second);
  }
  EXPECT_EQ(ids.size(), 1000u);
  const auto again = split(corpus, {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
  auto positives = [](const std::vector<Example>& v) {
    return std::count_if(v.begin(), v.end(), [](const Example& e) { return e.label == 1; });
  };
  const double overall = static_cast<double>(positives(corpus)) / 1000.0;
  EXPECT_NEAR(static_cast<double>(positives(s.validation)) / 100.0, overall, 0.011);
  EXPECT_NEAR(static_cast<double>(positives(s.test)) / 100.0, overall, 0.011);
}

TEST(Split, Errors) {
  CorpusConfig c;
  c.train_size = 100;
  const auto corpus = gen_train_corpus(c, lexicon());
  EXPECT_THROW(split(corpus, {0.5, 0.1, 0.1}, 0), ConfigError);
  const std::vector<Example> tiny(corpus.begin(), corpus.begin() + 3);
  EXPECT_THROW(split(tiny, {0.8, 0.1, 0.1}, 0), DomainError);
}

TEST(SplitPairs, KeepsTwinsTogether) {
  const CorpusConfig c;
  const auto t = gen_eval_templates(c, lexicon());
  const auto [val, test] = split_pairs(t, 3);
  EXPECT_EQ(val.size() + test.size(), t.size());
  std::set<std::uint64_t> val_pairs, test_pairs;
  for (const auto& e : val) val_pairs.insert(e.pair_id);
  for (const auto& e : test) test_pairs.insert(e.pair_id);
  for (auto p : val_pairs) EXPECT_FALSE(test_pairs.contains(p));
  EXPECT_EQ(val.size(), 2 * val_pairs.size());
  EXPECT_EQ(test.size(), 2 * test_pairs.size());
}

}  // namespace
}  // namespace eat
