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

// Synthetic corpus with an injected gender shortcut, counterfactual
// flipping, and paired identity-phrase evaluation templates.

#ifndef EAT_CORPUS_HPP_
#define EAT_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eat/model.hpp"
#include "eat/subgroup.hpp"

namespace eat {

// Gendered word pairs and identity terms. Loaded from a versioned JSON
// resource; `builtin()` returns the copy shipped in resources/lexicon.json.
struct Lexicon {
  static constexpr int kVersion = 1;

  // (masculine, feminine); flipping maps each member to its partner.
  std::vector<std::pair<std::string, std::string>> gender_pairs;
  // Ordered family -> tags, e.g. religion -> {christian, jewish, muslim}.
  std::vector<std::pair<std::string, std::vector<std::string>>> identity_families;

  // Throws ConfigError on duplicate words or overlap between pairs and tags.
  void validate() const;

  static Lexicon builtin();
  static Lexicon from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
  static Lexicon load(const std::filesystem::path& path);
};

enum class GenderPlacement {
  kAnywhere,  // uniform over content positions
  kProximal,  // immediately after bos
  kDistal,    // last position of the sentence
};

std::string to_string(GenderPlacement placement);
GenderPlacement parse_gender_placement(const std::string& text);

struct CorpusConfig {
  std::uint64_t seed = 0;
  std::size_t train_size = 4000;
  // Number of counterfactual template pairs; a multiple of 2 x the product
  // of identity family sizes so every (tag, label) cell is balanced.
  std::size_t eval_pairs = 2700;
  // Probability that the gendered word takes the side linked to the label
  // (feminine with y = 1, masculine with y = 0). 0.5 means no shortcut.
  double shortcut_strength = 0.9;
  std::size_t min_len = 7;
  std::size_t max_len = 12;
  std::size_t task_tokens = 8;   // K, split evenly into positive and negative
  std::size_t noise_tokens = 12; // M
  // Fraction of sentences whose task evidence is a 2-vs-1 majority.
  double hard_fraction = 0.5;
  // Probability that a hard training sentence carries the label opposite to
  // its task majority. Templates are always labeled by the majority.
  double hard_label_noise = 0.3;
  double identity_rate = 0.5;  // chance a training sentence mentions an identity term
  GenderPlacement placement = GenderPlacement::kAnywhere;
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};

  void validate(const Lexicon& lexicon) const;

  static CorpusConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

// Token id layout: pad, bos, gendered pairs (masculine then feminine), identity
// tags by family, positive task tokens, negative task tokens, noise tokens.
class Vocabulary {
 public:
  Vocabulary(const Lexicon& lexicon, std::size_t task_tokens, std::size_t noise_tokens);

  std::size_t size() const { return words_.size(); }
  TokenId id(const std::string& word) const;
  const std::string& word(TokenId id) const;
  std::vector<TokenId> encode(std::span<const std::string> words) const;

  // Partner of a gendered token, or nullopt for any other token.
  std::optional<TokenId> partner(TokenId id) const;

  const std::vector<std::pair<TokenId, TokenId>>& gender_pairs() const { return gender_pairs_; }
  const std::vector<std::pair<std::string, std::vector<TokenId>>>& identity_families() const {
    return families_;
  }
  const std::vector<TokenId>& positive_task() const { return positive_; }
  const std::vector<TokenId>& negative_task() const { return negative_; }
  const std::vector<TokenId>& noise() const { return noise_; }
  bool is_feminine(TokenId id) const;
  bool is_masculine(TokenId id) const;

 private:
  TokenId add(const std::string& word);

  std::vector<std::string> words_;
  std::map<std::string, TokenId> ids_;
  std::vector<std::pair<TokenId, TokenId>> gender_pairs_;
  std::vector<std::optional<TokenId>> partner_;
  std::vector<int> gender_side_;  // -1 none, 0 masculine, 1 feminine
  std::vector<std::pair<std::string, std::vector<TokenId>>> families_;
  std::vector<TokenId> positive_, negative_, noise_;
};

struct Example {
  std::uint64_t id = 0;
  std::vector<TokenId> tokens;
  std::vector<std::string> text;
  int label = 0;
  int z = 0;  // 0 original gender words, 1 flipped
  std::uint64_t pair_id = 0;
  std::vector<Subgroup> subgroups;

  bool operator==(const Example&) const = default;
};

nlohmann::ordered_json to_json(const Example& example);
Example example_from_json(const nlohmann::ordered_json& j);
void write_jsonl(const std::filesystem::path& path, std::span<const Example> examples);
std::vector<Example> read_jsonl(const std::filesystem::path& path);

// Replaces every gendered token by its partner; other tokens are unchanged.
std::vector<TokenId> flip_gender(std::span<const TokenId> tokens, const Vocabulary& vocab);

std::vector<Example> gen_train_corpus(const CorpusConfig& config, const Lexicon& lexicon);

// Counterfactual pairs: each z = 0 example uses masculine words and its z = 1
// twin (same pair_id, id + 1) the feminine partners. Every example carries
// one tag from each identity family.
std::vector<Example> gen_eval_templates(const CorpusConfig& config, const Lexicon& lexicon);

struct CorpusSplit {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
};

// Label-stratified split with exact totals round(n * ratio) for validation
// and test; train takes the remainder.
CorpusSplit split(std::span<const Example> corpus, std::array<double, 3> ratios, std::uint64_t seed);

// Splits template pairs into validation and test halves without separating
// twins, balanced over (tag, label) cells.
std::pair<std::vector<Example>, std::vector<Example>> split_pairs(std::span<const Example> templates,
                                                                  std::uint64_t seed);

}  // namespace eat

#endif  // EAT_CORPUS_HPP_
