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
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace eat {

using nlohmann::ordered_json;

namespace {

// Independent RNG streams derived from one user seed.
enum class Stream : std::uint64_t { kTrain = 1, kTemplates = 2, kSplit = 3, kPairs = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

bool bernoulli(double p, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicon

void Lexicon::validate() const {
  std::set<std::string> seen;
  auto claim = [&](const std::string& word) {
    if (word.empty()) throw ConfigError("Lexicon: empty word");
    if (!seen.insert(word).second) throw ConfigError("Lexicon: word '" + word + "' appears twice");
  };
  if (gender_pairs.empty()) throw ConfigError("Lexicon: no gendered pairs");
  for (const auto& [a, b] : gender_pairs) {
    claim(a);
    claim(b);
  }
  for (const auto& [family, tags] : identity_families) {
    if (tags.size() < 2) throw ConfigError("Lexicon: identity family '" + family + "' needs >= 2 tags");
    for (const auto& tag : tags) claim(tag);
  }
}

Lexicon Lexicon::builtin() {
  Lexicon lexicon;
  lexicon.gender_pairs = {{"he", "she"},         {"him", "her"},       {"his", "hers"},
                          {"man", "woman"},      {"boy", "girl"},      {"father", "mother"},
                          {"son", "daughter"},   {"brother", "sister"}};
  lexicon.identity_families = {{"religion", {"christian", "jewish", "muslim"}},
                               {"race", {"black", "white", "asian"}}};
  return lexicon;
}

Lexicon Lexicon::from_json(const ordered_json& j) {
  const int version = j.at("version").get<int>();
  if (version != kVersion) {
    throw ConfigError("Lexicon: version " + std::to_string(version) + " is not supported");
  }
  Lexicon lexicon;
  for (const auto& pair : j.at("gender_pairs")) {
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("Lexicon: gender pair must have two words");
    lexicon.gender_pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }
  for (const auto& family : j.at("identity_families")) {
    lexicon.identity_families.emplace_back(family.at("family").get<std::string>(),
                                           family.at("tags").get<std::vector<std::string>>());
  }
  lexicon.validate();
  return lexicon;
}

ordered_json Lexicon::to_json() const {
  ordered_json j;
  j["version"] = kVersion;
  j["gender_pairs"] = ordered_json::array();
  for (const auto& [a, b] : gender_pairs) j["gender_pairs"].push_back({a, b});
  j["identity_families"] = ordered_json::array();
  for (const auto& [family, tags] : identity_families) {
    ordered_json f;
    f["family"] = family;
    f["tags"] = tags;
    j["identity_families"].push_back(f);
  }
  return j;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("Lexicon: cannot open " + path.string());
  try {
    return from_json(ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("Lexicon: " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CorpusConfig

std::string to_string(GenderPlacement placement) {
  switch (placement) {
    case GenderPlacement::kAnywhere: return "anywhere";
    case GenderPlacement::kProximal: return "proximal";
    case GenderPlacement::kDistal: return "distal";
  }
  return "anywhere";
}

GenderPlacement parse_gender_placement(const std::string& text) {
  if (text == "anywhere") return GenderPlacement::kAnywhere;
  if (text == "proximal") return GenderPlacement::kProximal;
  if (text == "distal") return GenderPlacement::kDistal;
  throw ConfigError("unknown gender placement '" + text + "' (anywhere|proximal|distal)");
}

namespace {

std::size_t template_cell_count(const Lexicon& lexicon) {
  std::size_t cells = 2;
  for (const auto& [family, tags] : lexicon.identity_families) cells *= tags.size();
  return cells;
}

// bos + gendered word + 3 task tokens + one tag per identity family.
std::size_t required_length(const Lexicon& lexicon) { return 5 + lexicon.identity_families.size(); }

}  // namespace

void CorpusConfig::validate(const Lexicon& lexicon) const {
  std::ostringstream problems;
  if (!(shortcut_strength >= 0.0 && shortcut_strength <= 1.0)) problems << " shortcut_strength outside [0, 1];";
  if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) problems << " hard_fraction outside [0, 1];";
  if (!(hard_label_noise >= 0.0 && hard_label_noise <= 0.5)) problems << " hard_label_noise outside [0, 0.5];";
  if (!(identity_rate >= 0.0 && identity_rate <= 1.0)) problems << " identity_rate outside [0, 1];";
  if (task_tokens < 2 || task_tokens % 2 != 0) problems << " task_tokens must be even and >= 2;";
  if (noise_tokens < 1) problems << " noise_tokens must be >= 1;";
  if (min_len > max_len) problems << " min_len exceeds max_len;";
  if (min_len < required_length(lexicon)) {
    problems << " min_len must be >= " << required_length(lexicon) << ";";
  }
  if (train_size < 20) problems << " train_size must be >= 20;";
  const std::size_t cells = template_cell_count(lexicon);
  if (eval_pairs < 2 * cells || eval_pairs % cells != 0) {
    problems << " eval_pairs must be a positive multiple of " << cells << " and >= " << 2 * cells
             << " so every (identity tag, label) cell is covered in both template halves;";
  }
  double total = 0.0;
  for (double r : split_ratios) {
    if (!(r >= 0.0)) problems << " split ratios must be non-negative;";
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) problems << " split ratios sum to " << total << ", not 1;";
  const std::string text = problems.str();
  if (!text.empty()) throw ConfigError("CorpusConfig:" + text);
}

CorpusConfig CorpusConfig::from_json(const ordered_json& j) {
  CorpusConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.train_size = j.value("train_size", c.train_size);
    c.eval_pairs = j.value("eval_pairs", c.eval_pairs);
    c.shortcut_strength = j.value("shortcut_strength", c.shortcut_strength);
    c.min_len = j.value("min_len", c.min_len);
    c.max_len = j.value("max_len", c.max_len);
    c.task_tokens = j.value("task_tokens", c.task_tokens);
    c.noise_tokens = j.value("noise_tokens", c.noise_tokens);
    c.hard_fraction = j.value("hard_fraction", c.hard_fraction);
    c.hard_label_noise = j.value("hard_label_noise", c.hard_label_noise);
    c.identity_rate = j.value("identity_rate", c.identity_rate);
    c.placement = parse_gender_placement(j.value("placement", to_string(c.placement)));
    if (j.contains("split_ratios")) {
      const auto ratios = j.at("split_ratios").get<std::vector<double>>();
      if (ratios.size() != 3) throw ConfigError("CorpusConfig: split_ratios needs three values");
      std::copy(ratios.begin(), ratios.end(), c.split_ratios.begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("CorpusConfig: ") + e.what());
  }
  return c;
}

ordered_json CorpusConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["train_size"] = train_size;
  j["eval_pairs"] = eval_pairs;
  j["shortcut_strength"] = shortcut_strength;
  j["min_len"] = min_len;
  j["max_len"] = max_len;
  j["task_tokens"] = task_tokens;
  j["noise_tokens"] = noise_tokens;
  j["hard_fraction"] = hard_fraction;
  j["hard_label_noise"] = hard_label_noise;
  j["identity_rate"] = identity_rate;
  j["placement"] = to_string(placement);
  j["split_ratios"] = split_ratios;
  return j;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(const Lexicon& lexicon, std::size_t task_tokens, std::size_t noise_tokens) {
  lexicon.validate();
  add("<pad>");
  add("<bos>");
  for (const auto& [a, b] : lexicon.gender_pairs) {
    const TokenId ia = add(a);
    const TokenId ib = add(b);
    gender_pairs_.emplace_back(ia, ib);
  }
  for (const auto& [family, tags] : lexicon.identity_families) {
    std::vector<TokenId> ids;
    for (const auto& tag : tags) ids.push_back(add(tag));
    families_.emplace_back(family, std::move(ids));
  }
  for (std::size_t k = 0; k < task_tokens / 2; ++k) positive_.push_back(add("pos" + std::to_string(k)));
  for (std::size_t k = 0; k < task_tokens / 2; ++k) negative_.push_back(add("neg" + std::to_string(k)));
  for (std::size_t k = 0; k < noise_tokens; ++k) noise_.push_back(add("w" + std::to_string(k)));

  partner_.assign(words_.size(), std::nullopt);
  gender_side_.assign(words_.size(), -1);
  for (const auto& [a, b] : gender_pairs_) {
    partner_[a] = b;
    partner_[b] = a;
    gender_side_[a] = 0;
    gender_side_[b] = 1;
  }
}

TokenId Vocabulary::add(const std::string& word) {
  if (ids_.contains(word)) throw ConfigError("Vocabulary: duplicate word '" + word + "'");
  const auto id = static_cast<TokenId>(words_.size());
  words_.push_back(word);
  ids_.emplace(word, id);
  return id;
}

TokenId Vocabulary::id(const std::string& word) const {
  const auto it = ids_.find(word);
  if (it == ids_.end()) throw DomainError("Vocabulary: unknown word '" + word + "'");
  return it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= words_.size()) throw DomainError("Vocabulary: token id " + std::to_string(id) + " out of range");
  return words_[id];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

std::optional<TokenId> Vocabulary::partner(TokenId id) const {
  return id < partner_.size() ? partner_[id] : std::nullopt;
}

bool Vocabulary::is_feminine(TokenId id) const { return id < gender_side_.size() && gender_side_[id] == 1; }
bool Vocabulary::is_masculine(TokenId id) const { return id < gender_side_.size() && gender_side_[id] == 0; }

// ---------------------------------------------------------------------------
// Examples and JSONL

ordered_json to_json(const Example& e) {
  ordered_json j;
  j["id"] = e.id;
  j["tokens"] = e.tokens;
  j["text"] = e.text;
  j["label"] = e.label;
  j["z"] = e.z;
  j["pair_id"] = e.pair_id;
  j["subgroups"] = ordered_json::array();
  for (const auto& s : e.subgroups) j["subgroups"].push_back({s.family, s.tag});
  return j;
}

Example example_from_json(const ordered_json& j) {
  Example e;
  e.id = j.at("id").get<std::uint64_t>();
  e.tokens = j.at("tokens").get<std::vector<TokenId>>();
  e.text = j.at("text").get<std::vector<std::string>>();
  e.label = j.at("label").get<int>();
  e.z = j.at("z").get<int>();
  e.pair_id = j.at("pair_id").get<std::uint64_t>();
  for (const auto& s : j.at("subgroups")) e.subgroups.push_back({s.at(0).get<std::string>(), s.at(1).get<std::string>()});
  if ((e.label != 0 && e.label != 1) || (e.z != 0 && e.z != 1)) {
    throw FormatError("Example " + std::to_string(e.id) + ": label and z must be 0 or 1");
  }
  if (e.tokens.size() != e.text.size()) {
    throw FormatError("Example " + std::to_string(e.id) + ": tokens and text lengths differ");
  }
  return e;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Example> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("write_jsonl: cannot open " + path.string());
  for (const auto& e : examples) out << to_json(e).dump() << '\n';
  if (!out) throw Error("write_jsonl: write to " + path.string() + " failed");
}

std::vector<Example> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_jsonl: cannot open " + path.string());
  std::vector<Example> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      examples.push_back(example_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return examples;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<TokenId> flip_gender(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::vector<TokenId> out(tokens.begin(), tokens.end());
  for (auto& t : out) {
    if (const auto p = vocab.partner(t)) t = *p;
  }
  return out;
}

namespace {

// Task evidence whose majority polarity equals `label`: either a single
// token, a unanimous triple, or (with probability hard_fraction) 2-vs-1.
std::vector<TokenId> task_evidence(int label, double hard_fraction, const Vocabulary& vocab,
                                   std::mt19937_64& rng, bool* hard = nullptr) {
  const auto& majority = label == 1 ? vocab.positive_task() : vocab.negative_task();
  const auto& minority = label == 1 ? vocab.negative_task() : vocab.positive_task();
  std::vector<TokenId> evidence;
  const bool is_hard = bernoulli(hard_fraction, rng);
  if (hard) *hard = is_hard;
  if (is_hard) {
    evidence = {pick(majority, rng), pick(majority, rng), pick(minority, rng)};
  } else if (bernoulli(0.5, rng)) {
    evidence = {pick(majority, rng)};
  } else {
    evidence = {pick(majority, rng), pick(majority, rng), pick(majority, rng)};
  }
  return evidence;
}

// Lays out bos, the gendered word, and `content` into a sentence of `length`
// tokens, padding with noise and honoring the gender placement.
std::vector<TokenId> arrange(TokenId gendered, std::vector<TokenId> content, std::size_t length,
                             GenderPlacement placement, const Vocabulary& vocab, std::mt19937_64& rng) {
  while (content.size() + 2 < length) content.push_back(pick(vocab.noise(), rng));
  std::shuffle(content.begin(), content.end(), rng);
  std::size_t slot = 0;
  switch (placement) {
    case GenderPlacement::kProximal: slot = 0; break;
    case GenderPlacement::kDistal: slot = content.size(); break;
    case GenderPlacement::kAnywhere:
      slot = std::uniform_int_distribution<std::size_t>(0, content.size())(rng);
      break;
  }
  content.insert(content.begin() + static_cast<std::ptrdiff_t>(slot), gendered);
  content.insert(content.begin(), kBosToken);
  return content;
}

std::vector<std::string> words_of(std::span<const TokenId> tokens, const Vocabulary& vocab) {
  std::vector<std::string> words;
  words.reserve(tokens.size());
  for (TokenId t : tokens) words.push_back(vocab.word(t));
  return words;
}

}  // namespace

std::vector<Example> gen_train_corpus(const CorpusConfig& config, const Lexicon& lexicon) {
  config.validate(lexicon);
  const Vocabulary vocab(lexicon, config.task_tokens, config.noise_tokens);
  auto rng = make_rng(config.seed, Stream::kTrain);
  std::uniform_int_distribution<std::size_t> length_dist(config.min_len, config.max_len);

  std::vector<Example> corpus;
  corpus.reserve(config.train_size);
  for (std::size_t i = 0; i < config.train_size; ++i) {
    Example e;
    e.id = i;
    e.pair_id = i;
    e.z = 0;
    const std::size_t length = length_dist(rng);

    // Majority polarity is balanced; hard sentences may carry the opposite label.
    const int majority = static_cast<int>(i % 2);
    bool hard = false;
    std::vector<TokenId> content = task_evidence(majority, config.hard_fraction, vocab, rng, &hard);
    e.label = hard && bernoulli(config.hard_label_noise, rng) ? 1 - majority : majority;
    if (bernoulli(config.identity_rate, rng)) {
      const auto& [family, ids] = pick(vocab.identity_families(), rng);
      const std::size_t t = std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng);
      content.push_back(ids[t]);
      e.subgroups.push_back({family, vocab.word(ids[t])});
    }
    const auto& [masculine, feminine] = pick(vocab.gender_pairs(), rng);
    const bool linked = bernoulli(config.shortcut_strength, rng);
    const bool feminine_side = linked == (e.label == 1);
    e.tokens = arrange(feminine_side ? feminine : masculine, std::move(content), length, config.placement,
                       vocab, rng);
    e.text = words_of(e.tokens, vocab);
    corpus.push_back(std::move(e));
  }
  return corpus;
}

std::vector<Example> gen_eval_templates(const CorpusConfig& config, const Lexicon& lexicon) {
  config.validate(lexicon);
  const Vocabulary vocab(lexicon, config.task_tokens, config.noise_tokens);
  auto rng = make_rng(config.seed, Stream::kTemplates);
  std::uniform_int_distribution<std::size_t> length_dist(config.min_len, config.max_len);
  const auto& families = vocab.identity_families();

  std::vector<Example> templates;
  templates.reserve(2 * config.eval_pairs);
  for (std::size_t p = 0; p < config.eval_pairs; ++p) {
    // Mixed-radix walk over identity tags, then label, so each cell of
    // (tag combination, label) receives the same number of pairs.
    std::size_t rest = p;
    std::vector<Subgroup> subgroups;
    std::vector<TokenId> content;
    for (const auto& [family, ids] : families) {
      const TokenId tag = ids[rest % ids.size()];
      rest /= ids.size();
      content.push_back(tag);
      subgroups.push_back({family, vocab.word(tag)});
    }
    const int label = static_cast<int>(rest % 2);
    const auto evidence = task_evidence(label, config.hard_fraction, vocab, rng);
    content.insert(content.end(), evidence.begin(), evidence.end());
    const TokenId masculine = pick(vocab.gender_pairs(), rng).first;

    Example original;
    original.id = 2 * p;
    original.pair_id = p;
    original.label = label;
    original.z = 0;
    original.subgroups = subgroups;
    original.tokens = arrange(masculine, std::move(content), length_dist(rng), config.placement, vocab, rng);
    original.text = words_of(original.tokens, vocab);

    Example flipped = original;
    flipped.id = 2 * p + 1;
    flipped.z = 1;
    flipped.tokens = flip_gender(original.tokens, vocab);
    flipped.text = words_of(flipped.tokens, vocab);

    templates.push_back(std::move(original));
    templates.push_back(std::move(flipped));
  }
  return templates;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

// Distributes `total` items over groups proportionally to `sizes` using
// largest remainders (ties to the earlier group).
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t total) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> share(sizes.size());
  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder numerator, group)
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    share[g] = sizes[g] * total / n;
    assigned += share[g];
    remainders.emplace_back(sizes[g] * total % n, g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) share[remainders[i].second] += 1;
  return share;
}

}  // namespace

CorpusSplit split(std::span<const Example> corpus, std::array<double, 3> ratios, std::uint64_t seed) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split: negative ratio");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split: ratios sum to " + std::to_string(total) + ", expected 1");
  }
  const std::size_t n = corpus.size();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[1]));
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[2]));
  if (n < 3 || n_val + n_test >= n || (ratios[1] > 0 && n_val == 0) || (ratios[2] > 0 && n_test == 0)) {
    throw DomainError("split: " + std::to_string(n) + " examples cannot be split into non-empty parts");
  }

  std::vector<std::vector<std::size_t>> by_label(2);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = corpus[i].label;
    if (y != 0 && y != 1) throw DomainError("split: label must be 0 or 1");
    by_label[static_cast<std::size_t>(y)].push_back(i);
  }
  auto rng = make_rng(seed, Stream::kSplit);
  for (auto& group : by_label) std::shuffle(group.begin(), group.end(), rng);
  const std::vector<std::size_t> sizes = {by_label[0].size(), by_label[1].size()};
  const auto val_share = apportion(sizes, n_val);
  const auto test_share = apportion(sizes, n_test);

  std::vector<int> assignment(n, 0);
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t k = 0; k < by_label[g].size(); ++k) {
      const std::size_t idx = by_label[g][k];
      if (k < val_share[g]) {
        assignment[idx] = 1;
      } else if (k < val_share[g] + test_share[g]) {
        assignment[idx] = 2;
      }
    }
  }
  CorpusSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    auto& target = assignment[i] == 0 ? out.train : assignment[i] == 1 ? out.validation : out.test;
    target.push_back(corpus[i]);
  }
  return out;
}

std::pair<std::vector<Example>, std::vector<Example>> split_pairs(std::span<const Example> templates,
                                                                  std::uint64_t seed) {
  // Cell key: subgroups + label of the z = 0 member.
  std::map<std::pair<std::vector<Subgroup>, int>, std::vector<std::uint64_t>> cells;
  std::map<std::uint64_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& e = templates[i];
    members[e.pair_id].push_back(i);
    if (e.z == 0) cells[{e.subgroups, e.label}].push_back(e.pair_id);
  }
  for (const auto& [pair, idx] : members) {
    if (idx.size() != 2) {
      throw DomainError("split_pairs: pair " + std::to_string(pair) + " has " + std::to_string(idx.size()) +
                        " members, expected 2");
    }
  }
  auto rng = make_rng(seed, Stream::kPairs);
  std::set<std::uint64_t> validation_pairs;
  for (auto& [key, pairs] : cells) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (std::size_t k = 0; k < (pairs.size() + 1) / 2; ++k) validation_pairs.insert(pairs[k]);
  }
  std::pair<std::vector<Example>, std::vector<Example>> out;
  for (const auto& e : templates) {
    (validation_pairs.contains(e.pair_id) ? out.first : out.second).push_back(e);
  }
  return out;
}

}  // namespace eat
