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

#include "cli.hpp"

#include <zlib.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "eat/corpus.hpp"
#include "eat/entropy.hpp"
#include "eat/error.hpp"
#include "eat/intra.hpp"
#include "eat/metrics.hpp"
#include "eat/model.hpp"
#include "eat/train.hpp"
#include "report.hpp"

namespace eat::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::uint32_t file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(got));
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

struct RunContext {
  fs::path out;
  std::size_t threads = 1;
};

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::uint32_t string_crc32(const std::string& s) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// User-supplied config files: any problem is a usage error.
ordered_json read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw ConfigError(what + ": empty list");
  return values;
}

template <typename T>
T config_value(const ordered_json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

struct Manifest {
  std::string command;
  ordered_json config;
  ordered_json seeds = ordered_json::object();
  ordered_json corpus;  // null when the run is not tied to one corpus
  std::string model;
  ordered_json inputs = ordered_json::array();
  std::vector<std::string> outputs;

  void add_input(const fs::path& path) {
    const std::string p = absolute(path.string());
    for (const auto& in : inputs) {
      if (in.at("path") == p) return;
    }
    inputs.push_back({{"path", p}, {"crc32", hex32(file_crc32(path))}});
  }

  ordered_json to_json(const fs::path& out, std::size_t threads, double seconds) const {
    ordered_json j;
    j["command"] = command;
    j["tool_version"] = kToolVersion;
    j["config"] = config;
    j["seeds"] = seeds;
    if (!corpus.is_null()) j["corpus"] = corpus;
    if (!model.empty()) j["model"] = model;
    j["inputs"] = inputs;
    j["outputs"] = ordered_json::array();
    for (const auto& name : outputs) {
      j["outputs"].push_back({{"path", name}, {"crc32", hex32(file_crc32(out / name))}});
    }
    // Run-specific facts that never influence the outputs.
    j["runtime"] = {{"threads", threads}, {"duration_seconds", seconds}};
    return j;
  }
};

struct Data {
  fs::path root;
  Lexicon lexicon;
  CorpusConfig corpus;
  std::vector<std::string> families;
  std::size_t vocab_size = 0;
};

Data open_data(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("data directory not found: " + root.string());
  Data d;
  d.root = root;
  d.lexicon = Lexicon::load(root / files::kLexicon);
  d.corpus = CorpusConfig::from_json(read_json(root / files::kCorpusConfig));
  for (const auto& [family, tags] : d.lexicon.identity_families) d.families.push_back(family);
  d.vocab_size = Vocabulary(d.lexicon, d.corpus.task_tokens, d.corpus.noise_tokens).size();
  return d;
}

ordered_json corpus_identity(const Data& d) {
  std::string digest;
  for (const char* name : {files::kLexicon, files::kCorpusConfig, files::kTrain, files::kValidation, files::kTest,
                           files::kTemplatesValidation, files::kTemplatesTest}) {
    digest += std::string(name) + ":" + hex32(file_crc32(d.root / name)) + "\n";
  }
  return {{"config", d.corpus.to_json()}, {"fingerprint", hex32(string_crc32(digest))}};
}

std::vector<Example> load_examples(const Data& d, const char* name, Manifest& m) {
  m.add_input(d.root / name);
  return read_jsonl(d.root / name);
}

EvalSet load_eval_set(const Data& d, const char* performance, const char* fairness, Manifest& m) {
  return {load_examples(d, performance, m), load_examples(d, fairness, m), d.families};
}

void attach_data(const Data& d, Manifest& m) {
  m.add_input(d.root / files::kLexicon);
  m.add_input(d.root / files::kCorpusConfig);
  m.corpus = corpus_identity(d);
  m.seeds["corpus"] = d.corpus.seed;
}

ModelWeights load_model(const fs::path& path, const Data& d, Manifest& m) {
  ModelWeights w = load_weights(path);
  if (w.config.vocab_size != d.vocab_size || w.config.max_len < d.corpus.max_len) {
    throw ConfigError("weights " + path.string() + " (" + to_string(w.config) +
                      ") do not match the vocabulary or sentence length of " + d.root.string());
  }
  m.add_input(path);
  m.model = hex32(file_crc32(path));
  return w;
}

ordered_json test_report(const std::string& method, const ordered_json& setting, const FairnessReport& vanilla,
                         const FairnessReport& report) {
  ordered_json j;
  j["method"] = method;
  j["setting"] = setting;
  j["vanilla"] = to_json(vanilla);
  j["report"] = to_json(report);
  j["delta"] = {{"dp", report.dp - vanilla.dp},
                {"auc", report.auc - vanilla.auc},
                {"auc_relative_pct", 100.0 * (report.auc - vanilla.auc) / vanilla.auc}};
  return j;
}

// ---- command bodies -------------------------------------------------------

int exec_gen(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  const CorpusConfig config = CorpusConfig::from_json(cfg.at("corpus"));
  Lexicon lexicon = Lexicon::builtin();
  if (!cfg.at("lexicon").is_null()) {
    const fs::path path = config_value<std::string>(cfg, "lexicon");
    lexicon = Lexicon::load(path);
    m.add_input(path);
  }
  config.validate(lexicon);

  const auto corpus = gen_train_corpus(config, lexicon);
  const auto templates = gen_eval_templates(config, lexicon);
  const CorpusSplit parts = split(corpus, config.split_ratios, config.seed);
  const auto [template_validation, template_test] = split_pairs(templates, config.seed);

  const std::pair<const char*, const std::vector<Example>*> outputs[] = {
      {files::kTrain, &parts.train},
      {files::kValidation, &parts.validation},
      {files::kTest, &parts.test},
      {files::kTemplates, &templates},
      {files::kTemplatesValidation, &template_validation},
      {files::kTemplatesTest, &template_test},
  };
  for (const auto& [name, examples] : outputs) {
    write_jsonl(ctx.out / name, *examples);
    m.outputs.push_back(name);
  }
  write_json(ctx.out / files::kLexicon, lexicon.to_json());
  write_json(ctx.out / files::kCorpusConfig, config.to_json());
  m.outputs.push_back(files::kLexicon);
  m.outputs.push_back(files::kCorpusConfig);

  m.seeds["corpus"] = config.seed;
  m.corpus = corpus_identity(open_data(ctx.out));
  return kOk;
}

int exec_train(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  const Data d = open_data(config_value<std::string>(cfg, "data"));
  TrainConfig config = TrainConfig::from_json(cfg.at("train"));
  config.threads = ctx.threads;
  config.validate();
  if (config.model.vocab_size != d.vocab_size || config.model.max_len < d.corpus.max_len) {
    throw ConfigError("train: model config does not fit the data in " + d.root.string());
  }
  const auto init_seed = config_value<std::uint64_t>(cfg, "init_seed");
  attach_data(d, m);
  m.seeds["train"] = config.seed;
  m.seeds["init"] = init_seed;

  const auto train = load_examples(d, files::kTrain, m);
  std::string log;
  const FitResult result = fit(train, config, init_seed, [&](const EpochRecord& r) {
    log += to_json(r).dump() + "\n";
    std::cerr << "epoch " << r.epoch << " loss " << number(r.mean_loss) << " train_auc " << number(r.train_auc)
              << "\n";
  });
  save_weights(result.weights, ctx.out / files::kWeights);
  write_text(ctx.out / files::kEpochLog, log);
  m.outputs.push_back(files::kWeights);
  m.outputs.push_back(files::kEpochLog);
  m.model = hex32(file_crc32(ctx.out / files::kWeights));
  if (result.diverged) {
    std::cerr << "eat: error: training diverged; the last finite checkpoint was written to "
              << (ctx.out / files::kWeights).string() << "\n";
    return kRuntimeFailure;
  }

  const EvalSet test = load_eval_set(d, files::kTest, files::kTemplatesTest, m);
  const FairnessReport vanilla = evaluate_at_beta(result.weights, 1.0, test, ctx.threads).report;
  write_json(ctx.out / files::kTestReport, test_report("vanilla", {{"beta", 1.0}}, vanilla, vanilla));
  m.outputs.push_back(files::kTestReport);
  return kOk;
}

double pct_change(double value, double baseline) {
  if (value == baseline) return 0.0;
  return 100.0 * (value - baseline) / baseline;
}

int exec_entropy_sweep(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  const auto grid = config_value<std::vector<double>>(cfg, "beta_grid");
  for (double b : grid) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("entropy-sweep: beta values must be finite and >= 0");
  }
  const std::size_t base = baseline_index(grid);
  const Data d = open_data(config_value<std::string>(cfg, "data"));
  attach_data(d, m);
  const ModelWeights w = load_model(config_value<std::string>(cfg, "weights"), d, m);
  const EvalSet validation = load_eval_set(d, files::kValidation, files::kTemplatesValidation, m);

  const auto entropy = entropy_sweep(w, validation.performance, grid, ctx.threads);
  std::vector<FairnessReport> reports;
  for (double beta : grid) reports.push_back(evaluate_at_beta(w, beta, validation, ctx.threads).report);

  std::ostringstream csv;
  csv << "beta,mean_entropy,pct_entropy_change,auc,pct_auc_change,dp,pct_dp_change\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << number(grid[i]) << ',' << number(entropy[i].mean_total_entropy) << ','
        << number(pct_change(entropy[i].mean_total_entropy, entropy[base].mean_total_entropy)) << ','
        << number(reports[i].auc) << ',' << number(pct_change(reports[i].auc, reports[base].auc)) << ','
        << number(reports[i].dp) << ',' << number(pct_change(reports[i].dp, reports[base].dp)) << '\n';
  }
  write_text(ctx.out / files::kEntropySweep, csv.str());
  m.outputs.push_back(files::kEntropySweep);
  return kOk;
}

int exec_eat_search(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  SearchConfig config = SearchConfig::from_json(cfg.at("search"));
  config.threads = ctx.threads;
  config.validate();
  const Data d = open_data(config_value<std::string>(cfg, "data"));
  attach_data(d, m);
  const ModelWeights w = load_model(config_value<std::string>(cfg, "weights"), d, m);
  const EvalSet validation = load_eval_set(d, files::kValidation, files::kTemplatesValidation, m);
  const EvalSet test = load_eval_set(d, files::kTest, files::kTemplatesTest, m);

  const SearchResult result = eat_search(w, validation, config);
  write_json(ctx.out / files::kSearch, to_json(result));
  const FairnessReport vanilla = evaluate_at_beta(w, 1.0, test, ctx.threads).report;
  const FairnessReport best = evaluate_at_beta(w, result.best_beta, test, ctx.threads).report;
  ordered_json report = test_report("eat", {{"beta", result.best_beta}}, vanilla, best);
  report["regime"] = to_string(result.regime);
  write_json(ctx.out / files::kTestReport, report);
  m.outputs.push_back(files::kSearch);
  m.outputs.push_back(files::kTestReport);
  return kOk;
}

int exec_perturb_search(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  const auto sigmas = config_value<std::vector<double>>(cfg, "sigma_grid");
  const auto trials = config_value<std::size_t>(cfg, "trials");
  const auto seed = config_value<std::uint64_t>(cfg, "seed");
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("perturb-search: sigma values must be finite and >= 0");
  }
  if (trials < 1) throw ConfigError("perturb-search: trials must be >= 1");
  SearchConfig config;
  config.beta_grid = {1.0};
  config.max_auc_degradation = config_value<double>(cfg, "max_auc_degradation");
  config.threads = ctx.threads;
  config.validate();

  const Data d = open_data(config_value<std::string>(cfg, "data"));
  attach_data(d, m);
  m.seeds["perturbation"] = seed;
  const ModelWeights w = load_model(config_value<std::string>(cfg, "weights"), d, m);
  const EvalSet validation = load_eval_set(d, files::kValidation, files::kTemplatesValidation, m);
  const EvalSet test = load_eval_set(d, files::kTest, files::kTemplatesTest, m);

  const PerturbSearchResult result = perturb_search(w, validation, sigmas, trials, config, seed);
  write_json(ctx.out / files::kPerturbSearch, to_json(result));
  const FairnessReport vanilla = evaluate_at_beta(w, 1.0, test, ctx.threads).report;
  const FairnessReport best = evaluate_at_beta(result.best_weights, 1.0, test, ctx.threads).report;
  write_json(ctx.out / files::kTestReport,
             test_report("perturbation", {{"sigma", result.best_sigma}, {"seed", result.best_seed}}, vanilla, best));
  m.outputs.push_back(files::kPerturbSearch);
  m.outputs.push_back(files::kTestReport);
  return kOk;
}

std::string setting_label(const ordered_json& setting) {
  std::string out;
  for (const auto& [key, value] : setting.items()) {
    if (!out.empty()) out += ' ';
    out += key + "=" + (value.is_number_float() ? number(value.get<double>()) : value.dump());
  }
  return out;
}

int exec_report(const ordered_json& cfg, const RunContext& ctx, Manifest& m) {
  const auto runs = config_value<std::vector<std::string>>(cfg, "runs");
  if (runs.empty()) throw ConfigError("report: no run directories given");
  std::vector<ReportEntry> entries;
  std::optional<ordered_json> condition;
  std::map<std::string, std::string> fingerprint_of_model;
  std::vector<std::uint64_t> seeds;
  for (const fs::path run : runs) {
    const ordered_json manifest = read_json(run / files::kManifest);
    const std::string command = manifest.value("command", "");
    if (command != "train" && command != "eat-search" && command != "perturb-search") {
      throw ConfigError("report: " + run.string() + " holds a '" + command + "' run, not train or a search");
    }
    const ordered_json tr = read_json(run / files::kTestReport);
    m.add_input(run / files::kManifest);
    m.add_input(run / files::kTestReport);

    ordered_json corpus_config = manifest.at("corpus").at("config");
    corpus_config.erase("seed");
    if (!condition) condition = corpus_config;
    if (*condition != corpus_config) {
      throw ConfigError("report: " + run.string() + " was produced from a different corpus configuration");
    }
    const std::string model = manifest.at("model");
    const std::string fingerprint = manifest.at("corpus").at("fingerprint");
    const auto [it, inserted] = fingerprint_of_model.emplace(model, fingerprint);
    if (!inserted && it->second != fingerprint) {
      throw ConfigError("report: runs on model " + model + " used different corpora");
    }

    ReportEntry e;
    e.seed = manifest.at("seeds").at("corpus").get<std::uint64_t>();
    e.model = model;
    e.method = tr.at("method");
    e.setting = setting_label(tr.at("setting"));
    e.test = fairness_report_from_json(tr.at("report"));
    e.vanilla = fairness_report_from_json(tr.at("vanilla"));
    entries.push_back(std::move(e));
    if (std::find(seeds.begin(), seeds.end(), entries.back().seed) == seeds.end()) seeds.push_back(entries.back().seed);
  }
  const Report report = build_report(entries);
  std::ostringstream csv, md;
  write_report_csv(csv, report);
  write_report_markdown(md, report);
  write_text(ctx.out / files::kReportCsv, csv.str());
  write_text(ctx.out / files::kReportMarkdown, md.str());
  m.outputs.push_back(files::kReportCsv);
  m.outputs.push_back(files::kReportMarkdown);
  m.seeds["corpus"] = seeds;
  return kOk;
}

using Exec = int (*)(const ordered_json&, const RunContext&, Manifest&);

Exec lookup(const std::string& command) {
  if (command == "gen") return exec_gen;
  if (command == "train") return exec_train;
  if (command == "entropy-sweep") return exec_entropy_sweep;
  if (command == "eat-search") return exec_eat_search;
  if (command == "perturb-search") return exec_perturb_search;
  if (command == "report") return exec_report;
  throw ConfigError("unknown command '" + command + "'");
}

fs::path resolve_out(const std::string& out, const std::string& command, const ordered_json& cfg) {
  if (!out.empty()) return absolute(out);
  const char* root = std::getenv(kOutputRootEnv);
  if (root == nullptr || *root == '\0') {
    throw ConfigError(std::string("--out is required when ") + kOutputRootEnv + " is not set");
  }
  return fs::path(root) / (command + "-" + hex32(string_crc32(cfg.dump())));
}

int execute(const std::string& command, const ordered_json& cfg, const std::string& out, std::size_t threads) {
  const Exec exec = lookup(command);
  RunContext ctx{resolve_out(out, command, cfg), threads};
  fs::create_directories(ctx.out);
  Manifest m;
  m.command = command;
  m.config = cfg;
  const auto start = std::chrono::steady_clock::now();
  const int code = exec(cfg, ctx, m);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(ctx.out / files::kManifest, m.to_json(ctx.out, threads, seconds));
  if (code == kOk) std::cout << ctx.out.string() << "\n";
  return code;
}

int replay(const fs::path& manifest_path, const std::string& out, std::size_t threads) {
  const ordered_json manifest = read_config_file(manifest_path);
  for (const auto& input : manifest.at("inputs")) {
    const fs::path path = input.at("path").get<std::string>();
    if (!fs::exists(path)) throw ConfigError("replay: input " + path.string() + " no longer exists");
    if (hex32(file_crc32(path)) != input.at("crc32")) {
      throw ConfigError("replay: input " + path.string() + " changed since the recorded run");
    }
  }
  return execute(manifest.at("command"), manifest.at("config"), out, threads);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Attention temperature scaling: corpus generation, training, entropy sweeps and fairness search",
               "eat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string out, config_path, data, weights, grid, lexicon, placement, optimizer, sigmas, manifest;
  std::size_t threads = 1, train_size = 0, eval_pairs = 0, epochs = 0, batch_size = 0, trials = 0;
  std::uint64_t seed = 0, init_seed = 0;
  double shortcut = 0.0, learning_rate = 0.0, degradation = 0.0;
  std::vector<std::string> runs;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory (default: $" + std::string(kOutputRootEnv) + "/<command>-<hash>)");
    sub->add_option("--threads", threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  };

  CLI::App* gen = app.add_subcommand("gen", "Generate the synthetic corpus and counterfactual templates");
  common(gen);
  gen->add_option("--config", config_path, "Corpus config JSON");
  CLI::Option* gen_seed = gen->add_option("--seed", seed, "Corpus seed");
  CLI::Option* gen_placement = gen->add_option("--placement", placement, "Gendered word slot: anywhere|proximal|distal");
  CLI::Option* gen_shortcut = gen->add_option("--shortcut-strength", shortcut, "Gender/label link probability");
  CLI::Option* gen_train_size = gen->add_option("--train-size", train_size, "Sentences before splitting");
  CLI::Option* gen_pairs = gen->add_option("--eval-pairs", eval_pairs, "Counterfactual template pairs");
  gen->add_option("--lexicon", lexicon, "Lexicon JSON (default: built in)");

  CLI::App* train = app.add_subcommand("train", "Train the classifier on a generated corpus");
  common(train);
  train->add_option("--data", data, "Directory written by gen")->required();
  train->add_option("--config", config_path, "Train config JSON");
  CLI::Option* train_epochs = train->add_option("--epochs", epochs);
  CLI::Option* train_batch = train->add_option("--batch-size", batch_size);
  CLI::Option* train_lr = train->add_option("--lr", learning_rate);
  CLI::Option* train_opt = train->add_option("--optimizer", optimizer, "adam|sgd");
  CLI::Option* train_seed = train->add_option("--seed", seed, "Batch order seed");
  CLI::Option* train_init = train->add_option("--init-seed", init_seed, "Weight init seed (default: --seed)");

  CLI::App* sweep = app.add_subcommand("entropy-sweep", "Attention entropy, AUC and DP across temperatures");
  common(sweep);
  sweep->add_option("--weights", weights)->required();
  sweep->add_option("--data", data)->required();
  sweep->add_option("--config", config_path, "JSON with a beta_grid array");
  CLI::Option* sweep_grid = sweep->add_option("--grid", grid, "Comma-separated temperatures; must contain 1");

  CLI::App* search = app.add_subcommand("eat-search", "Select the temperature maximizing validation DP");
  common(search);
  search->add_option("--weights", weights)->required();
  search->add_option("--data", data)->required();
  search->add_option("--config", config_path, "Search config JSON");
  CLI::Option* search_grid = search->add_option("--grid", grid, "Comma-separated temperatures; must contain 1");
  CLI::Option* search_deg = search->add_option("--max-auc-degradation", degradation);

  CLI::App* perturb = app.add_subcommand("perturb-search", "Random weight perturbation baseline");
  common(perturb);
  perturb->add_option("--weights", weights)->required();
  perturb->add_option("--data", data)->required();
  perturb->add_option("--config", config_path, "JSON with sigma_grid, trials, seed, max_auc_degradation");
  CLI::Option* perturb_sigmas = perturb->add_option("--sigmas", sigmas, "Comma-separated noise scales");
  CLI::Option* perturb_trials = perturb->add_option("--trials", trials);
  CLI::Option* perturb_seed = perturb->add_option("--seed", seed);
  CLI::Option* perturb_deg = perturb->add_option("--max-auc-degradation", degradation);

  CLI::App* report = app.add_subcommand("report", "Compare vanilla, EAT and perturbation runs");
  common(report);
  report->add_option("runs", runs, "Output directories of train, eat-search or perturb-search")->required();

  CLI::App* rerun = app.add_subcommand("replay", "Re-run a command from its manifest");
  common(rerun);
  rerun->add_option("manifest", manifest, "manifest.json of an earlier run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsageError;
  }

  try {
    auto from_file = [&](ordered_json fallback) {
      return config_path.empty() ? fallback : read_config_file(config_path);
    };
    ordered_json cfg;
    std::string command;
    if (*gen) {
      command = "gen";
      CorpusConfig c = CorpusConfig::from_json(from_file(CorpusConfig{}.to_json()));
      if (*gen_seed) c.seed = seed;
      if (*gen_placement) c.placement = parse_gender_placement(placement);
      if (*gen_shortcut) c.shortcut_strength = shortcut;
      if (*gen_train_size) c.train_size = train_size;
      if (*gen_pairs) c.eval_pairs = eval_pairs;
      cfg["corpus"] = c.to_json();
      cfg["lexicon"] = lexicon.empty() ? ordered_json() : ordered_json(absolute(lexicon));
    } else if (*train) {
      command = "train";
      const ordered_json file = from_file(TrainConfig{}.to_json());
      TrainConfig t = TrainConfig::from_json(file);
      if (*train_epochs) t.epochs = epochs;
      if (*train_batch) t.batch_size = batch_size;
      if (*train_lr) t.learning_rate = learning_rate;
      if (*train_opt) t.optimizer = parse_optimizer(optimizer);
      if (*train_seed) t.seed = seed;
      std::uint64_t init = file.contains("init_seed") ? config_value<std::uint64_t>(file, "init_seed") : t.seed;
      if (*train_init) init = init_seed;
      const Data d = open_data(data);
      t.model.vocab_size = d.vocab_size;
      t.model.max_len = d.corpus.max_len;
      cfg["data"] = absolute(data);
      cfg["train"] = t.to_json();
      cfg["init_seed"] = init;
    } else if (*sweep) {
      command = "entropy-sweep";
      const ordered_json file = from_file({{"beta_grid", default_beta_grid()}});
      cfg["weights"] = absolute(weights);
      cfg["data"] = absolute(data);
      cfg["beta_grid"] = *sweep_grid ? parse_list(grid, "--grid") : config_value<std::vector<double>>(file, "beta_grid");
    } else if (*search) {
      command = "eat-search";
      SearchConfig s = SearchConfig::from_json(from_file(SearchConfig{}.to_json()));
      if (*search_grid) s.beta_grid = parse_list(grid, "--grid");
      if (*search_deg) s.max_auc_degradation = degradation;
      cfg["weights"] = absolute(weights);
      cfg["data"] = absolute(data);
      cfg["search"] = s.to_json();
    } else if (*perturb) {
      command = "perturb-search";
      ordered_json defaults;
      // Ten scales times ten trials plus the baseline: the 101 evaluations of the default temperature grid.
      defaults["sigma_grid"] = {0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5};
      defaults["trials"] = 10;
      defaults["seed"] = 0;
      defaults["max_auc_degradation"] = 0.03;
      ordered_json file = from_file(defaults);
      for (const auto& [key, value] : defaults.items()) {
        if (!file.contains(key)) file[key] = value;
      }
      cfg["weights"] = absolute(weights);
      cfg["data"] = absolute(data);
      cfg["sigma_grid"] = *perturb_sigmas ? parse_list(sigmas, "--sigmas") : config_value<std::vector<double>>(file, "sigma_grid");
      cfg["trials"] = *perturb_trials ? trials : config_value<std::size_t>(file, "trials");
      cfg["seed"] = *perturb_seed ? seed : config_value<std::uint64_t>(file, "seed");
      cfg["max_auc_degradation"] = *perturb_deg ? degradation : config_value<double>(file, "max_auc_degradation");
    } else if (*report) {
      command = "report";
      cfg["runs"] = ordered_json::array();
      for (const auto& r : runs) cfg["runs"].push_back(absolute(r));
    } else {
      return replay(manifest, out, threads);
    }
    return execute(command, cfg, out, threads);
  } catch (const ConfigError& e) {
    std::cerr << "eat: config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "eat: error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("eat");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace eat::cli
