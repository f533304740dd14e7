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

#ifndef EAT_TOOLS_CLI_HPP_
#define EAT_TOOLS_CLI_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace eat::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "EAT_OUTPUT_ROOT";

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

// Entry point shared by the `eat` binary and the tests. Never throws.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

std::uint32_t file_crc32(const std::filesystem::path& path);

// Output file names written by each command.
namespace files {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kTrain = "train.jsonl";
inline constexpr const char* kValidation = "validation.jsonl";
inline constexpr const char* kTest = "test.jsonl";
inline constexpr const char* kTemplates = "templates.jsonl";
inline constexpr const char* kTemplatesValidation = "templates_validation.jsonl";
inline constexpr const char* kTemplatesTest = "templates_test.jsonl";
inline constexpr const char* kLexicon = "lexicon.json";
inline constexpr const char* kCorpusConfig = "corpus_config.json";
inline constexpr const char* kWeights = "weights.bin";
inline constexpr const char* kEpochLog = "epoch_log.jsonl";
inline constexpr const char* kTestReport = "test_report.json";
inline constexpr const char* kEntropySweep = "entropy_sweep.csv";
inline constexpr const char* kSearch = "search.json";
inline constexpr const char* kPerturbSearch = "perturb_search.json";
inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kReportMarkdown = "report.md";
}  // namespace files

}  // namespace eat::cli

#endif  // EAT_TOOLS_CLI_HPP_
