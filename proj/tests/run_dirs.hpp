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

// Helpers for comparing CLI output directories.

#ifndef EAT_TESTS_RUN_DIRS_HPP_
#define EAT_TESTS_RUN_DIRS_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

namespace eat::testing {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline nlohmann::ordered_json read_manifest(const std::filesystem::path& dir) {
  auto j = nlohmann::ordered_json::parse(read_file(dir / "manifest.json"));
  j.erase("runtime");
  return j;
}

// Empty when every file matches byte for byte (manifests compared without
// their runtime block); otherwise the first differing file name.
inline std::string first_difference(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::map<std::string, std::string> left, right;
  for (const auto& e : std::filesystem::directory_iterator(a)) left[e.path().filename().string()] = "";
  for (const auto& e : std::filesystem::directory_iterator(b)) right[e.path().filename().string()] = "";
  if (left.size() != right.size()) return "<file set>";
  for (const auto& [name, unused] : left) {
    if (!right.contains(name)) return name;
    if (name == "manifest.json") {
      if (read_manifest(a) != read_manifest(b)) return name;
    } else if (read_file(a / name) != read_file(b / name)) {
      return name;
    }
  }
  return "";
}

inline std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace eat::testing

#endif  // EAT_TESTS_RUN_DIRS_HPP_
