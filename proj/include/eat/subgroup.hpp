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

#ifndef EAT_SUBGROUP_HPP_
#define EAT_SUBGROUP_HPP_

#include <compare>
#include <string>

namespace eat {

// Identity subgroup label, e.g. {"religion", "muslim"}.
struct Subgroup {
  std::string family;
  std::string tag;
  auto operator<=>(const Subgroup&) const = default;
};

}  // namespace eat

#endif  // EAT_SUBGROUP_HPP_
