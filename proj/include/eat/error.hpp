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

#ifndef EAT_ERROR_HPP_
#define EAT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace eat {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix or tensor shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated, or incompatible file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

// User-facing configuration problems (bad ratios, missing baseline, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eat

#endif  // EAT_ERROR_HPP_
