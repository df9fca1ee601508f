// Licensed under the Apache License, Version 2.0 (the 'License');
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an 'AS IS' BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The capbias Authors.
// Exception types shared by every capbias module.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace capbias {

// Base of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied bad input (bad file contents, bad flags, bad config).
// The CLI maps every subclass to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t byte_offset,
             const std::string& what)
      : InputError(source + ": parse error at byte " +
                   std::to_string(byte_offset) + ": " + what),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class IntegrityError : public InputError {
 public:
  IntegrityError(const std::string& what, std::vector<std::int64_t> ids)
      : InputError(what + format_ids(ids)), ids_(std::move(ids)) {}

  const std::vector<std::int64_t>& ids() const { return ids_; }

 private:
  static std::string format_ids(const std::vector<std::int64_t>& ids) {
    std::string s = " [";
    const std::size_t shown = ids.size() < 20 ? ids.size() : 20;
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) s += ", ";
      s += std::to_string(ids[i]);
    }
    if (shown < ids.size())
      s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s + "]";
  }

  std::vector<std::int64_t> ids_;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class LookupError : public InputError {
 public:
  using InputError::InputError;
};

// An evaluation split overlaps the split a bias profile was trained on.
class ContaminationError : public InputError {
 public:
  using InputError::InputError;
};

// A 2x2 table with a zero row or column marginal.
class DegenerateTableError : public InputError {
 public:
  using InputError::InputError;
};

// A precondition of a pure function was violated by its caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace capbias
