// Copyright 2026 The countbench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace countbench {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or contract-violating input data (manifests, records, maps).
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (flags, plan settings). Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system failures: missing, unreadable or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Binary decoding failure at a known byte offset.
class FormatError : public InputError {
 public:
  FormatError(std::size_t offset, const std::string& detail, const std::string& source = {})
      : InputError((source.empty() ? std::string{} : source + ": ") + "at byte offset " + std::to_string(offset) +
                   ": " + detail),
        offset_(offset),
        detail_(detail) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t offset_;
  std::string detail_;
};

}  // namespace countbench
