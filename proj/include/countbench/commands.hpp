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

// The countbench command line: plan, compose, simulate, score, viz, drift,
// validate and convert-fsc147. Every subcommand prints a single summary line
// of key=value pairs on success. Exit codes: 0 success, 1 input or I/O
// failure, 2 configuration error.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "countbench/core.hpp"

namespace countbench::cli {

inline constexpr std::string_view kVersion = "countbench/0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// Runs one invocation. args excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

// FNV-1a over the tool version, the canonical manifest JSON and the raw bytes
// of each plan file, as 16 lowercase hex digits.
std::string config_fingerprint(const Manifest& m, std::span<const std::string> plan_bytes);

}  // namespace countbench::cli
