// Copyright 2026 The NRTW Authors. All Rights Reserved.
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

// The nrtw command line. Each invocation runs one subcommand and writes a
// run manifest next to its outputs.
//
// Settings come from, in increasing precedence: built-in defaults, the TOML
// file given by --config (one [subcommand] table per subcommand), and flags.

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace nrtw::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// argv[0] is the program name. Errors go to `err` as one JSON line
/// {"error": {"code", "message"}, "exit_code"}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Subcommand, resolved settings, seeds, hashed inputs and outputs, timings
/// and the versions of every file format involved.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::vector<std::string> argv);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);
  /// Hashes every regular file below `dir`.
  void output_tree(const std::filesystem::path& dir);
  void timing(const std::string& name, double seconds) { timings_[name] = seconds; }
  void result(const std::string& name, nlohmann::json value) { results_[name] = std::move(value); }

  nlohmann::json to_json() const;
  /// Stamps total wall time and writes atomically.
  void write(const std::filesystem::path& path);

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::object();
  nlohmann::json timings_ = nlohmann::json::object();
  nlohmann::json results_ = nlohmann::json::object();
};

}  // namespace nrtw::cli
