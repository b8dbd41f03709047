// Copyright 2026 The fedcert Authors
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedcert/client_query.hpp"
#include "fedcert/losses.hpp"
#include "fedcert/meta_sim.hpp"
#include "fedcert/oracle.hpp"

namespace fedcert {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kVerification = 2;
inline constexpr int kBudget = 3;
}  // namespace exit_code

/// A configuration problem, reported as "file:line: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundSpec {
  BoundRequest request;
  TargetShift shift;
};

struct TightnessConfig {
  std::string bound;
  std::vector<std::size_t> K;
  std::vector<std::size_t> n;
  std::size_t trials = 20;
};

struct VerifyConfig {
  std::size_t trials = 20;
  std::size_t target_clients = 500;
  std::vector<std::string> coverage;   // bound names; empty means all
  std::optional<TightnessConfig> tightness;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::uint64_t seed = 0;
  MetaConfig world;
  std::optional<std::filesystem::path> world_dir;   // external world to ingest
  std::vector<std::filesystem::path> pools;         // external per-client CSV datasets
  Hypothesis model;
  LossFn loss;
  std::size_t clients = 20;
  std::size_t samples = 50;
  std::size_t max_queries = 64;
  CostKind cost = CostKind::kHalfSquaredL2;
  std::vector<BoundSpec> bounds;
  std::size_t target_clients = 500;
  std::size_t risk_samples = 20000;
  VerifyConfig verify;
  std::filesystem::path output_dir = "out";
};

/// Parses and validates a configuration document. Relative paths inside it
/// resolve against the directory of `source`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  unsigned jobs = 1;
  bool quiet = false;
};

/// Applies command-line overrides to a loaded configuration.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& options);

/// Subcommands; each returns a process exit code. Files are written below
/// cfg.output_dir.
int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& options);
int cmd_certify(const ExperimentConfig& cfg, const RunOptions& options);
int cmd_verify(const ExperimentConfig& cfg, const RunOptions& options);
int cmd_emit_plots(const std::filesystem::path& results_dir, const RunOptions& options);

}  // namespace fedcert
