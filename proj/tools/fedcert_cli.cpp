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


// Command-line front end: fedcert simulate|certify|verify|emit-plots.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fedcert/common.hpp"
#include "fedcert/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned jobs = 1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "experiment configuration (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "master seed (overrides seed)");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials (overrides verify.trials)")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_flag("-q,--quiet", f.quiet, "suppress progress output");
}

fedcert::RunOptions options_from(const CLI::App& cmd, const Flags& f) {
  fedcert::RunOptions o;
  if (cmd.count("--out")) o.out = f.out;
  if (cmd.count("--seed")) o.seed = f.seed;
  if (cmd.count("--trials")) o.trials = f.trials;
  o.jobs = f.jobs;
  o.quiet = f.quiet;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedcert: certified risk bounds for federated models under meta-distribution shift"};
  app.require_subcommand(1);
  Flags flags;
  std::string results_dir;

  auto* simulate = app.add_subcommand("simulate", "generate the source world and export it");
  auto* certify = app.add_subcommand("certify", "query clients and write certificates, curves and targets");
  auto* verify = app.add_subcommand("verify", "run coverage experiments and the tightness probe");
  auto* plots = app.add_subcommand("emit-plots", "join certificates with target curves into tidy CSVs");
  for (auto* cmd : {simulate, certify, verify}) add_common(cmd, flags, true);
  add_common(plots, flags, false);
  plots->add_option("results_dir", results_dir, "results directory (defaults to --out or the config output_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other usage error is a config error.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fedcert::exit_code::kConfig;
  }

  try {
    if (plots->parsed()) {
      const auto opts = options_from(*plots, flags);
      std::filesystem::path dir = results_dir;
      if (dir.empty() && opts.out) dir = *opts.out;
      if (dir.empty() && !flags.config.empty()) dir = fedcert::load_config(flags.config).output_dir;
      if (dir.empty()) dir = "out";
      return fedcert::cmd_emit_plots(dir, opts);
    }
    CLI::App* cmd = simulate->parsed() ? simulate : certify->parsed() ? certify : verify;
    const auto opts = options_from(*cmd, flags);
    const auto cfg = fedcert::apply_overrides(fedcert::load_config(flags.config), opts);
    if (cmd == simulate) return fedcert::cmd_simulate(cfg, opts);
    if (cmd == certify) return fedcert::cmd_certify(cfg, opts);
    return fedcert::cmd_verify(cfg, opts);
  } catch (const fedcert::BudgetExceeded& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return fedcert::exit_code::kBudget;
  } catch (const fedcert::ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return fedcert::exit_code::kConfig;
  } catch (const nlohmann::json::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return fedcert::exit_code::kConfig;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return fedcert::exit_code::kConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return fedcert::exit_code::kConfig;
  }
}
