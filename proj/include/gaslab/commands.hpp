#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaslab/scenario.hpp"

namespace gaslab {

struct RunReport {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;  // only field that varies between reruns
    std::vector<std::string> outputs;
};

struct CommandOptions {
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    bool strict = false;  // promote reported-only checks to assertions
};

struct CommandOutcome {
    int exit_code = 0;  // 0 ok, 1 assertion violation
    RunReport report;
    std::vector<std::string> failures;
};

/// Trajectory rollouts under the configured sampling mode with the DM's
/// best-response policy. Emits simulate.csv (trial, stage, x, y, u,
/// sigma_mass).
CommandOutcome cmd_simulate(const ScenarioConfig& config,
                            const std::string& out_dir,
                            const CommandOptions& options = {});

/// Lemma and theorem harnesses over the certified menu. Emits bounds.csv and
/// verify_bounds.json; nonzero exit iff an asserted bound is violated.
CommandOutcome cmd_verify_bounds(const ScenarioConfig& config,
                                 const std::string& out_dir,
                                 const CommandOptions& options = {});

/// Stage-wise stealth certification of every menu candidate. Emits
/// stealth.json; nonzero exit iff the sufficient condition passes somewhere
/// the empirical estimator rejects (the chain must be sound).
CommandOutcome cmd_stealth(const ScenarioConfig& config,
                           const std::string& out_dir,
                           const CommandOptions& options = {});

/// Best-response solve with the alpha recursion, cross-checked against the
/// policy-tree oracle when the instance fits the tree budget. Emits
/// alphas.json.
CommandOutcome cmd_solve(const ScenarioConfig& config,
                         const std::string& out_dir,
                         const CommandOptions& options = {});

/// Full Stackelberg search over the menu product. Emits equilibrium.json and
/// candidates.csv, including the cost lower estimates and the stage-value
/// consistency check of the chosen effort.
CommandOutcome cmd_equilibrium(const ScenarioConfig& config,
                               const std::string& out_dir,
                               const CommandOptions& options = {});

/// Parses CLI arguments (command, --config, --out, --seed, --threads,
/// --strict), runs the command, writes run_report.json. Exit codes:
/// 0 success, 1 assertion violation, 2 config error, 3 budget exceeded.
int run_cli(const std::vector<std::string>& args);

}  // namespace gaslab
