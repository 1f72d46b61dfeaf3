#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaslab/dp.hpp"
#include "gaslab/model.hpp"
#include "gaslab/robustness.hpp"
#include "gaslab/scenario.hpp"
#include "gaslab/stealth.hpp"

namespace gaslab {

struct ObjectiveEstimate {
    double value = 0.0;      // I(phi°) = gaslit - gamma + sum H
    double std_error = 0.0;  // from the paired per-trial differences
    double gaslit_term = 0.0;
    double gamma_term = 0.0;
    double h_total = 0.0;
};

/// Both expectations are taken under state-independent i.i.d. observation
/// draws (phi° for the gaslit term, phi for the normalizing term), matching
/// the definition of the design objective; common per-trial seeds couple the
/// two estimates.
ObjectiveEstimate gaslighter_objective(const SystemModel& model,
                                       const GaslightEffort& effort,
                                       const ControlPolicy& dm_policy,
                                       const ControlPolicy& nominal_policy,
                                       int n_trials, std::uint64_t seed);

struct WCheckResult {
    std::vector<double> w;          // W_k estimates, k = 0..K
    std::vector<double> w_se;
    std::vector<double> tower_gap;  // W_k - (H_{k+1} + E[W_{k+1}]), k < K
    std::vector<double> tower_se;
};

/// Estimates the gaslighter's stage values by rollouts from (x_k, sigma°_k)
/// pairs harvested from forward runs, and checks the tower identity with the
/// design cost paid on each transition. Independent draw streams make the
/// identity a genuine nested-Monte-Carlo check rather than a tautology.
WCheckResult w_recursion_check(const SystemModel& model,
                               const GaslightEffort& effort,
                               const ControlPolicy& dm_policy, int n_forward,
                               int n_rollouts, std::uint64_t seed);

enum class Theorem5Form { paper, conservative };

/// Lower estimate of the stealthy gaslighter's cost,
///   -e_Gamma (phi_hat^K d0 + s sum_{i=1}^{K-1} phi_hat^i) [+ K t s_bar].
/// The paper form keeps the design-cost term; the conservative form drops it
/// (the sum of design costs is only guaranteed nonnegative).
double theorem5_bound(const RobustnessConstants& constants, double s, double t,
                      int horizon, Theorem5Form form);

struct CandidateRow {
    std::vector<int> stage_entries;     // menu index per stage
    std::vector<std::string> stage_ids;
    bool stealth_pass = false;
    bool evaluated = false;
    double objective = 0.0;
    double std_error = 0.0;
    double gaslit_term = 0.0;
    double gamma_term = 0.0;
    double h_total = 0.0;
    double dm_value = 0.0;  // best-response value at the starting state
};

struct EquilibriumOptions {
    double trust_level = 1.0;        // s
    double design_cost_scale = 1.0;  // t
    std::vector<double> epsilons{0.05};
    int n_trials = 10000;
    std::uint64_t seed = 1;
    bool stealth_filter = true;
    DpOptions dp;
    long sequence_budget = 400;
    int coverage_points = 8;      // harvested pairs per stage
    int coverage_rollouts = 200;  // rollouts per (pair, candidate)
};

struct EquilibriumResult {
    std::vector<CandidateRow> rows;
    int chosen = -1;
    std::vector<std::string> chosen_ids;
    double chosen_objective = 0.0;
    double chosen_std_error = 0.0;
    double epsilon_used = 0.0;            // min over stages
    std::vector<double> epsilons;         // per stage, as configured
    std::vector<int> epsilon_dominated;   // rows within epsilon of the best
    double theorem5_paper = 0.0;
    double theorem5_conservative = 0.0;
    double coverage_fraction = -1.0;      // leader-side pointwise condition
    int coverage_checked = 0;
};

/// Exhaustive search over per-stage menu sequences: every certified sequence
/// is solved for the DM's feedback best response and evaluated by Monte
/// Carlo; the cheapest certified sequence is returned together with the full
/// table, the cost lower estimates and a sampled check of the leader-side
/// epsilon condition at harvested states.
EquilibriumResult search_equilibrium(const SystemModel& model,
                                     const EffortMenu& menu,
                                     const RobustnessConstants& constants,
                                     const EquilibriumOptions& options);

}  // namespace gaslab
