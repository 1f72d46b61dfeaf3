#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gaslab/grid.hpp"
#include "gaslab/model.hpp"
#include "gaslab/policy.hpp"

namespace gaslab {

/// One-step information-state operator with the nominal channel:
///   out(z) = (1/phi(y)) sum_xi w_xi psi(z - b(xi,u)) e^{mu L(xi,u)}
///            phi(y - h(xi)) sigma(xi)
/// States are never renormalized between stages; the unnormalized mass is
/// what the risk-sensitive cost representation integrates.
InformationState info_state_update(const SystemModel& model,
                                   const InformationState& sigma, double u,
                                   double y);

/// Same kernel with the divisor replaced by the effort density at y;
/// equals (phi(y)/phi°(y)) times the nominal update.
InformationState gaslit_update(const SystemModel& model,
                               const InformationState& sigma, double u,
                               double y, const GridDensity& effort_k);

struct FilterRun {
    std::vector<InformationState> states;  // sigma_0..sigma_K
    std::vector<double> controls;
    std::vector<double> observations;
    bool used_effort = false;
};

/// Runs the recursion from the prior (the gaslit prior when an effort is
/// given). controls and observations must both have length K.
FilterRun run_filter(const SystemModel& model,
                     const std::vector<double>& controls,
                     const std::vector<double>& observations,
                     const GaslightEffort* effort);

/// <sigma_K, exp(mu Phi)> — the terminal pairing of the cost representation.
double terminal_functional(const SystemModel& model,
                           const InformationState& sigma_k);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    int n_trials = 0;
};

/// DM cost through the information-state representation: observations drawn
/// i.i.d. from phi (the reference measure), online filtering (gaslit operator
/// when an effort is present), policy-generated controls.
MonteCarloEstimate cost_info_state(const SystemModel& model,
                                   const ControlPolicy& policy,
                                   const GaslightEffort* effort, int n_trials,
                                   std::uint64_t seed);

/// DM cost straight from Monte Carlo trajectories of the physical system
/// (nominal mode), averaging pathwise exponential costs.
MonteCarloEstimate cost_direct(const SystemModel& model,
                               const ControlPolicy& policy, int n_trials,
                               std::uint64_t seed);

}  // namespace gaslab
