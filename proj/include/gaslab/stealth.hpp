#pragma once

#include <cstdint>
#include <vector>

#include "gaslab/model.hpp"
#include "gaslab/robustness.hpp"

namespace gaslab {

/// Ratio-deviation budget of one stage density: quadrature of
/// |phi(y)/phi°(y) - 1| over the observation interval. Zero iff phi° = phi
/// on the grid.
double ess_sufficient_integral(const GridDensity& phi,
                               const GridDensity& effort_k);

/// Design cost H(phi°) = t * ess_sufficient_integral; H(phi) = 0 exactly.
double design_cost(const GridDensity& phi, const GridDensity& effort_k,
                   double t);

struct EssCheckResult {
    double lhs = 0.0;       // estimated sup E_phi[d(gaslit, nominal)]
    double std_error = 0.0; // Monte Carlo error at the attaining pair
    bool pass = false;      // lhs <= s + 4 std errors
    int argmax_control = 0;
};

/// Empirical estimate of the stage-wise stealthiness supremum. Controls are
/// enumerated exactly; the state supremum is sampled over random nonnegative
/// states, single-node spikes and filter-reachable shapes, all rescaled to
/// ||sigma|| = zeta (the deviation is positively homogeneous in sigma, so
/// the ball supremum sits on that sphere). The observation expectation is a
/// seeded Monte Carlo average with common draws across candidates, which is
/// what furnishes the returned standard error.
EssCheckResult ess_definition_check(const SystemModel& model,
                                    const GridDensity& effort_k, int stage_k,
                                    double s, const RobustnessConstants& k,
                                    int n_sigma_samples, int n_obs_trials,
                                    std::uint64_t seed);

struct StageStealth {
    int stage = 0;            // 1-based
    double integral = 0.0;    // sufficient-condition value
    double s_bar = 0.0;
    bool sufficient_pass = false;
    double ess_lhs = 0.0;     // empirical spot check
    double ess_se = 0.0;
    bool ess_pass = false;
};

struct StealthReport {
    double s = 0.0;
    double c_zeta = 0.0;  // c * zeta
    double s_bar = 0.0;   // s / (c zeta)
    std::vector<StageStealth> stages;
    bool pass = false;       // sufficient condition at every stage
    int failing_stage = 0;   // first failing stage (1-based), 0 when passing
};

struct StealthCheckBudget {
    int sigma_samples = 64;
    int obs_trials = 1500;
    std::uint64_t seed = 1;
};

/// Runs the sufficient integral for every stage of the effort and attaches
/// empirical spot checks of the stage-wise stealthiness definition.
StealthReport certify_effort(const SystemModel& model,
                             const GaslightEffort& effort, double s,
                             const RobustnessConstants& k,
                             const StealthCheckBudget& budget = {});

}  // namespace gaslab
