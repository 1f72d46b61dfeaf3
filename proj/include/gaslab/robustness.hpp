#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/filter.hpp"
#include "gaslab/model.hpp"
#include "gaslab/policy.hpp"

namespace gaslab {

/// Constants feeding every deviation bound. `zeta` caps the L1 norm of any
/// admissible information state; the analytic form compounds the worst-case
/// one-step growth factor c/phi_min over the horizon.
struct RobustnessConstants {
    double phi_hat = 0.0;       // max_y phi(y)
    double phi_min = 0.0;       // min_y phi(y)
    double exp_cost_max = 0.0;  // l = max exp(mu L)
    double contraction = 0.0;   // c = phi_hat * l
    double zeta = 0.0;
    double e_phi = 0.0;         // max exp(mu Phi)
    double e_gamma = 0.0;       // max exp(mu Gamma)
    double vol_y = 0.0;         // length of the observation interval
    double d0 = 0.0;            // L1 distance between the two priors
};

enum class ZetaMode { analytic, empirical };

/// Enumerates grids and control sets for phi_hat, l, e_Phi, e_Gamma. The
/// empirical zeta doubles the largest observed ||sigma_k|| over a budget of
/// reference-mode runs; the analytic cap is the default everywhere a bound
/// must hold for all admissible states.
RobustnessConstants compute_constants(const SystemModel& model,
                                      ZetaMode mode = ZetaMode::analytic,
                                      int trial_budget = 10000,
                                      std::uint64_t seed = 1);

/// One-step contraction coefficient phi_hat * l / phi(y).
double lemma1_factor(const SystemModel& model, const RobustnessConstants& k,
                     double y);

struct CheckPair {
    double actual = 0.0;
    double bound = 0.0;
};

/// actual = d(update(sigma_bar), update(sigma_hat)); bound = factor * d.
CheckPair lemma1_check(const SystemModel& model, const RobustnessConstants& k,
                       const InformationState& sigma_bar,
                       const InformationState& sigma_hat, double u, double y);

/// phi_hat * l * zeta * |1/phi°(y) - 1/phi(y)|.
double lemma2_bound(const SystemModel& model, const RobustnessConstants& k,
                    double y, const GridDensity& effort_k);

/// actual = d(gaslit update, nominal update) of the same sigma
/// (requires ||sigma|| <= zeta).
CheckPair lemma2_check(const SystemModel& model, const RobustnessConstants& k,
                       const InformationState& sigma, double u, double y,
                       const GridDensity& effort_k);

/// Stage-wise deviation bounds d~_1..d~_k via the one-step recursion
///   d~_{k+1} = c d~_k / phi(y_{k+1}) + c zeta Y_{k+1}(y_{k+1}).
/// The closed-form sum is evaluated alongside and must agree to relative
/// 1e-10 (algebraic identity; a mismatch throws).
std::vector<double> theorem1_bound(const SystemModel& model,
                                   const RobustnessConstants& k,
                                   std::span<const double> observations,
                                   const GaslightEffort& effort);

/// Closed-form variant, exposed for the identity test.
std::vector<double> theorem1_closed_form(const SystemModel& model,
                                         const RobustnessConstants& k,
                                         std::span<const double> observations,
                                         const GaslightEffort& effort);

struct Theorem2Result {
    double lhs = 0.0;  // J(sigma°_K) - J(sigma_K) estimate
    double rhs = 0.0;  // e_Phi E†[d~_K] estimate
    double lhs_se = 0.0;
    double rhs_se = 0.0;
};

/// Common-random-number estimate of both sides of the value-deviation bound
/// under the reference measure. Controls are produced by the policy fed with
/// the gaslit branch and shared with the nominal branch.
Theorem2Result theorem2_check(const SystemModel& model,
                              const RobustnessConstants& k,
                              const GaslightEffort& effort,
                              const ControlPolicy& policy, int n_trials,
                              std::uint64_t seed);

enum class Theorem3Form { paper, volume_corrected };

/// e_Phi (c^K d0 + s sum_{i=1}^{K-1} c^i). The volume-corrected form
/// replaces c by c*vol_Y in the d0-propagation term, which is what the
/// expectation step actually produces when the interval length exceeds one.
double theorem3_bound(const RobustnessConstants& k, double s, int horizon,
                      Theorem3Form form);

// ---------------------------------------------------------------------------
// Randomized harnesses
// ---------------------------------------------------------------------------

struct BoundRecord {
    std::string kind;
    int trial = 0;
    int stage = 0;
    double actual = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // bound - actual
};

struct BoundReport {
    std::vector<BoundRecord> records;

    int violations(double slack_tol = 1e-9) const;
    double min_slack() const;
};

BoundReport lemma1_harness(const SystemModel& model,
                           const RobustnessConstants& k, int n_instances,
                           std::uint64_t seed);

/// Cycles through the supplied stage densities.
BoundReport lemma2_harness(const SystemModel& model,
                           const RobustnessConstants& k,
                           std::span<const GridDensity> efforts,
                           int n_instances, std::uint64_t seed);

/// Runs both filters on shared observations/controls and compares the
/// realized d_k against d~_k at every stage.
BoundReport theorem1_harness(const SystemModel& model,
                             const RobustnessConstants& k,
                             const GaslightEffort& effort, int n_trials,
                             std::uint64_t seed);

}  // namespace gaslab
