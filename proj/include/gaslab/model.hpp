#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaslab/grid.hpp"
#include "gaslab/policy.hpp"

namespace gaslab {

// ---------------------------------------------------------------------------
// Function catalogs. Configs pick named entries instead of supplying code,
// which keeps scenarios declarative and the hot loops inlineable.
// ---------------------------------------------------------------------------

struct LinearDynamics {
    double state_coef = 1.0;
    double control_coef = 0.0;

    double operator()(double x, double u) const {
        return state_coef * x + control_coef * u;
    }
};

struct AffineObservation {
    double slope = 0.0;      // slope 0 = uninformative channel
    double intercept = 0.0;  // slope 1, intercept 0 = identity

    double operator()(double x) const { return slope * x + intercept; }
};

struct QuadraticRunningCost {
    double state_weight = 0.0;
    double control_weight = 0.0;

    double operator()(double x, double u) const {
        return state_weight * x * x + control_weight * u * u;
    }
};

struct TerminalCost {
    enum class Kind { zero, quadratic, target_well };

    Kind kind = Kind::zero;
    double weight = 0.0;  // quadratic coefficient, or well depth
    double center = 0.0;  // quadratic center, or well location
    double width = 1.0;   // well width

    double operator()(double x) const {
        switch (kind) {
            case Kind::zero:
                return 0.0;
            case Kind::quadratic:
                return weight * (x - center) * (x - center);
            case Kind::target_well: {
                const double z = (x - center) / width;
                return -weight * std::exp(-z * z);
            }
        }
        return 0.0;
    }

    static TerminalCost zero() { return {}; }
    static TerminalCost quadratic(double weight, double center = 0.0) {
        return {Kind::quadratic, weight, center, 1.0};
    }
    static TerminalCost target_well(double center, double width, double depth) {
        return {Kind::target_well, depth, center, width};
    }
};

// ---------------------------------------------------------------------------

/// The controlled system: dynamics, observation channel, costs, noises and
/// priors, all on compact grids. Immutable once validated; share freely.
struct SystemModel {
    GridPtr state_grid;
    GridPtr obs_grid;
    int horizon = 0;                             // K
    std::vector<std::vector<double>> controls;   // U_k, one set per stage

    LinearDynamics dynamics;                     // b
    AffineObservation observation;               // h
    QuadraticRunningCost running_cost;           // L
    TerminalCost dm_terminal;                    // Phi
    TerminalCost gaslighter_terminal;            // Gamma
    double risk = 1.0;                           // mu > 0

    std::optional<GridDensity> process_noise;    // psi, on the increment grid
    std::optional<GridDensity> obs_noise;        // phi, strictly positive
    std::optional<GridDensity> prior;            // rho
    std::optional<GridDensity> gaslit_prior;     // rho°; defaults to rho

    const GridDensity& psi() const { return *process_noise; }
    const GridDensity& phi() const { return *obs_noise; }
    const GridDensity& rho() const { return *prior; }
    const GridDensity& rho_gaslit() const {
        return gaslit_prior ? *gaslit_prior : *prior;
    }

    const std::vector<double>& control_set(int stage) const {
        return controls[static_cast<std::size_t>(stage)];
    }

    double exp_running_cost(double x, double u) const {
        return std::exp(risk * running_cost(x, u));
    }

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
};

/// A per-stage sequence of substituted observation densities phi°_1..phi°_K
/// (stages[k-1] feeds observation y_k) plus the design-cost scale t.
struct GaslightEffort {
    std::vector<GridDensity> stages;
    double design_cost_scale = 1.0;  // t

    int horizon() const { return static_cast<int>(stages.size()); }
    const GridDensity& stage(int k) const {  // k is 1-based
        return stages[static_cast<std::size_t>(k - 1)];
    }
};

/// Observation-sampling measures: nominal is the physical channel
/// y_{k+1} = h(x_k) + v_k; gaslit draws y_k ~ phi°_k i.i.d. (state
/// independent); reference draws y_k ~ phi i.i.d.
enum class SamplingMode { nominal, gaslit, reference };

std::string to_string(SamplingMode mode);

struct Trajectory {
    std::vector<double> states;        // x_0..x_K
    std::vector<double> observations;  // y_1..y_K
    std::vector<double> controls;      // u_0..u_{K-1}
    SamplingMode mode = SamplingMode::nominal;
    std::uint64_t seed = 0;
    int state_clamps = 0;  // asserted zero on the canonical scenario
    int obs_clamps = 0;    // reported only; nominal mode can graze the edge
};

/// Runs one seeded trajectory. The information state is filtered online with
/// the operator matching the mode (gaslit operator iff an effort is given)
/// so that feedback policies see the DM's realized perceptions.
Trajectory simulate(const SystemModel& model, const ControlPolicy& policy,
                    const GaslightEffort* effort, SamplingMode mode,
                    std::uint64_t seed);

/// exp(mu (sum_i L(x_i, u_i) + Phi(x_K))); strictly positive.
double pathwise_cost(const SystemModel& model, const Trajectory& traj);

/// Z_k = prod_{i=1..k} phi(y_i - h(x_{i-1})) / phi(y_i); k = 0 gives 1.
double likelihood_ratio(const SystemModel& model, const Trajectory& traj, int k);

}  // namespace gaslab
