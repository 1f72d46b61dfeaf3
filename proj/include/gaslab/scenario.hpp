#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaslab/model.hpp"

namespace gaslab {

struct GridSpec {
    double lower = 0.0;
    double upper = 1.0;
    int n_points = 2;
};

struct NoiseSpec {
    enum class Family { truncated_normal, uniform };

    Family family = Family::truncated_normal;
    double location = 0.0;
    double scale = 1.0;
    // Zeroing the endpoint values keeps the density supported strictly inside
    // its interval; with increment spacing equal to the state spacing this
    // makes the discrete kernel mass exactly one for interior shifts.
    bool zero_endpoints = false;

    GridDensity build(const GridPtr& grid) const;
};

/// Parametric perturbations of phi used as gaslighting candidates. Both
/// families multiply phi by a bounded factor that fades to one at the grid
/// edges, so the ratio phi/phi° stays bounded and the stealth integral finite.
struct EffortSpec {
    enum class Kind { nominal, bump, tilt };

    std::string id = "nominal";
    Kind kind = Kind::nominal;
    double amplitude = 0.0;  // bump/tilt strength; bump needs amplitude > -1
    double center = 0.0;     // bump center
    double width = 0.1;      // bump half-width / tilt ramp half-width
    double margin = 0.0;     // tilt edge margin

    GridDensity build(const GridDensity& phi) const;
};

/// A finite list of candidate stage densities; the nominal phi is always
/// entry 0.
struct EffortMenu {
    std::vector<std::string> ids;
    std::vector<GridDensity> densities;

    int size() const { return static_cast<int>(densities.size()); }
    static constexpr int nominal_index = 0;
};

/// Everything a command needs to run an experiment: the model, the
/// gaslighter's candidate family, trust/design parameters, numeric budgets
/// and trial counts. Serializes to/from JSON in the cli layer.
struct ScenarioConfig {
    std::string name = "unnamed";

    // model
    GridSpec state_grid;
    GridSpec obs_grid;
    GridSpec increment_grid;
    int horizon = 1;
    std::vector<double> control_values{0.0};  // replicated across stages
    LinearDynamics dynamics;
    AffineObservation observation;
    QuadraticRunningCost running_cost;
    TerminalCost dm_terminal;
    TerminalCost gaslighter_terminal;
    double risk = 1.0;
    NoiseSpec process_noise;
    NoiseSpec obs_noise;
    NoiseSpec prior;
    std::optional<NoiseSpec> gaslit_prior;

    // gaslighter
    std::vector<EffortSpec> menu;  // non-nominal candidates
    double trust_level = 1.0;      // s
    double design_cost_scale = 1.0;  // t
    std::vector<double> epsilons{0.05};  // per stage; broadcast if length 1

    // numerics and budgets
    int obs_quadrature_nodes = 5;
    double tie_tolerance = 1e-9;
    int alpha_budget = 20000;
    long policy_tree_budget = 1000000;
    int menu_sequence_budget = 400;

    // trial counts
    int cost_trials = 100000;
    int bound_trials = 1000;
    int theorem2_trials = 10000;
    int ess_sigma_samples = 256;
    int ess_obs_trials = 4000;
    int simulate_trials = 100;
    SamplingMode simulate_mode = SamplingMode::nominal;
    std::string simulate_effort_id = "nominal";  // stage density in gaslit mode
    int objective_trials = 20000;
    int w_check_forward = 200;
    int w_check_rollouts = 50;

    std::uint64_t base_seed = 1;

    std::vector<double> stage_epsilons() const;
};

SystemModel build_model(const ScenarioConfig& config);
EffortMenu build_menu(const ScenarioConfig& config, const SystemModel& model);

/// Constant effort sequence: the same stage density at every stage.
GaslightEffort repeat_effort(const GridDensity& d, int horizon, double t);

namespace scenarios {

/// The workhorse scenario: state grid [-2,2]x33, observations on [0,1]x33,
/// K = 3, three controls, truncated-normal noises, mu = 0.2.
ScenarioConfig canonical();

/// Same system with observations on [-1,1] (interval length 2), exercising
/// the volume-corrected deviation bound.
ScenarioConfig canonical_wide();

/// One-stage, zero-running-cost scenario for the stealthiness chain,
/// including a deliberately detectable candidate.
ScenarioConfig ess_chain();

/// Two-stage, zero-running-cost scenario in which shifted perceptions make
/// the DM steer the state into the gaslighter's favored well.
ScenarioConfig equilibrium();

/// Same scenario with only the nominal candidate in the menu.
ScenarioConfig equilibrium_nominal();

/// Small randomized instance for solver cross-checks (3-node state grid,
/// two controls, K = 2).
ScenarioConfig tiny(std::uint64_t seed);

ScenarioConfig by_name(const std::string& name);

}  // namespace scenarios

}  // namespace gaslab
