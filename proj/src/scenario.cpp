#include "gaslab/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

namespace {

double normal_pdf_unscaled(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z);
}

}  // namespace

GridDensity NoiseSpec::build(const GridPtr& grid) const {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    switch (family) {
        case Family::truncated_normal:
            for (int i = 0; i < grid->size(); ++i) {
                v[static_cast<std::size_t>(i)] =
                    normal_pdf_unscaled(grid->node(i), location, scale);
            }
            break;
        case Family::uniform:
            for (double& x : v) x = 1.0;
            break;
    }
    if (zero_endpoints) {
        v.front() = 0.0;
        v.back() = 0.0;
    }
    return normalize(GridFunction(grid, std::move(v)));
}

GridDensity EffortSpec::build(const GridDensity& phi) const {
    const Grid& g = *phi.grid();
    switch (kind) {
        case Kind::nominal:
            return phi;
        case Kind::bump: {
            if (!(amplitude > -1.0)) {
                throw std::invalid_argument("effort bump amplitude must exceed -1");
            }
            if (center - width < g.lower() || center + width > g.upper()) {
                throw std::invalid_argument("effort bump must sit strictly inside the obs interval");
            }
            std::vector<double> v(static_cast<std::size_t>(g.size()));
            for (int i = 0; i < g.size(); ++i) {
                const double y = g.node(i);
                double b = 0.0;
                if (std::abs(y - center) < width) {
                    const double c = std::cos(0.5 * M_PI * (y - center) / width);
                    b = c * c;
                }
                v[static_cast<std::size_t>(i)] = phi.value(i) * (1.0 + amplitude * b);
            }
            return normalize(GridFunction(phi.grid(), std::move(v)));
        }
        case Kind::tilt: {
            if (!(std::abs(amplitude) < 1.0)) {
                throw std::invalid_argument("effort tilt amplitude must lie in (-1,1)");
            }
            if (!(margin > 0.0)) {
                throw std::invalid_argument("effort tilt needs a positive edge margin");
            }
            const double mid = 0.5 * (g.lower() + g.upper());
            std::vector<double> v(static_cast<std::size_t>(g.size()));
            for (int i = 0; i < g.size(); ++i) {
                const double y = g.node(i);
                const double ramp = clamp_to((y - mid) / width, -1.0, 1.0);
                const double edge =
                    clamp_to(std::min(y - g.lower(), g.upper() - y) / margin, 0.0, 1.0);
                v[static_cast<std::size_t>(i)] =
                    phi.value(i) * (1.0 + amplitude * ramp * edge);
            }
            return normalize(GridFunction(phi.grid(), std::move(v)));
        }
    }
    throw std::logic_error("unknown effort kind");
}

std::vector<double> ScenarioConfig::stage_epsilons() const {
    if (epsilons.empty()) {
        throw std::invalid_argument("scenario: epsilons must not be empty");
    }
    if (static_cast<int>(epsilons.size()) == horizon) return epsilons;
    if (epsilons.size() == 1) {
        return std::vector<double>(static_cast<std::size_t>(horizon), epsilons[0]);
    }
    throw std::invalid_argument("scenario: epsilons must have length 1 or K");
}

SystemModel build_model(const ScenarioConfig& config) {
    SystemModel m;
    m.state_grid = make_grid(config.state_grid.lower, config.state_grid.upper,
                             config.state_grid.n_points);
    m.obs_grid = make_grid(config.obs_grid.lower, config.obs_grid.upper,
                           config.obs_grid.n_points);
    const GridPtr inc_grid =
        make_grid(config.increment_grid.lower, config.increment_grid.upper,
                  config.increment_grid.n_points);
    m.horizon = config.horizon;
    m.controls.assign(static_cast<std::size_t>(config.horizon),
                      config.control_values);
    m.dynamics = config.dynamics;
    m.observation = config.observation;
    m.running_cost = config.running_cost;
    m.dm_terminal = config.dm_terminal;
    m.gaslighter_terminal = config.gaslighter_terminal;
    m.risk = config.risk;
    m.process_noise = config.process_noise.build(inc_grid);
    m.obs_noise = config.obs_noise.build(m.obs_grid);
    m.prior = config.prior.build(m.state_grid);
    if (config.gaslit_prior) {
        m.gaslit_prior = config.gaslit_prior->build(m.state_grid);
    }
    m.validate();
    return m;
}

EffortMenu build_menu(const ScenarioConfig& config, const SystemModel& model) {
    EffortMenu menu;
    menu.ids.push_back("nominal");
    menu.densities.push_back(model.phi());
    for (const auto& spec : config.menu) {
        if (spec.kind == EffortSpec::Kind::nominal) continue;  // already present
        menu.ids.push_back(spec.id);
        menu.densities.push_back(spec.build(model.phi()));
    }
    return menu;
}

GaslightEffort repeat_effort(const GridDensity& d, int horizon, double t) {
    GaslightEffort e;
    e.stages.assign(static_cast<std::size_t>(horizon), d);
    e.design_cost_scale = t;
    return e;
}

namespace scenarios {

ScenarioConfig canonical() {
    ScenarioConfig c;
    c.name = "canonical";
    c.state_grid = {-2.0, 2.0, 33};
    c.obs_grid = {0.0, 1.0, 33};
    c.increment_grid = {-0.75, 0.75, 13};  // spacing matches the state grid
    c.horizon = 3;
    c.control_values = {-1.0, 0.0, 1.0};
    c.dynamics = {0.55, 0.25};
    c.observation = {0.04, 0.0};
    c.running_cost = {0.6, 0.25};
    c.dm_terminal = TerminalCost::quadratic(1.6);
    c.gaslighter_terminal = TerminalCost::target_well(-0.5, 0.5, 1.0);
    c.risk = 0.2;
    c.process_noise = {NoiseSpec::Family::truncated_normal, 0.0, 0.35, true};
    c.obs_noise = {NoiseSpec::Family::truncated_normal, 0.5, 0.14, false};
    c.prior = {NoiseSpec::Family::truncated_normal, 0.0, 0.4, true};

    c.menu = {
        {"bump+15@35", EffortSpec::Kind::bump, 0.15, 0.35, 0.20, 0.0},
        {"bump-15@65", EffortSpec::Kind::bump, -0.15, 0.65, 0.20, 0.0},
        {"bump+30@50", EffortSpec::Kind::bump, 0.30, 0.50, 0.25, 0.0},
        {"bump-25@50", EffortSpec::Kind::bump, -0.25, 0.50, 0.20, 0.0},
        {"tilt+20", EffortSpec::Kind::tilt, 0.20, 0.0, 0.20, 0.10},
        {"tilt-20", EffortSpec::Kind::tilt, -0.20, 0.0, 0.20, 0.10},
        {"bump+50@40", EffortSpec::Kind::bump, 0.50, 0.40, 0.15, 0.0},
        {"tilt+35", EffortSpec::Kind::tilt, 0.35, 0.0, 0.25, 0.08},
        {"bump-40@45", EffortSpec::Kind::bump, -0.40, 0.45, 0.15, 0.0},
        {"bump+25@60", EffortSpec::Kind::bump, 0.25, 0.60, 0.18, 0.0},
    };
    // s chosen so every menu candidate certifies with margin: s_bar = s/(c zeta)
    // sits above the largest stage integral of the menu (calibrated offline:
    // c zeta = 4.840e9, largest integral 0.258, s_bar = 0.303).
    c.trust_level = 1.47e9;
    c.design_cost_scale = 0.01;
    c.epsilons = {0.05};

    // three observation nodes keep the exact solve of this 33-node system
    // inside the alpha budget; the policy-tree oracle still certifies it
    c.obs_quadrature_nodes = 3;
    c.alpha_budget = 1000000;
    c.cost_trials = 100000;
    c.bound_trials = 1000;
    c.theorem2_trials = 10000;
    c.base_seed = 20240801;
    return c;
}

ScenarioConfig canonical_wide() {
    ScenarioConfig c = canonical();
    c.name = "canonical_wide";
    c.obs_grid = {-1.0, 1.0, 65};
    c.obs_noise = {NoiseSpec::Family::truncated_normal, 0.0, 0.24, false};
    c.menu = {
        {"bump+15@-30", EffortSpec::Kind::bump, 0.15, -0.30, 0.30, 0.0},
        {"bump-15@+30", EffortSpec::Kind::bump, -0.15, 0.30, 0.30, 0.0},
        {"bump+25@0", EffortSpec::Kind::bump, 0.25, 0.0, 0.35, 0.0},
        {"tilt+15", EffortSpec::Kind::tilt, 0.15, 0.0, 0.40, 0.20},
        {"tilt-15", EffortSpec::Kind::tilt, -0.15, 0.0, 0.40, 0.20},
        {"bump-20@0", EffortSpec::Kind::bump, -0.20, 0.0, 0.30, 0.0},
        {"bump+35@-40", EffortSpec::Kind::bump, 0.35, -0.40, 0.25, 0.0},
        {"tilt+25", EffortSpec::Kind::tilt, 0.25, 0.0, 0.50, 0.15},
        {"bump-30@+20", EffortSpec::Kind::bump, -0.30, 0.20, 0.25, 0.0},
        {"bump+20@+40", EffortSpec::Kind::bump, 0.20, 0.40, 0.25, 0.0},
    };
    // the interval volume is 2 here, so the certification margin must absorb
    // an extra (c vol)^i/(c^i) factor; calibrated offline
    // (c zeta = 2.826e12, largest integral 0.354, s_bar = 1.417)
    c.trust_level = 4.0e12;
    // split prior: the gaslit branch starts shifted, so d0 > 0 and the
    // volume-corrected and literal propagation terms genuinely differ
    c.gaslit_prior = NoiseSpec{NoiseSpec::Family::truncated_normal, 0.25, 0.3, true};
    return c;
}

ScenarioConfig ess_chain() {
    ScenarioConfig c;
    c.name = "ess_chain";
    c.state_grid = {-2.0, 2.0, 33};
    c.obs_grid = {0.0, 1.0, 33};
    c.increment_grid = {-0.5, 0.5, 9};
    c.horizon = 1;
    c.control_values = {-1.0, 0.0, 1.0};
    c.dynamics = {0.7, 0.2};
    c.observation = {0.02, 0.0};
    c.running_cost = {0.0, 0.0};
    c.dm_terminal = TerminalCost::quadratic(0.5);
    c.gaslighter_terminal = TerminalCost::zero();
    c.risk = 0.2;
    c.process_noise = {NoiseSpec::Family::truncated_normal, 0.0, 0.18, true};
    c.obs_noise = {NoiseSpec::Family::truncated_normal, 0.5, 0.12, false};
    c.prior = {NoiseSpec::Family::truncated_normal, 0.0, 0.3, true};

    c.menu = {
        {"bump+10@40", EffortSpec::Kind::bump, 0.10, 0.40, 0.15, 0.0},
        {"bump-12@60", EffortSpec::Kind::bump, -0.12, 0.60, 0.15, 0.0},
        {"tilt+15", EffortSpec::Kind::tilt, 0.15, 0.0, 0.20, 0.10},
        {"bump+20@50", EffortSpec::Kind::bump, 0.20, 0.50, 0.20, 0.0},
        {"spike", EffortSpec::Kind::bump, -0.93, 0.50, 0.30, 0.0},
    };
    // calibrated offline: c zeta = 19573, passing integrals <= 0.107,
    // spike integral 0.81 with an empirical stage deviation near 6900
    c.trust_level = 2.8e3;
    c.design_cost_scale = 0.01;
    c.epsilons = {0.05};
    c.ess_sigma_samples = 256;
    c.ess_obs_trials = 4000;
    c.base_seed = 20240802;
    return c;
}

ScenarioConfig equilibrium() {
    ScenarioConfig c;
    c.name = "equilibrium";
    c.state_grid = {-1.5, 1.5, 31};
    c.obs_grid = {-2.0, 2.0, 41};
    c.increment_grid = {-0.3, 0.3, 7};
    c.horizon = 2;
    c.control_values = {-1.0, 0.0, 1.0};
    c.dynamics = {0.8, 0.3};
    c.observation = {1.0, 0.0};  // identity channel
    c.running_cost = {0.0, 0.0};
    c.dm_terminal = TerminalCost::quadratic(1.0);
    c.gaslighter_terminal = TerminalCost::target_well(-0.6, 0.4, 1.0);
    c.risk = 1.0;
    c.process_noise = {NoiseSpec::Family::truncated_normal, 0.0, 0.1, true};
    c.obs_noise = {NoiseSpec::Family::truncated_normal, 0.0, 0.25, false};
    c.prior = {NoiseSpec::Family::truncated_normal, 0.0, 0.15, true};

    c.menu = {
        {"lure+strong", EffortSpec::Kind::bump, 4.0, 0.5, 0.5, 0.0},
        {"lure+mild", EffortSpec::Kind::bump, 1.5, 0.4, 0.4, 0.0},
        {"lure-strong", EffortSpec::Kind::bump, 4.0, -0.5, 0.5, 0.0},
        {"tilt+70", EffortSpec::Kind::tilt, 0.70, 0.0, 0.40, 0.20},
    };
    c.trust_level = 5.3e28;  // calibrated offline; zeta is huge on this grid
    c.design_cost_scale = 0.01;
    c.epsilons = {0.02};
    c.obs_quadrature_nodes = 5;
    c.alpha_budget = 200000;
    c.objective_trials = 20000;
    c.menu_sequence_budget = 400;
    c.base_seed = 20240803;
    return c;
}

ScenarioConfig equilibrium_nominal() {
    ScenarioConfig c = equilibrium();
    c.name = "equilibrium_nominal";
    c.menu.clear();
    return c;
}

ScenarioConfig tiny(std::uint64_t seed) {
    SplitMix64 rng(seed);
    auto draw = [&rng](double lo, double hi) {
        return lo + (hi - lo) * rng.next_double();
    };

    ScenarioConfig c;
    c.name = "tiny";
    c.state_grid = {-1.0, 1.0, 3};
    c.obs_grid = {0.0, 1.0, 5};
    c.increment_grid = {-1.0, 1.0, 3};
    c.horizon = 2;
    c.control_values = {draw(-0.8, -0.2), draw(0.2, 0.8)};
    c.dynamics = {draw(0.3, 1.0), draw(0.1, 0.5)};
    c.observation = {draw(0.0, 1.0), draw(-0.2, 0.2)};
    c.running_cost = {draw(0.0, 0.5), draw(0.0, 0.3)};
    c.dm_terminal = TerminalCost::quadratic(draw(0.2, 1.0), draw(-0.3, 0.3));
    c.gaslighter_terminal = TerminalCost::target_well(draw(-0.5, 0.5), 0.5, 1.0);
    c.risk = draw(0.1, 1.0);
    c.process_noise = {NoiseSpec::Family::truncated_normal, draw(-0.2, 0.2),
                       draw(0.3, 0.9), false};
    c.obs_noise = {NoiseSpec::Family::truncated_normal, draw(0.3, 0.7),
                   draw(0.15, 0.5), false};
    c.prior = {NoiseSpec::Family::truncated_normal, draw(-0.3, 0.3),
               draw(0.3, 0.8), false};
    c.menu = {
        {"bump", EffortSpec::Kind::bump, draw(-0.4, 0.6), 0.5, 0.3, 0.0},
    };
    c.trust_level = 1.0;
    c.design_cost_scale = 0.1;
    c.epsilons = {0.05};
    c.obs_quadrature_nodes = 3;
    c.base_seed = seed;
    return c;
}

ScenarioConfig by_name(const std::string& name) {
    if (name == "canonical") return canonical();
    if (name == "canonical_wide") return canonical_wide();
    if (name == "ess_chain") return ess_chain();
    if (name == "equilibrium") return equilibrium();
    if (name == "equilibrium_nominal") return equilibrium_nominal();
    throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace scenarios

}  // namespace gaslab
