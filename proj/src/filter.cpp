#include "gaslab/filter.hpp"

#include <cmath>
#include <stdexcept>

#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

namespace {

// Shared kernel for both channels. The nominal and gaslit operators differ
// only in the scalar divisor, which makes the factorization
//   gaslit = (phi(y)/phi°(y)) * nominal
// exact and lets the phi° = phi case reproduce the nominal update bit for bit.
InformationState update_core(const SystemModel& model,
                             const InformationState& sigma, double u, double y,
                             double divisor, const char* degenerate_message) {
    if (!(divisor > 0.0)) {
        throw std::domain_error(degenerate_message);
    }
    const Grid& sg = *model.state_grid;
    if (!sigma.grid()->same_as(sg)) {
        throw std::invalid_argument("incompatible grids");
    }
    const GridDensity& psi = model.psi();
    const GridDensity& phi = model.phi();
    const Grid& pg = *psi.grid();
    const int n = sg.size();

    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    const double inv_spacing = 1.0 / sg.spacing();

    for (int j = 0; j < n; ++j) {
        const double xi = sg.node(j);
        const double sv = sigma.value(j);
        if (sv == 0.0) continue;
        const double factor = sg.weight(j) * model.exp_running_cost(xi, u) *
                              phi.interp_clamped(y - model.observation(xi)) *
                              sv / divisor;
        if (factor == 0.0) continue;
        const double center = model.dynamics(xi, u);
        // psi vanishes outside its grid; only nodes near `center` contribute
        int lo = static_cast<int>(
            std::floor((center + pg.lower() - sg.lower()) * inv_spacing)) - 1;
        int hi = static_cast<int>(
            std::ceil((center + pg.upper() - sg.lower()) * inv_spacing)) + 1;
        if (lo < 0) lo = 0;
        if (hi > n - 1) hi = n - 1;
        for (int i = lo; i <= hi; ++i) {
            const double k = psi.interp_zero_outside(sg.node(i) - center);
            if (k != 0.0) out[static_cast<std::size_t>(i)] += k * factor;
        }
    }
    return InformationState(sigma.grid(), std::move(out));
}

}  // namespace

InformationState info_state_update(const SystemModel& model,
                                   const InformationState& sigma, double u,
                                   double y) {
    const double div = model.phi().interp_clamped(y);
    return update_core(model, sigma, u, y, div, "degenerate reference density");
}

InformationState gaslit_update(const SystemModel& model,
                               const InformationState& sigma, double u,
                               double y, const GridDensity& effort_k) {
    if (!effort_k.grid()->same_as(*model.obs_grid)) {
        throw std::invalid_argument("incompatible grids");
    }
    const double div = effort_k.interp_clamped(y);
    return update_core(model, sigma, u, y, div, "degenerate effort density");
}

FilterRun run_filter(const SystemModel& model,
                     const std::vector<double>& controls,
                     const std::vector<double>& observations,
                     const GaslightEffort* effort) {
    const int k_max = model.horizon;
    if (static_cast<int>(controls.size()) != k_max ||
        static_cast<int>(observations.size()) != k_max) {
        throw std::invalid_argument("run_filter: need K controls and K observations");
    }
    if (effort && effort->horizon() != k_max) {
        throw std::invalid_argument("run_filter: effort length mismatch");
    }
    FilterRun run;
    run.controls = controls;
    run.observations = observations;
    run.used_effort = effort != nullptr;
    run.states.reserve(static_cast<std::size_t>(k_max) + 1);
    run.states.emplace_back(effort ? model.rho_gaslit() : model.rho());
    for (int k = 1; k <= k_max; ++k) {
        const double u = controls[static_cast<std::size_t>(k - 1)];
        const double y = observations[static_cast<std::size_t>(k - 1)];
        if (effort) {
            run.states.push_back(
                gaslit_update(model, run.states.back(), u, y, effort->stage(k)));
        } else {
            run.states.push_back(info_state_update(model, run.states.back(), u, y));
        }
    }
    return run;
}

double terminal_functional(const SystemModel& model,
                           const InformationState& sigma_k) {
    if (!sigma_k.grid()->same_as(*model.state_grid)) {
        throw std::invalid_argument("incompatible grids");
    }
    const Grid& g = *sigma_k.grid();
    std::vector<double> prod(sigma_k.values().size());
    for (std::size_t i = 0; i < prod.size(); ++i) {
        prod[i] = sigma_k.values()[i] *
                  std::exp(model.risk * model.dm_terminal(g.node(static_cast<int>(i))));
    }
    return quadrature(GridFunction(sigma_k.grid(), std::move(prod)));
}

MonteCarloEstimate cost_info_state(const SystemModel& model,
                                   const ControlPolicy& policy,
                                   const GaslightEffort* effort, int n_trials,
                                   std::uint64_t seed) {
    if (n_trials < 1) {
        throw std::invalid_argument("cost_info_state: n_trials must be >= 1");
    }
    if (effort && effort->horizon() != model.horizon) {
        throw std::invalid_argument("cost_info_state: effort length mismatch");
    }
    DensitySampler phi_sampler(model.phi());
    std::vector<double> samples(static_cast<std::size_t>(n_trials));
    parallel_for_trials(n_trials, [&](int t) {
        SplitMix64 rng(mix_seed(seed, stream::cost_info, static_cast<std::uint64_t>(t)));
        InformationState sigma(effort ? model.rho_gaslit() : model.rho());
        for (int k = 1; k <= model.horizon; ++k) {
            const double u = policy(&sigma, k - 1);
            const double y = phi_sampler.sample(rng.next_double());
            sigma = effort ? gaslit_update(model, sigma, u, y, effort->stage(k))
                           : info_state_update(model, sigma, u, y);
        }
        samples[static_cast<std::size_t>(t)] = terminal_functional(model, sigma);
    });
    const auto ms = mean_and_standard_error(samples);
    return {ms.mean, ms.std_error, n_trials};
}

MonteCarloEstimate cost_direct(const SystemModel& model,
                               const ControlPolicy& policy, int n_trials,
                               std::uint64_t seed) {
    if (n_trials < 1) {
        throw std::invalid_argument("cost_direct: n_trials must be >= 1");
    }
    std::vector<double> samples(static_cast<std::size_t>(n_trials));
    parallel_for_trials(n_trials, [&](int t) {
        const Trajectory traj =
            simulate(model, policy, nullptr, SamplingMode::nominal,
                     mix_seed(seed, stream::cost_direct, static_cast<std::uint64_t>(t)));
        samples[static_cast<std::size_t>(t)] = pathwise_cost(model, traj);
    });
    const auto ms = mean_and_standard_error(samples);
    return {ms.mean, ms.std_error, n_trials};
}

}  // namespace gaslab
