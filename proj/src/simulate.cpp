#include <stdexcept>

#include "gaslab/filter.hpp"
#include "gaslab/model.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

Trajectory simulate(const SystemModel& model, const ControlPolicy& policy,
                    const GaslightEffort* effort, SamplingMode mode,
                    std::uint64_t seed) {
    if ((mode == SamplingMode::gaslit) != (effort != nullptr)) {
        throw std::invalid_argument(effort == nullptr
                                        ? "missing effort"
                                        : "effort only valid in gaslit mode");
    }
    if (effort && effort->horizon() != model.horizon) {
        throw std::invalid_argument("simulate: effort length mismatch");
    }

    const Grid& sg = *model.state_grid;
    const Grid& og = *model.obs_grid;
    DensitySampler prior_sampler(model.rho());
    DensitySampler process_sampler(model.psi());
    DensitySampler obs_sampler(model.phi());

    // Per-stage effort samplers only exist in gaslit mode.
    std::vector<DensitySampler> effort_samplers;
    if (effort) {
        effort_samplers.reserve(effort->stages.size());
        for (const auto& d : effort->stages) effort_samplers.emplace_back(d);
    }

    const bool track_filter = policy.uses_information_state();

    Trajectory traj;
    traj.mode = mode;
    traj.seed = seed;
    traj.states.reserve(static_cast<std::size_t>(model.horizon) + 1);
    traj.observations.reserve(static_cast<std::size_t>(model.horizon));
    traj.controls.reserve(static_cast<std::size_t>(model.horizon));

    SplitMix64 rng(seed);
    traj.states.push_back(prior_sampler.sample(rng.next_double()));

    // The DM filters with the operator matching her channel: the gaslit
    // operator when an effort is being delivered, the nominal one otherwise.
    std::optional<InformationState> sigma;
    if (track_filter) {
        sigma.emplace(effort ? model.rho_gaslit() : model.rho());
    }

    for (int k = 0; k < model.horizon; ++k) {
        const double x = traj.states.back();
        const double u = policy(track_filter ? &*sigma : nullptr, k);
        traj.controls.push_back(u);

        // fixed draw order per stage: process noise first, then observation
        const double w = process_sampler.sample(rng.next_double());
        double x_next = model.dynamics(x, u) + w;
        if (!sg.contains(x_next)) {
            x_next = sg.clamp(x_next);
            ++traj.state_clamps;
        }

        double y;
        switch (mode) {
            case SamplingMode::nominal:
                y = model.observation(x) + obs_sampler.sample(rng.next_double());
                break;
            case SamplingMode::reference:
                y = obs_sampler.sample(rng.next_double());
                break;
            case SamplingMode::gaslit:
                y = effort_samplers[static_cast<std::size_t>(k)].sample(
                    rng.next_double());
                break;
            default:
                throw std::logic_error("unknown sampling mode");
        }
        if (!og.contains(y)) {
            y = og.clamp(y);
            ++traj.obs_clamps;
        }

        traj.states.push_back(x_next);
        traj.observations.push_back(y);

        if (track_filter) {
            sigma = effort ? gaslit_update(model, *sigma, u, y, effort->stage(k + 1))
                           : info_state_update(model, *sigma, u, y);
        }
    }
    return traj;
}

}  // namespace gaslab
