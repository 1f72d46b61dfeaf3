#include "gaslab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace gaslab {

void SystemModel::validate() const {
    if (!state_grid || !obs_grid) {
        throw std::invalid_argument("model: grids missing");
    }
    if (horizon < 0) {
        throw std::invalid_argument("model: horizon must be nonnegative");
    }
    if (!(risk > 0.0)) {
        throw std::invalid_argument("model: risk sensitivity mu must be positive");
    }
    if (static_cast<int>(controls.size()) != horizon) {
        throw std::invalid_argument("model: need one control set per stage");
    }
    for (const auto& set : controls) {
        if (set.empty()) {
            throw std::invalid_argument("model: control set must be nonempty");
        }
    }
    if (!process_noise || !obs_noise || !prior) {
        throw std::invalid_argument("model: noise densities and prior required");
    }
    if (!obs_noise->grid()->same_as(*obs_grid)) {
        throw std::invalid_argument("model: obs noise must live on the obs grid");
    }
    if (!prior->grid()->same_as(*state_grid)) {
        throw std::invalid_argument("model: prior must live on the state grid");
    }
    if (gaslit_prior && !gaslit_prior->grid()->same_as(*state_grid)) {
        throw std::invalid_argument("model: gaslit prior must live on the state grid");
    }
    if (!obs_noise->strictly_positive()) {
        // Psi divides by phi(y); a zero node would make the channel degenerate
        throw std::invalid_argument("degenerate reference density");
    }
}

std::string to_string(SamplingMode mode) {
    switch (mode) {
        case SamplingMode::nominal: return "nominal";
        case SamplingMode::gaslit: return "gaslit";
        case SamplingMode::reference: return "reference";
    }
    return "?";
}

double pathwise_cost(const SystemModel& model, const Trajectory& traj) {
    double acc = 0.0;
    for (std::size_t k = 0; k < traj.controls.size(); ++k) {
        acc += model.running_cost(traj.states[k], traj.controls[k]);
    }
    acc += model.dm_terminal(traj.states.back());
    return std::exp(model.risk * acc);
}

double likelihood_ratio(const SystemModel& model, const Trajectory& traj,
                        int k) {
    if (k < 0 || k > static_cast<int>(traj.observations.size())) {
        throw std::out_of_range("likelihood_ratio: stage out of range");
    }
    const GridDensity& phi = model.phi();
    double z = 1.0;
    for (int i = 1; i <= k; ++i) {
        const double y = traj.observations[static_cast<std::size_t>(i - 1)];
        const double x_prev = traj.states[static_cast<std::size_t>(i - 1)];
        const double denom = phi.interp_clamped(y);
        if (!(denom > 0.0)) {
            throw std::domain_error("degenerate reference density");
        }
        z *= phi.interp_clamped(y - model.observation(x_prev)) / denom;
    }
    return z;
}

}  // namespace gaslab
