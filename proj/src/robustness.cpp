#include "gaslab/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

RobustnessConstants compute_constants(const SystemModel& model, ZetaMode mode,
                                      int trial_budget, std::uint64_t seed) {
    RobustnessConstants k;
    auto [phi_hat, phi_min] = density_stats(model.phi());
    k.phi_hat = phi_hat;
    k.phi_min = phi_min;

    double l = 0.0;
    double e_phi = 0.0;
    double e_gamma = 0.0;
    for (int i = 0; i < model.state_grid->size(); ++i) {
        const double x = model.state_grid->node(i);
        for (const auto& set : model.controls) {
            for (double u : set) {
                l = std::max(l, model.exp_running_cost(x, u));
            }
        }
        if (model.controls.empty()) l = std::max(l, 1.0);
        e_phi = std::max(e_phi, std::exp(model.risk * model.dm_terminal(x)));
        e_gamma = std::max(e_gamma, std::exp(model.risk * model.gaslighter_terminal(x)));
    }
    k.exp_cost_max = l;
    k.contraction = phi_hat * l;
    k.e_phi = e_phi;
    k.e_gamma = e_gamma;
    k.vol_y = model.obs_grid->length();

    const double rho_norm = InformationState(model.rho()).l1_norm();
    const double rho_gas_norm = InformationState(model.rho_gaslit()).l1_norm();
    const double norm_cap = std::max(rho_norm, rho_gas_norm);

    if (mode == ZetaMode::analytic) {
        k.zeta = std::pow(k.contraction / phi_min,
                          static_cast<double>(model.horizon)) * norm_cap;
    } else {
        // largest mass seen along reference-mode runs with random controls,
        // doubled as a safety factor
        double peak = norm_cap;
        DensitySampler phi_sampler(model.phi());
        for (int t = 0; t < trial_budget; ++t) {
            SplitMix64 rng(mix_seed(seed, stream::zeta, static_cast<std::uint64_t>(t)));
            InformationState sigma(model.rho());
            for (int stage = 0; stage < model.horizon; ++stage) {
                const auto& set = model.control_set(stage);
                const double u = set[rng.next() % set.size()];
                const double y = phi_sampler.sample(rng.next_double());
                sigma = info_state_update(model, sigma, u, y);
                peak = std::max(peak, sigma.l1_norm());
            }
        }
        k.zeta = 2.0 * peak;
    }

    k.d0 = l1_distance(InformationState(model.rho_gaslit()),
                       InformationState(model.rho()));
    return k;
}

double lemma1_factor(const SystemModel& model, const RobustnessConstants& k,
                     double y) {
    const double phi_y = model.phi().interp_clamped(y);
    if (!(phi_y > 0.0)) throw std::domain_error("degenerate reference density");
    return k.phi_hat * k.exp_cost_max / phi_y;
}

CheckPair lemma1_check(const SystemModel& model, const RobustnessConstants& k,
                       const InformationState& sigma_bar,
                       const InformationState& sigma_hat, double u, double y) {
    CheckPair out;
    out.actual = l1_distance(info_state_update(model, sigma_bar, u, y),
                             info_state_update(model, sigma_hat, u, y));
    out.bound = lemma1_factor(model, k, y) * l1_distance(sigma_bar, sigma_hat);
    return out;
}

double lemma2_bound(const SystemModel& model, const RobustnessConstants& k,
                    double y, const GridDensity& effort_k) {
    const double phi_y = model.phi().interp_clamped(y);
    const double eff_y = effort_k.interp_clamped(y);
    if (!(phi_y > 0.0)) throw std::domain_error("degenerate reference density");
    if (!(eff_y > 0.0)) throw std::domain_error("degenerate effort density");
    return k.contraction * k.zeta * std::abs(1.0 / eff_y - 1.0 / phi_y);
}

CheckPair lemma2_check(const SystemModel& model, const RobustnessConstants& k,
                       const InformationState& sigma, double u, double y,
                       const GridDensity& effort_k) {
    if (sigma.l1_norm() > k.zeta * (1.0 + 1e-12)) {
        throw std::invalid_argument("lemma2_check: sigma norm exceeds zeta");
    }
    CheckPair out;
    out.actual = l1_distance(gaslit_update(model, sigma, u, y, effort_k),
                             info_state_update(model, sigma, u, y));
    out.bound = lemma2_bound(model, k, y, effort_k);
    return out;
}

namespace {

double ratio_gap(const SystemModel& model, const GridDensity& effort_k,
                 double y) {
    const double phi_y = model.phi().interp_clamped(y);
    const double eff_y = effort_k.interp_clamped(y);
    if (!(phi_y > 0.0)) throw std::domain_error("degenerate reference density");
    if (!(eff_y > 0.0)) throw std::domain_error("degenerate effort density");
    return std::abs(1.0 / eff_y - 1.0 / phi_y);
}

}  // namespace

std::vector<double> theorem1_bound(const SystemModel& model,
                                   const RobustnessConstants& k,
                                   std::span<const double> observations,
                                   const GaslightEffort& effort) {
    const auto recursion = [&] {
        std::vector<double> out;
        out.reserve(observations.size());
        double d = k.d0;
        for (std::size_t i = 0; i < observations.size(); ++i) {
            const double y = observations[i];
            const double phi_y = model.phi().interp_clamped(y);
            if (!(phi_y > 0.0)) throw std::domain_error("degenerate reference density");
            d = k.contraction * d / phi_y +
                k.contraction * k.zeta *
                    ratio_gap(model, effort.stage(static_cast<int>(i) + 1), y);
            out.push_back(d);
        }
        return out;
    }();

    const auto closed = theorem1_closed_form(model, k, observations, effort);
    for (std::size_t i = 0; i < recursion.size(); ++i) {
        const double scale = std::max({std::abs(recursion[i]), std::abs(closed[i]), 1e-300});
        if (std::abs(recursion[i] - closed[i]) > 1e-10 * scale) {
            throw std::logic_error("theorem1_bound: recursion and closed form disagree");
        }
    }
    return recursion;
}

std::vector<double> theorem1_closed_form(const SystemModel& model,
                                         const RobustnessConstants& k,
                                         std::span<const double> observations,
                                         const GaslightEffort& effort) {
    const std::size_t n = observations.size();
    std::vector<double> inv_phi(n);
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi_y = model.phi().interp_clamped(observations[i]);
        if (!(phi_y > 0.0)) throw std::domain_error("degenerate reference density");
        inv_phi[i] = 1.0 / phi_y;
        gaps[i] = ratio_gap(model, effort.stage(static_cast<int>(i) + 1),
                            observations[i]);
    }

    std::vector<double> out(n);
    for (std::size_t stage = 1; stage <= n; ++stage) {
        // d0 term: c^stage d0 / (phi(y_1)...phi(y_stage))
        double total = k.d0;
        for (std::size_t i = 0; i < stage; ++i) {
            total *= k.contraction * inv_phi[i];
        }
        // effort terms: c^{stage-j+1} zeta Y_j / (phi(y_{j+1})...phi(y_stage))
        for (std::size_t j = 1; j <= stage; ++j) {
            double term = k.zeta * gaps[j - 1] *
                          std::pow(k.contraction, static_cast<double>(stage - j + 1));
            for (std::size_t i = j; i < stage; ++i) term *= inv_phi[i];
            total += term;
        }
        out[stage - 1] = total;
    }
    return out;
}

Theorem2Result theorem2_check(const SystemModel& model,
                              const RobustnessConstants& k,
                              const GaslightEffort& effort,
                              const ControlPolicy& policy, int n_trials,
                              std::uint64_t seed) {
    if (effort.horizon() != model.horizon) {
        throw std::invalid_argument("theorem2_check: effort length mismatch");
    }
    DensitySampler phi_sampler(model.phi());
    std::vector<double> lhs(static_cast<std::size_t>(n_trials));
    std::vector<double> rhs(static_cast<std::size_t>(n_trials));

    parallel_for_trials(n_trials, [&](int t) {
        SplitMix64 rng(mix_seed(seed, stream::theorem2, static_cast<std::uint64_t>(t)));
        InformationState gaslit(model.rho_gaslit());
        InformationState nominal(model.rho());
        std::vector<double> ys(static_cast<std::size_t>(model.horizon));
        for (int stage = 1; stage <= model.horizon; ++stage) {
            // the DM lives in the gaslit branch; her controls drive both runs
            const double u = policy(&gaslit, stage - 1);
            const double y = phi_sampler.sample(rng.next_double());
            ys[static_cast<std::size_t>(stage - 1)] = y;
            gaslit = gaslit_update(model, gaslit, u, y, effort.stage(stage));
            nominal = info_state_update(model, nominal, u, y);
        }
        lhs[static_cast<std::size_t>(t)] =
            terminal_functional(model, gaslit) - terminal_functional(model, nominal);
        const auto bounds = theorem1_closed_form(model, k, ys, effort);
        rhs[static_cast<std::size_t>(t)] = k.e_phi * bounds.back();
    });

    const auto ml = mean_and_standard_error(lhs);
    const auto mr = mean_and_standard_error(rhs);
    return {ml.mean, mr.mean, ml.std_error, mr.std_error};
}

double theorem3_bound(const RobustnessConstants& k, double s, int horizon,
                      Theorem3Form form) {
    if (!(s > 0.0)) throw std::invalid_argument("theorem3_bound: s must be positive");
    const double c = k.contraction;
    const double c_d0 = form == Theorem3Form::volume_corrected ? c * k.vol_y : c;
    double geom = 0.0;
    for (int i = 1; i <= horizon - 1; ++i) {
        geom += std::pow(c, static_cast<double>(i));
    }
    return k.e_phi *
           (std::pow(c_d0, static_cast<double>(horizon)) * k.d0 + s * geom);
}

int BoundReport::violations(double slack_tol) const {
    int count = 0;
    for (const auto& r : records) {
        if (r.actual > r.bound + slack_tol) ++count;
    }
    return count;
}

double BoundReport::min_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : records) m = std::min(m, r.slack);
    return m;
}

namespace {

InformationState random_information_state(const GridPtr& grid,
                                          SplitMix64& rng, double norm_cap) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    for (double& x : v) x = rng.next_double();
    InformationState raw(grid, std::move(v));
    const double target = norm_cap * (0.05 + 0.95 * rng.next_double());
    const double norm = raw.l1_norm();
    std::vector<double> scaled(raw.values().begin(), raw.values().end());
    for (double& x : scaled) x *= target / norm;
    return InformationState(grid, std::move(scaled));
}

double random_control(const SystemModel& model, int stage, SplitMix64& rng) {
    const auto& set = model.control_set(stage);
    return set[rng.next() % set.size()];
}

}  // namespace

BoundReport lemma1_harness(const SystemModel& model,
                           const RobustnessConstants& k, int n_instances,
                           std::uint64_t seed) {
    BoundReport report;
    report.records.reserve(static_cast<std::size_t>(n_instances));
    DensitySampler phi_sampler(model.phi());
    for (int t = 0; t < n_instances; ++t) {
        SplitMix64 rng(mix_seed(seed, stream::lemma1, static_cast<std::uint64_t>(t)));
        auto bar = random_information_state(model.state_grid, rng, k.zeta);
        auto hat = random_information_state(model.state_grid, rng, k.zeta);
        const double u = random_control(model, 0, rng);
        const double y = phi_sampler.sample(rng.next_double());
        const auto pair = lemma1_check(model, k, bar, hat, u, y);
        report.records.push_back(
            {"lemma1", t, 1, pair.actual, pair.bound, pair.bound - pair.actual});
    }
    return report;
}

BoundReport lemma2_harness(const SystemModel& model,
                           const RobustnessConstants& k,
                           std::span<const GridDensity> efforts,
                           int n_instances, std::uint64_t seed) {
    if (efforts.empty()) {
        throw std::invalid_argument("lemma2_harness: need at least one effort");
    }
    BoundReport report;
    report.records.reserve(static_cast<std::size_t>(n_instances));
    DensitySampler phi_sampler(model.phi());
    for (int t = 0; t < n_instances; ++t) {
        SplitMix64 rng(mix_seed(seed, stream::lemma2, static_cast<std::uint64_t>(t)));
        auto sigma = random_information_state(model.state_grid, rng, k.zeta);
        const double u = random_control(model, 0, rng);
        const double y = phi_sampler.sample(rng.next_double());
        const auto& effort = efforts[static_cast<std::size_t>(t) % efforts.size()];
        const auto pair = lemma2_check(model, k, sigma, u, y, effort);
        report.records.push_back(
            {"lemma2", t, 1, pair.actual, pair.bound, pair.bound - pair.actual});
    }
    return report;
}

BoundReport theorem1_harness(const SystemModel& model,
                             const RobustnessConstants& k,
                             const GaslightEffort& effort, int n_trials,
                             std::uint64_t seed) {
    if (effort.horizon() != model.horizon) {
        throw std::invalid_argument("theorem1_harness: effort length mismatch");
    }
    BoundReport report;
    report.records.reserve(static_cast<std::size_t>(n_trials * model.horizon));
    DensitySampler phi_sampler(model.phi());
    std::vector<double> us(static_cast<std::size_t>(model.horizon));
    std::vector<double> ys(static_cast<std::size_t>(model.horizon));
    for (int t = 0; t < n_trials; ++t) {
        SplitMix64 rng(mix_seed(seed, stream::theorem1, static_cast<std::uint64_t>(t)));
        for (int stage = 0; stage < model.horizon; ++stage) {
            us[static_cast<std::size_t>(stage)] = random_control(model, stage, rng);
            ys[static_cast<std::size_t>(stage)] = phi_sampler.sample(rng.next_double());
        }
        const auto gaslit = run_filter(model, us, ys, &effort);
        const auto nominal = run_filter(model, us, ys, nullptr);
        const auto bounds = theorem1_bound(model, k, ys, effort);
        for (int stage = 1; stage <= model.horizon; ++stage) {
            const double actual = l1_distance(gaslit.states[static_cast<std::size_t>(stage)],
                                              nominal.states[static_cast<std::size_t>(stage)]);
            const double bound = bounds[static_cast<std::size_t>(stage - 1)];
            report.records.push_back(
                {"theorem1", t, stage, actual, bound, bound - actual});
        }
    }
    return report;
}

}  // namespace gaslab
