#include "gaslab/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gaslab/errors.hpp"
#include "gaslab/filter.hpp"
#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"

namespace gaslab {

ObjectiveEstimate gaslighter_objective(const SystemModel& model,
                                       const GaslightEffort& effort,
                                       const ControlPolicy& dm_policy,
                                       const ControlPolicy& nominal_policy,
                                       int n_trials, std::uint64_t seed) {
    if (effort.horizon() != model.horizon) {
        throw std::invalid_argument("gaslighter_objective: effort length mismatch");
    }
    std::vector<double> gaslit(static_cast<std::size_t>(n_trials));
    std::vector<double> gamma(static_cast<std::size_t>(n_trials));
    std::vector<double> diff(static_cast<std::size_t>(n_trials));
    parallel_for_trials(n_trials, [&](int t) {
        const auto trial_seed =
            mix_seed(seed, stream::objective, static_cast<std::uint64_t>(t));
        const auto g = simulate(model, dm_policy, &effort, SamplingMode::gaslit,
                                trial_seed);
        const auto r = simulate(model, nominal_policy, nullptr,
                                SamplingMode::reference, trial_seed);
        const double a =
            std::exp(model.risk * model.gaslighter_terminal(g.states.back()));
        const double b =
            std::exp(model.risk * model.gaslighter_terminal(r.states.back()));
        gaslit[static_cast<std::size_t>(t)] = a;
        gamma[static_cast<std::size_t>(t)] = b;
        diff[static_cast<std::size_t>(t)] = a - b;
    });
    ObjectiveEstimate out;
    out.gaslit_term = mean_and_standard_error(gaslit).mean;
    out.gamma_term = mean_and_standard_error(gamma).mean;
    for (int k = 1; k <= model.horizon; ++k) {
        out.h_total += design_cost(model.phi(), effort.stage(k),
                                   effort.design_cost_scale);
    }
    const auto d = mean_and_standard_error(diff);
    out.value = d.mean + out.h_total;
    out.std_error = d.std_error;
    return out;
}

namespace {

std::vector<double> stage_design_costs(const SystemModel& model,
                                       const GaslightEffort& effort) {
    std::vector<double> h(static_cast<std::size_t>(model.horizon) + 1, 0.0);
    for (int k = 1; k <= model.horizon; ++k) {
        h[static_cast<std::size_t>(k)] = design_cost(
            model.phi(), effort.stage(k), effort.design_cost_scale);
    }
    return h;
}

struct StagePoint {
    double x = 0.0;
    InformationState sigma;
};

// (x_k, sigma°_k) pairs along gaslit forward runs, one vector per stage.
std::vector<std::vector<StagePoint>> harvest_points(
    const SystemModel& model, const GaslightEffort& effort,
    const ControlPolicy& dm_policy, int n_forward, std::uint64_t seed) {
    std::vector<std::vector<StagePoint>> points(
        static_cast<std::size_t>(model.horizon) + 1);
    for (int t = 0; t < n_forward; ++t) {
        const auto traj =
            simulate(model, dm_policy, &effort, SamplingMode::gaslit,
                     mix_seed(seed, stream::rollout, static_cast<std::uint64_t>(t)));
        const auto run =
            run_filter(model, traj.controls, traj.observations, &effort);
        for (int k = 0; k <= model.horizon; ++k) {
            points[static_cast<std::size_t>(k)].push_back(
                {traj.states[static_cast<std::size_t>(k)],
                 run.states[static_cast<std::size_t>(k)]});
        }
    }
    return points;
}

// Continuation value sampled from (x_k, sigma_k): design costs of the
// remaining stages plus the terminal exponential.
double rollout_value(const SystemModel& model, const GaslightEffort& effort,
                     const ControlPolicy& policy,
                     const std::vector<DensitySampler>& effort_samplers,
                     const DensitySampler& process_sampler,
                     const std::vector<double>& h, double x_k,
                     InformationState sigma, int k, SplitMix64& rng) {
    double total = 0.0;
    double x = x_k;
    for (int stage = k; stage < model.horizon; ++stage) {
        total += h[static_cast<std::size_t>(stage) + 1];
        const double u = policy(&sigma, stage);
        const double w = process_sampler.sample(rng.next_double());
        x = model.state_grid->clamp(model.dynamics(x, u) + w);
        double y = effort_samplers[static_cast<std::size_t>(stage)].sample(
            rng.next_double());
        y = model.obs_grid->clamp(y);
        sigma = gaslit_update(model, sigma, u, y, effort.stage(stage + 1));
    }
    return total + std::exp(model.risk * model.gaslighter_terminal(x));
}

}  // namespace

WCheckResult w_recursion_check(const SystemModel& model,
                               const GaslightEffort& effort,
                               const ControlPolicy& dm_policy, int n_forward,
                               int n_rollouts, std::uint64_t seed) {
    if (effort.horizon() != model.horizon) {
        throw std::invalid_argument("w_recursion_check: effort length mismatch");
    }
    const auto h = stage_design_costs(model, effort);
    const auto points = harvest_points(model, effort, dm_policy, n_forward, seed);
    DensitySampler process_sampler(model.psi());
    std::vector<DensitySampler> effort_samplers;
    for (const auto& d : effort.stages) effort_samplers.emplace_back(d);

    WCheckResult out;
    out.w.resize(static_cast<std::size_t>(model.horizon) + 1);
    out.w_se.resize(out.w.size());
    out.tower_gap.resize(static_cast<std::size_t>(model.horizon));
    out.tower_se.resize(out.tower_gap.size());

    for (int k = 0; k <= model.horizon; ++k) {
        const auto& pts = points[static_cast<std::size_t>(k)];
        std::vector<double> direct;
        direct.reserve(pts.size() * static_cast<std::size_t>(n_rollouts));
        std::vector<double> nested;  // one-step then W_{k+1}
        if (k < model.horizon) {
            nested.reserve(direct.capacity());
        }
        for (std::size_t p = 0; p < pts.size(); ++p) {
            SplitMix64 rng(mix_seed(seed ^ 0x5bd1e995ULL, stream::rollout,
                                    (static_cast<std::uint64_t>(k) << 32) |
                                        static_cast<std::uint64_t>(p)));
            for (int r = 0; r < n_rollouts; ++r) {
                direct.push_back(rollout_value(model, effort, dm_policy,
                                               effort_samplers, process_sampler,
                                               h, pts[p].x, pts[p].sigma, k, rng));
            }
            if (k < model.horizon) {
                for (int r = 0; r < n_rollouts; ++r) {
                    // independent draws for the one-step branch
                    InformationState sigma = pts[p].sigma;
                    const double u = dm_policy(&sigma, k);
                    const double w = process_sampler.sample(rng.next_double());
                    const double x_next =
                        model.state_grid->clamp(model.dynamics(pts[p].x, u) + w);
                    double y = effort_samplers[static_cast<std::size_t>(k)].sample(
                        rng.next_double());
                    y = model.obs_grid->clamp(y);
                    sigma = gaslit_update(model, sigma, u, y, effort.stage(k + 1));
                    nested.push_back(h[static_cast<std::size_t>(k) + 1] +
                                     rollout_value(model, effort, dm_policy,
                                                   effort_samplers,
                                                   process_sampler, h, x_next,
                                                   sigma, k + 1, rng));
                }
            }
        }
        const auto md = mean_and_standard_error(direct);
        out.w[static_cast<std::size_t>(k)] = md.mean;
        out.w_se[static_cast<std::size_t>(k)] = md.std_error;
        if (k < model.horizon) {
            const auto mn = mean_and_standard_error(nested);
            out.tower_gap[static_cast<std::size_t>(k)] = md.mean - mn.mean;
            out.tower_se[static_cast<std::size_t>(k)] = std::sqrt(
                md.std_error * md.std_error + mn.std_error * mn.std_error);
        }
    }
    return out;
}

double theorem5_bound(const RobustnessConstants& constants, double s, double t,
                      int horizon, Theorem5Form form) {
    double geom = 0.0;
    for (int i = 1; i <= horizon - 1; ++i) {
        geom += std::pow(constants.phi_hat, static_cast<double>(i));
    }
    const double base =
        -constants.e_gamma *
        (std::pow(constants.phi_hat, static_cast<double>(horizon)) * constants.d0 +
         s * geom);
    if (form == Theorem5Form::conservative) return base;
    const double s_bar = s / (constants.contraction * constants.zeta);
    return base + static_cast<double>(horizon) * t * s_bar;
}

EquilibriumResult search_equilibrium(const SystemModel& model,
                                     const EffortMenu& menu,
                                     const RobustnessConstants& constants,
                                     const EquilibriumOptions& options) {
    if (menu.size() < 1) {
        throw std::invalid_argument("search_equilibrium: empty menu");
    }
    const int k_stages = model.horizon;
    double seq_count_d = 1.0;
    for (int k = 0; k < k_stages; ++k) seq_count_d *= menu.size();
    if (seq_count_d > static_cast<double>(options.sequence_budget)) {
        throw budget_error("menu sequence budget exceeded");
    }
    const long seq_count = static_cast<long>(seq_count_d);

    const double s_bar = options.trust_level / (constants.contraction * constants.zeta);
    std::vector<double> entry_integral(static_cast<std::size_t>(menu.size()));
    for (int i = 0; i < menu.size(); ++i) {
        entry_integral[static_cast<std::size_t>(i)] = ess_sufficient_integral(
            model.phi(), menu.densities[static_cast<std::size_t>(i)]);
    }

    // the follower's no-effort best response prices the normalizing term
    auto nominal_alphas = std::make_shared<const AlphaVectorSet>(
        backward_induction(model, nullptr, options.dp));
    auto nominal_policy = make_alpha_policy(nominal_alphas, model);

    EquilibriumResult result;
    result.epsilons = options.epsilons;
    result.epsilon_used =
        *std::min_element(options.epsilons.begin(), options.epsilons.end());

    std::vector<GaslightEffort> efforts(static_cast<std::size_t>(seq_count));
    std::vector<ControlPolicy> policies;
    policies.reserve(static_cast<std::size_t>(seq_count));

    int evaluated = 0;
    for (long s_idx = 0; s_idx < seq_count; ++s_idx) {
        CandidateRow row;
        long rem = s_idx;
        GaslightEffort effort;
        effort.design_cost_scale = options.design_cost_scale;
        bool certified = true;
        for (int k = 0; k < k_stages; ++k) {
            const int entry = static_cast<int>(rem % menu.size());
            rem /= menu.size();
            row.stage_entries.push_back(entry);
            row.stage_ids.push_back(menu.ids[static_cast<std::size_t>(entry)]);
            effort.stages.push_back(menu.densities[static_cast<std::size_t>(entry)]);
            if (entry_integral[static_cast<std::size_t>(entry)] > s_bar) {
                certified = false;
            }
        }
        row.stealth_pass = certified;

        if (certified || !options.stealth_filter) {
            auto alphas = std::make_shared<const AlphaVectorSet>(
                backward_induction(model, &effort, options.dp));
            auto policy = make_alpha_policy(alphas, model);
            row.dm_value =
                alpha_value(*alphas, InformationState(model.rho_gaslit()), 0);
            const auto obj = gaslighter_objective(
                model, effort, policy, nominal_policy, options.n_trials,
                mix_seed(options.seed, stream::equilibrium,
                         static_cast<std::uint64_t>(s_idx)));
            row.objective = obj.value;
            row.std_error = obj.std_error;
            row.gaslit_term = obj.gaslit_term;
            row.gamma_term = obj.gamma_term;
            row.h_total = obj.h_total;
            row.evaluated = true;
            ++evaluated;
            policies.push_back(std::move(policy));
        } else {
            policies.push_back(ControlPolicy::constant(0.0));
        }
        efforts[static_cast<std::size_t>(s_idx)] = std::move(effort);
        result.rows.push_back(std::move(row));
    }
    if (evaluated == 0) {
        throw std::runtime_error("no stealthy candidates");
    }

    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        if (!row.evaluated) continue;
        if (result.chosen < 0 ||
            row.objective < result.rows[static_cast<std::size_t>(result.chosen)].objective) {
            result.chosen = static_cast<int>(i);
        }
    }
    const auto& best = result.rows[static_cast<std::size_t>(result.chosen)];
    result.chosen_ids = best.stage_ids;
    result.chosen_objective = best.objective;
    result.chosen_std_error = best.std_error;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        if (result.rows[i].evaluated &&
            result.rows[i].objective <= best.objective + result.epsilon_used) {
            result.epsilon_dominated.push_back(static_cast<int>(i));
        }
    }

    result.theorem5_paper =
        theorem5_bound(constants, options.trust_level, options.design_cost_scale,
                       k_stages, Theorem5Form::paper);
    result.theorem5_conservative =
        theorem5_bound(constants, options.trust_level, options.design_cost_scale,
                       k_stages, Theorem5Form::conservative);

    // Leader-side epsilon condition spot check: at harvested (x_k, sigma°_k)
    // points of the chosen sequence, its continuation value must not exceed
    // any certified candidate's by more than epsilon_k (within Monte Carlo
    // resolution). Reported as a coverage fraction, never asserted.
    if (options.coverage_points > 0 && k_stages > 0) {
        const auto& chosen_effort = efforts[static_cast<std::size_t>(result.chosen)];
        const auto& chosen_policy = policies[static_cast<std::size_t>(result.chosen)];
        const auto points = harvest_points(model, chosen_effort, chosen_policy,
                                           options.coverage_points,
                                           options.seed ^ 0x9e3779b9ULL);
        DensitySampler process_sampler(model.psi());
        int checked = 0;
        int holds = 0;
        for (int k = 0; k < k_stages; ++k) {
            const double eps_k =
                options.epsilons[static_cast<std::size_t>(k) % options.epsilons.size()];
            for (std::size_t p = 0; p < points[static_cast<std::size_t>(k)].size(); ++p) {
                const auto& pt = points[static_cast<std::size_t>(k)][p];
                double chosen_w = 0.0;
                double best_w = std::numeric_limits<double>::infinity();
                double chosen_se = 0.0;
                double best_se = 0.0;
                for (std::size_t c = 0; c < efforts.size(); ++c) {
                    if (!result.rows[c].evaluated) continue;
                    const auto& eff = efforts[c];
                    std::vector<DensitySampler> samplers;
                    for (const auto& d : eff.stages) samplers.emplace_back(d);
                    const auto h = stage_design_costs(model, eff);
                    SplitMix64 rng(mix_seed(options.seed ^ 0xc2b2ae35ULL,
                                            stream::rollout,
                                            (static_cast<std::uint64_t>(k) << 40) ^
                                                (static_cast<std::uint64_t>(p) << 20) ^
                                                static_cast<std::uint64_t>(c)));
                    std::vector<double> vals(static_cast<std::size_t>(options.coverage_rollouts));
                    for (int r = 0; r < options.coverage_rollouts; ++r) {
                        vals[static_cast<std::size_t>(r)] = rollout_value(
                            model, eff, policies[c], samplers, process_sampler,
                            h, pt.x, pt.sigma, k, rng);
                    }
                    const auto ms = mean_and_standard_error(vals);
                    if (static_cast<int>(c) == result.chosen) {
                        chosen_w = ms.mean;
                        chosen_se = ms.std_error;
                    }
                    if (ms.mean < best_w) {
                        best_w = ms.mean;
                        best_se = ms.std_error;
                    }
                }
                const double slack =
                    eps_k + 4.0 * std::sqrt(chosen_se * chosen_se + best_se * best_se);
                ++checked;
                if (chosen_w <= best_w + slack) ++holds;
            }
        }
        result.coverage_checked = checked;
        result.coverage_fraction =
            checked > 0 ? static_cast<double>(holds) / checked : -1.0;
    }
    return result;
}

}  // namespace gaslab
