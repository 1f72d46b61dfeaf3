#include <doctest.h>

#include <cmath>
#include <vector>

#include "gaslab/errors.hpp"
#include "gaslab/filter.hpp"
#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"
#include "gaslab/stackelberg.hpp"
#include "test_helpers.hpp"

using namespace gaslab;

namespace {

struct EquilibriumFixture {
    ScenarioConfig cfg = scenarios::equilibrium();
    SystemModel model = build_model(cfg);
    RobustnessConstants constants = compute_constants(model);
    EffortMenu menu = build_menu(cfg, model);

    DpOptions dp() const {
        return {cfg.obs_quadrature_nodes, cfg.alpha_budget, true};
    }

    ControlPolicy best_response(const GaslightEffort* effort) const {
        auto alphas = std::make_shared<const AlphaVectorSet>(
            backward_induction(model, effort, dp()));
        return make_alpha_policy(alphas, model);
    }
};

}  // namespace

TEST_CASE("gaslighter objective") {
    EquilibriumFixture f;

    SUBCASE("nominal effort cancels exactly under common random numbers") {
        GaslightEffort noop = repeat_effort(f.model.phi(), f.model.horizon, 0.01);
        auto dm = f.best_response(&noop);
        auto nominal = f.best_response(nullptr);
        auto obj = gaslighter_objective(f.model, noop, dm, nominal, 300, 17);
        CHECK(obj.value == 0.0);
        CHECK(obj.std_error == 0.0);
        CHECK(obj.h_total == 0.0);
    }

    SUBCASE("a constant terminal cost leaves only the design cost") {
        ScenarioConfig c = f.cfg;
        c.gaslighter_terminal = TerminalCost::zero();
        SystemModel m = build_model(c);
        auto menu = build_menu(c, m);
        GaslightEffort e = repeat_effort(menu.densities[1], m.horizon,
                                         c.design_cost_scale);
        auto alphas = std::make_shared<const AlphaVectorSet>(
            backward_induction(m, &e, {c.obs_quadrature_nodes, c.alpha_budget, true}));
        auto dm = make_alpha_policy(alphas, m);
        auto nom_alphas = std::make_shared<const AlphaVectorSet>(
            backward_induction(m, nullptr, {c.obs_quadrature_nodes, c.alpha_budget, true}));
        auto nominal = make_alpha_policy(nom_alphas, m);
        auto obj = gaslighter_objective(m, e, dm, nominal, 200, 3);
        const double h = 2.0 * design_cost(m.phi(), menu.densities[1], c.design_cost_scale);
        CHECK(obj.value == doctest::Approx(h).epsilon(1e-12));
        CHECK(obj.std_error == 0.0);
    }

    SUBCASE("matches an independent rollout oracle") {
        GaslightEffort e;
        e.design_cost_scale = f.cfg.design_cost_scale;
        e.stages = {f.menu.densities[1], f.menu.densities[0]};
        auto dm = f.best_response(&e);
        auto nominal = f.best_response(nullptr);
        auto obj = gaslighter_objective(f.model, e, dm, nominal, 4000, 21);

        // fresh loop, fresh seeds: agreement is statistical, not bitwise
        const SystemModel& m = f.model;
        DensitySampler prior(m.rho());
        DensitySampler process(m.psi());
        DensitySampler stage1(e.stages[0]);
        DensitySampler stage2(e.stages[1]);
        DensitySampler phi_sampler(m.phi());
        const int n = 4000;
        std::vector<double> gas(static_cast<std::size_t>(n));
        std::vector<double> gam(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) {
            SplitMix64 rng(mix_seed(777, 55, static_cast<std::uint64_t>(t)));
            {
                double x = prior.sample(rng.next_double());
                InformationState sigma(m.rho_gaslit());
                for (int k = 0; k < 2; ++k) {
                    const double u = dm(&sigma, k);
                    const double w = process.sample(rng.next_double());
                    const double x_next = m.state_grid->clamp(m.dynamics(x, u) + w);
                    const double y = m.obs_grid->clamp(
                        (k == 0 ? stage1 : stage2).sample(rng.next_double()));
                    sigma = gaslit_update(m, sigma, u, y, e.stage(k + 1));
                    x = x_next;
                }
                gas[static_cast<std::size_t>(t)] =
                    std::exp(m.risk * m.gaslighter_terminal(x));
            }
            {
                double x = prior.sample(rng.next_double());
                InformationState sigma(m.rho());
                for (int k = 0; k < 2; ++k) {
                    const double u = nominal(&sigma, k);
                    const double w = process.sample(rng.next_double());
                    const double x_next = m.state_grid->clamp(m.dynamics(x, u) + w);
                    const double y = m.obs_grid->clamp(phi_sampler.sample(rng.next_double()));
                    sigma = info_state_update(m, sigma, u, y);
                    x = x_next;
                }
                gam[static_cast<std::size_t>(t)] =
                    std::exp(m.risk * m.gaslighter_terminal(x));
            }
        }
        const auto mg = mean_and_standard_error(gas);
        const auto mn = mean_and_standard_error(gam);
        const double h = design_cost(m.phi(), e.stages[0], e.design_cost_scale);
        const double oracle = mg.mean - mn.mean + h;
        const double se = std::sqrt(obj.std_error * obj.std_error +
                                    mg.std_error * mg.std_error +
                                    mn.std_error * mn.std_error);
        CHECK(std::abs(obj.value - oracle) <= 4.0 * se);
    }
}

TEST_CASE("w recursion check") {
    EquilibriumFixture f;

    SUBCASE("terminal samples are exact and zero costs give W = 1") {
        ScenarioConfig c = f.cfg;
        c.gaslighter_terminal = TerminalCost::zero();
        SystemModel m = build_model(c);
        GaslightEffort noop = repeat_effort(m.phi(), m.horizon, 0.01);
        auto alphas = std::make_shared<const AlphaVectorSet>(
            backward_induction(m, &noop, {c.obs_quadrature_nodes, c.alpha_budget, true}));
        auto dm = make_alpha_policy(alphas, m);
        auto res = w_recursion_check(m, noop, dm, 20, 10, 5);
        for (std::size_t k = 0; k < res.w.size(); ++k) {
            CHECK(res.w[k] == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(res.w_se[k] == 0.0);
        }
        for (double gap : res.tower_gap) CHECK(gap == doctest::Approx(0.0));
    }

    SUBCASE("tower identity holds within Monte Carlo error") {
        GaslightEffort e;
        e.design_cost_scale = f.cfg.design_cost_scale;
        e.stages = {f.menu.densities[1], f.menu.densities[2]};
        auto dm = f.best_response(&e);
        auto res = w_recursion_check(f.model, e, dm, 60, 60, 11);
        REQUIRE(res.tower_gap.size() == 2);
        for (std::size_t k = 0; k < res.tower_gap.size(); ++k) {
            CHECK(std::abs(res.tower_gap[k]) <= 4.0 * res.tower_se[k]);
        }
        // W_K averages exp(mu Gamma) over terminal states
        CHECK(res.w.back() > 0.0);
    }
}

TEST_CASE("theorem 5 bound forms") {
    RobustnessConstants k;
    k.phi_hat = 1.0;
    k.e_gamma = 1.5;
    k.contraction = 2.0;
    k.zeta = 10.0;
    k.d0 = 0.0;

    SUBCASE("empty sum at K = 1") {
        CHECK(theorem5_bound(k, 0.3, 0.5, 1, Theorem5Form::conservative) == 0.0);
        const double s_bar = 0.3 / 20.0;
        CHECK(theorem5_bound(k, 0.3, 0.5, 1, Theorem5Form::paper) ==
              doctest::Approx(0.5 * s_bar).epsilon(1e-14));
    }

    SUBCASE("geometric sum of ones at K = 3") {
        CHECK(theorem5_bound(k, 0.4, 0.5, 3, Theorem5Form::conservative) ==
              doctest::Approx(-1.5 * 0.4 * 2.0).epsilon(1e-14));
    }

    SUBCASE("d0 contributes through phi_hat^K") {
        RobustnessConstants kd = k;
        kd.phi_hat = 2.0;
        kd.d0 = 0.25;
        const double expect = -1.5 * (8.0 * 0.25 + 0.4 * (2.0 + 4.0));
        CHECK(theorem5_bound(kd, 0.4, 0.5, 3, Theorem5Form::conservative) ==
              doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("equilibrium search") {
    EquilibriumFixture f;
    EquilibriumOptions opt;
    opt.trust_level = f.cfg.trust_level;
    opt.design_cost_scale = f.cfg.design_cost_scale;
    opt.epsilons = f.cfg.stage_epsilons();
    opt.n_trials = 3000;
    opt.seed = f.cfg.base_seed;
    opt.dp = f.dp();
    opt.sequence_budget = f.cfg.menu_sequence_budget;
    opt.coverage_points = 2;
    opt.coverage_rollouts = 60;

    SUBCASE("singleton nominal menu returns the nominal effort at zero cost") {
        EffortMenu single;
        single.ids = {"nominal"};
        single.densities = {f.model.phi()};
        auto res = search_equilibrium(f.model, single, f.constants, opt);
        CHECK(res.rows.size() == 1);
        CHECK(res.chosen == 0);
        CHECK(res.chosen_ids == std::vector<std::string>{"nominal", "nominal"});
        CHECK(std::abs(res.chosen_objective) <= 4.0 * res.chosen_std_error + 1e-15);
    }

    SUBCASE("full menu selects a strictly profitable non-nominal effort") {
        auto res = search_equilibrium(f.model, f.menu, f.constants, opt);
        CHECK(res.rows.size() == 25);
        bool non_nominal = false;
        for (const auto& id : res.chosen_ids) {
            if (id != "nominal") non_nominal = true;
        }
        CHECK(non_nominal);
        CHECK(res.chosen_objective < -4.0 * res.chosen_std_error);
        CHECK(res.chosen_objective >= res.theorem5_conservative);
        // selected candidate undercuts every certified candidate (argmin)
        for (const auto& row : res.rows) {
            if (!row.evaluated) continue;
            CHECK(res.chosen_objective <=
                  row.objective + res.epsilon_used +
                      4.0 * std::sqrt(res.chosen_std_error * res.chosen_std_error +
                                      row.std_error * row.std_error));
        }
        // stealth column is consistent with the stage integrals
        const double s_bar =
            opt.trust_level / (f.constants.contraction * f.constants.zeta);
        for (const auto& row : res.rows) {
            bool all_within = true;
            for (int entry : row.stage_entries) {
                if (ess_sufficient_integral(
                        f.model.phi(),
                        f.menu.densities[static_cast<std::size_t>(entry)]) > s_bar) {
                    all_within = false;
                }
            }
            CHECK(row.stealth_pass == all_within);
        }
        CHECK(res.coverage_checked > 0);
        CHECK(res.coverage_fraction >= 0.0);
    }

    SUBCASE("huge epsilon marks the whole evaluated menu as dominated") {
        EquilibriumOptions wide = opt;
        wide.epsilons = {1e6};
        wide.n_trials = 500;
        wide.coverage_points = 0;
        auto res = search_equilibrium(f.model, f.menu, f.constants, wide);
        int evaluated = 0;
        for (const auto& row : res.rows) evaluated += row.evaluated ? 1 : 0;
        CHECK(static_cast<int>(res.epsilon_dominated.size()) == evaluated);
    }

    SUBCASE("sequence budget guard") {
        EquilibriumOptions tight = opt;
        tight.sequence_budget = 3;
        CHECK_THROWS_AS((void)search_equilibrium(f.model, f.menu, f.constants, tight),
                        budget_error);
    }
}
