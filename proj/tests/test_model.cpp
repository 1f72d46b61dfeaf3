#include <doctest.h>

#include <cmath>
#include <vector>

#include "gaslab/filter.hpp"
#include "gaslab/model.hpp"
#include "gaslab/numeric.hpp"
#include "gaslab/rng.hpp"
#include "gaslab/scenario.hpp"
#include "test_helpers.hpp"

using namespace gaslab;

namespace {

SystemModel canonical_model() {
    return build_model(scenarios::canonical());
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
    return a.states == b.states && a.observations == b.observations &&
           a.controls == b.controls;
}

}  // namespace

TEST_CASE("identity dynamics with near-delta process noise stays put") {
    ScenarioConfig c = scenarios::canonical();
    c.horizon = 1;
    c.dynamics = {1.0, 0.0};
    // hat of one grid spacing: w is confined to [-0.125, 0.125]
    c.increment_grid = {-0.125, 0.125, 3};
    c.process_noise = {NoiseSpec::Family::truncated_normal, 0.0, 1.0, true};
    SystemModel m = build_model(c);

    auto policy = ControlPolicy::constant(0.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto traj = simulate(m, policy, nullptr, SamplingMode::nominal, 1000 + s);
        CHECK(std::abs(traj.states[1] - traj.states[0]) <= m.state_grid->spacing());
    }
}

TEST_CASE("reference mode with uniform phi has mean 1/2") {
    ScenarioConfig c = scenarios::canonical();
    c.obs_noise = {NoiseSpec::Family::uniform, 0.0, 1.0, false};
    SystemModel m = build_model(c);
    auto policy = ControlPolicy::constant(0.0);

    const int n = 100000;
    std::vector<double> ys;
    ys.reserve(static_cast<std::size_t>(n) * 3);
    for (int t = 0; t < n; ++t) {
        auto traj = simulate(m, policy, nullptr, SamplingMode::reference,
                             mix_seed(7, stream::simulate, static_cast<std::uint64_t>(t)));
        for (double y : traj.observations) ys.push_back(y);
    }
    auto ms = mean_and_standard_error(ys);
    CHECK(std::abs(ms.mean - 0.5) <= 3.0 * ms.std_error);
}

TEST_CASE("gaslit mode with nominal effort reproduces reference draws") {
    SystemModel m = canonical_model();
    GaslightEffort noop = repeat_effort(m.phi(), m.horizon, 0.01);
    auto policy = ControlPolicy::constant(0.0);
    for (std::uint64_t s = 1; s <= 20; ++s) {
        auto ref = simulate(m, policy, nullptr, SamplingMode::reference, s);
        auto gas = simulate(m, policy, &noop, SamplingMode::gaslit, s);
        CHECK(same_trajectory(ref, gas));
    }
}

TEST_CASE("simulate rejects inconsistent effort arguments") {
    SystemModel m = canonical_model();
    auto policy = ControlPolicy::constant(0.0);
    CHECK_THROWS_WITH(
        (void)simulate(m, policy, nullptr, SamplingMode::gaslit, 1),
        "missing effort");
    GaslightEffort e = repeat_effort(m.phi(), m.horizon, 0.01);
    CHECK_THROWS(
        (void)simulate(m, policy, &e, SamplingMode::reference, 1));
}

TEST_CASE("simulate is deterministic given the seed") {
    SystemModel m = canonical_model();
    auto policy = ControlPolicy::constant(1.0);
    auto a = simulate(m, policy, nullptr, SamplingMode::nominal, 99);
    auto b = simulate(m, policy, nullptr, SamplingMode::nominal, 99);
    CHECK(same_trajectory(a, b));
    auto c = simulate(m, policy, nullptr, SamplingMode::nominal, 100);
    CHECK_FALSE(same_trajectory(a, c));
}

TEST_CASE("state clamping never fires on the canonical scenario") {
    SystemModel m = canonical_model();
    auto policy = ControlPolicy::constant(1.0);  // worst-case drift
    int clamps = 0;
    for (int t = 0; t < 2000; ++t) {
        auto traj = simulate(m, policy, nullptr, SamplingMode::nominal,
                             mix_seed(3, stream::simulate, static_cast<std::uint64_t>(t)));
        clamps += traj.state_clamps;
    }
    CHECK(clamps == 0);
}

TEST_CASE("pathwise cost") {
    SystemModel m = canonical_model();

    SUBCASE("zero costs give exactly one") {
        ScenarioConfig c = scenarios::canonical();
        c.running_cost = {0.0, 0.0};
        c.dm_terminal = TerminalCost::zero();
        SystemModel zero = build_model(c);
        auto traj = simulate(zero, ControlPolicy::constant(0.0), nullptr,
                             SamplingMode::nominal, 5);
        CHECK(pathwise_cost(zero, traj) == 1.0);
    }

    SUBCASE("direct substitution at K = 1") {
        ScenarioConfig c = scenarios::canonical();
        c.horizon = 1;
        c.running_cost = {0.0, 1.0};                    // L = u^2
        c.dm_terminal = TerminalCost::quadratic(1.0);   // Phi = x^2
        c.risk = 0.5;
        SystemModel one = build_model(c);
        Trajectory traj;
        traj.states = {0.3, 2.0};
        traj.observations = {0.5};
        traj.controls = {1.0};
        CHECK(pathwise_cost(one, traj) ==
              doctest::Approx(std::exp(2.5)).epsilon(1e-14));
    }

    SUBCASE("matches a direct re-evaluation oracle") {
        auto policy = ControlPolicy::constant(1.0);
        for (std::uint64_t s = 0; s < 25; ++s) {
            auto traj = simulate(m, policy, nullptr, SamplingMode::nominal, 500 + s);
            double acc = 0.0;
            for (std::size_t k = 0; k < traj.controls.size(); ++k) {
                acc += 0.6 * traj.states[k] * traj.states[k] +
                       0.25 * traj.controls[k] * traj.controls[k];
            }
            const double xk = traj.states.back();
            acc += 1.6 * xk * xk;
            CHECK(pathwise_cost(m, traj) ==
                  doctest::Approx(std::exp(0.2 * acc)).epsilon(1e-13));
        }
    }
}

TEST_CASE("likelihood ratio") {
    SUBCASE("uninformative channel gives ratio one") {
        ScenarioConfig c = scenarios::canonical();
        c.observation = {0.0, 0.0};
        SystemModel m = build_model(c);
        auto traj = simulate(m, ControlPolicy::constant(0.0), nullptr,
                             SamplingMode::nominal, 11);
        for (int k = 0; k <= m.horizon; ++k) {
            CHECK(likelihood_ratio(m, traj, k) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }

    SUBCASE("empty product convention and hand-rolled product") {
        SystemModel m = canonical_model();
        auto traj = simulate(m, ControlPolicy::constant(0.0), nullptr,
                             SamplingMode::nominal, 21);
        CHECK(likelihood_ratio(m, traj, 0) == 1.0);

        const GridDensity& phi = m.phi();
        double expected = 1.0;
        for (int i = 1; i <= 3; ++i) {
            const double y = traj.observations[static_cast<std::size_t>(i - 1)];
            const double x_prev = traj.states[static_cast<std::size_t>(i - 1)];
            expected *= phi.interp_clamped(y - 0.04 * x_prev) / phi.interp_clamped(y);
        }
        CHECK(likelihood_ratio(m, traj, 3) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("change of measure: E_ref[Z_K g] matches E_nom[g]") {
    SystemModel m = canonical_model();
    // a feedback policy so controls genuinely depend on the observation path
    auto policy = ControlPolicy::feedback([&m](const InformationState* s, int) {
        double mass = 0.0, mean = 0.0;
        for (int i = 0; i < s->size(); ++i) {
            const double w = m.state_grid->weight(i) * s->value(i);
            mass += w;
            mean += w * m.state_grid->node(i);
        }
        mean /= mass > 0.0 ? mass : 1.0;
        return mean > 0.05 ? -1.0 : (mean < -0.05 ? 1.0 : 0.0);
    });

    auto g_fn = [](const Trajectory& t) {
        return std::exp(-t.states.back() * t.states.back()) +
               0.3 * std::cos(3.0 * t.observations[1]);
    };

    const int n = 30000;
    std::vector<double> ref_samples(static_cast<std::size_t>(n));
    std::vector<double> nom_samples(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        const auto seed = mix_seed(17, stream::simulate, static_cast<std::uint64_t>(t));
        auto r = simulate(m, policy, nullptr, SamplingMode::reference, seed);
        ref_samples[static_cast<std::size_t>(t)] =
            likelihood_ratio(m, r, m.horizon) * g_fn(r);
        auto nm = simulate(m, policy, nullptr, SamplingMode::nominal, seed + 1);
        nom_samples[static_cast<std::size_t>(t)] = g_fn(nm);
    }
    auto ref = mean_and_standard_error(ref_samples);
    auto nom = mean_and_standard_error(nom_samples);
    const double se = std::sqrt(ref.std_error * ref.std_error +
                                nom.std_error * nom.std_error);
    CHECK(std::abs(ref.mean - nom.mean) <= 4.0 * se);
}

TEST_CASE("model validation catches bad inputs") {
    ScenarioConfig c = scenarios::canonical();
    c.risk = 0.0;
    CHECK_THROWS(build_model(c));

    ScenarioConfig c2 = scenarios::canonical();
    c2.control_values.clear();
    CHECK_THROWS(build_model(c2));

    // zero node in phi makes the reference channel degenerate
    ScenarioConfig c3 = scenarios::canonical();
    c3.obs_noise.zero_endpoints = true;
    CHECK_THROWS_WITH(build_model(c3), "degenerate reference density");
}
