// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance is pinned here, straight from the experiment contracts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gaslab/commands.hpp"
#include "gaslab/config_io.hpp"
#include "gaslab/dp.hpp"
#include "gaslab/filter.hpp"
#include "gaslab/rng.hpp"
#include "gaslab/robustness.hpp"
#include "gaslab/scenario.hpp"
#include "gaslab/stackelberg.hpp"
#include "gaslab/stealth.hpp"

using namespace gaslab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
  public:
    explicit Criterion(std::string name)
        : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

    void require(bool ok, const std::string& what) {
        if (!ok) {
            problems_.push_back(what);
        }
    }

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

    void finish(double time_limit_s) {
        const double t = seconds();
        if (t >= time_limit_s) {
            problems_.push_back("runtime " + std::to_string(t) + "s exceeds " +
                                std::to_string(time_limit_s) + "s");
        }
        if (problems_.empty()) {
            std::printf("[PASS] %s (%.1fs)\n", name_.c_str(), t);
        } else {
            ++g_failures;
            std::printf("[FAIL] %s (%.1fs)\n", name_.c_str(), t);
            for (const auto& p : problems_) {
                std::printf("       - %s\n", p.c_str());
            }
        }
        std::fflush(stdout);
    }

  private:
    std::string name_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> problems_;
};

std::vector<int> certified_entries(const SystemModel& model,
                                   const EffortMenu& menu, double s_bar) {
    std::vector<int> out;
    for (int i = 1; i < menu.size(); ++i) {
        if (ess_sufficient_integral(model.phi(),
                                    menu.densities[static_cast<std::size_t>(i)]) <=
            s_bar) {
            out.push_back(i);
        }
    }
    return out;
}

void criterion1_cost_equivalence() {
    Criterion c("criterion 1: cost representation equivalence (1e5 trials)");
    const auto cfg = scenarios::canonical();
    const SystemModel model = build_model(cfg);
    const auto policy = ControlPolicy::constant(0.0);

    const auto direct = cost_direct(model, policy, cfg.cost_trials, cfg.base_seed);
    const auto info =
        cost_info_state(model, policy, nullptr, cfg.cost_trials, cfg.base_seed);
    const double se = std::sqrt(direct.std_error * direct.std_error +
                                info.std_error * info.std_error);
    const double gap = std::abs(direct.estimate - info.estimate);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "direct=%.6f info=%.6f gap=%.2e 4se=%.2e", direct.estimate,
                  info.estimate, gap, 4.0 * se);
    c.require(gap <= 4.0 * se, std::string("no agreement: ") + detail);
    std::printf("       %s\n", detail);
    c.finish(120.0);
}

void criterion2_stagewise_bounds() {
    Criterion c("criterion 2: lemma 1/2 and theorem 1 sample-wise bounds");
    const auto cfg = scenarios::canonical();
    const SystemModel model = build_model(cfg);
    const auto constants = compute_constants(model);
    const EffortMenu menu = build_menu(cfg, model);
    const double s_bar =
        cfg.trust_level / (constants.contraction * constants.zeta);
    const auto certified = certified_entries(model, menu, s_bar);
    c.require(certified.size() == 10, "expected a 10-candidate certified menu");

    const auto r1 = lemma1_harness(model, constants, 1000, cfg.base_seed ^ 0xa1);
    c.require(r1.records.size() == 1000, "lemma1 instance count");
    c.require(r1.violations(1e-9) == 0, "lemma 1 violations");

    std::vector<GridDensity> densities;
    for (int idx : certified) {
        densities.push_back(menu.densities[static_cast<std::size_t>(idx)]);
    }
    const auto r2 =
        lemma2_harness(model, constants, densities, 1000, cfg.base_seed ^ 0xa2);
    c.require(r2.records.size() == 1000, "lemma2 instance count");
    c.require(r2.violations(1e-9) == 0, "lemma 2 violations");

    int t1_records = 0;
    int t1_violations = 0;
    for (std::size_t i = 0; i < certified.size(); ++i) {
        const auto effort = repeat_effort(
            menu.densities[static_cast<std::size_t>(certified[i])], model.horizon,
            cfg.design_cost_scale);
        const auto rt = theorem1_harness(model, constants, effort, 100,
                                         cfg.base_seed ^ (0xb0 + i));
        t1_records += static_cast<int>(rt.records.size());
        t1_violations += rt.violations(1e-9);
    }
    c.require(t1_records == 3000, "theorem1 instance count");
    c.require(t1_violations == 0, "theorem 1 violations");

    // recursion vs closed form at relative 1e-10 on random inputs
    SplitMix64 rng(cfg.base_seed ^ 0xc0);
    DensitySampler phi_sampler(model.phi());
    bool forms_agree = true;
    for (int rep = 0; rep < 500; ++rep) {
        GaslightEffort effort;
        effort.design_cost_scale = cfg.design_cost_scale;
        std::vector<double> ys;
        for (int k = 0; k < model.horizon; ++k) {
            effort.stages.push_back(
                menu.densities[1 + rng.next() % static_cast<std::uint64_t>(menu.size() - 1)]);
            ys.push_back(phi_sampler.sample(rng.next_double()));
        }
        const auto rec = theorem1_bound(model, constants, ys, effort);
        const auto closed = theorem1_closed_form(model, constants, ys, effort);
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (std::abs(rec[i] - closed[i]) >
                1e-10 * std::max({std::abs(rec[i]), std::abs(closed[i]), 1.0})) {
                forms_agree = false;
            }
        }
    }
    c.require(forms_agree, "theorem1 recursion vs closed form at relative 1e-10");
    c.finish(60.0);
}

void criterion3_value_deviation_bounds() {
    Criterion c("criterion 3: theorem 2 and theorem 3 at 1e4 CRN trials");
    const auto policy = ControlPolicy::constant(0.0);

    // canonical scenario: volume one, both forms asserted
    {
        const auto cfg = scenarios::canonical();
        const SystemModel model = build_model(cfg);
        const auto constants = compute_constants(model);
        const EffortMenu menu = build_menu(cfg, model);
        const double s_bar =
            cfg.trust_level / (constants.contraction * constants.zeta);
        const auto certified = certified_entries(model, menu, s_bar);
        c.require(certified.size() == 10, "canonical menu must certify 10 candidates");
        const double corrected = theorem3_bound(
            constants, cfg.trust_level, model.horizon, Theorem3Form::volume_corrected);
        const double paper = theorem3_bound(constants, cfg.trust_level,
                                            model.horizon, Theorem3Form::paper);
        c.require(std::abs(corrected - paper) <=
                      1e-12 * std::max(1.0, std::abs(paper)),
                  "volume-1 collapse of the two forms");
        for (std::size_t i = 0; i < certified.size(); ++i) {
            const auto effort = repeat_effort(
                menu.densities[static_cast<std::size_t>(certified[i])],
                model.horizon, cfg.design_cost_scale);
            const auto t2 = theorem2_check(model, constants, effort, policy,
                                           cfg.theorem2_trials,
                                           cfg.base_seed ^ (0xd0 + i));
            const double se = std::sqrt(t2.lhs_se * t2.lhs_se + t2.rhs_se * t2.rhs_se);
            c.require(t2.lhs <= t2.rhs + 4.0 * se,
                      "theorem 2 violation on " +
                          menu.ids[static_cast<std::size_t>(certified[i])]);
            c.require(corrected >= t2.rhs - 4.0 * t2.rhs_se,
                      "theorem 3 (corrected) violation on " +
                          menu.ids[static_cast<std::size_t>(certified[i])]);
            c.require(paper >= t2.rhs - 4.0 * t2.rhs_se,
                      "theorem 3 (paper form, vol 1) violation on " +
                          menu.ids[static_cast<std::size_t>(certified[i])]);
        }
    }

    // wide scenario: interval of length two with a split prior, corrected form
    {
        const auto cfg = scenarios::canonical_wide();
        const SystemModel model = build_model(cfg);
        const auto constants = compute_constants(model);
        const EffortMenu menu = build_menu(cfg, model);
        const double s_bar =
            cfg.trust_level / (constants.contraction * constants.zeta);
        const auto certified = certified_entries(model, menu, s_bar);
        c.require(!certified.empty(), "wide menu must certify candidates");
        c.require(constants.d0 > 0.0, "wide scenario must exercise d0 > 0");
        const double corrected = theorem3_bound(
            constants, cfg.trust_level, model.horizon, Theorem3Form::volume_corrected);
        for (std::size_t i = 0; i < certified.size(); ++i) {
            const auto effort = repeat_effort(
                menu.densities[static_cast<std::size_t>(certified[i])],
                model.horizon, cfg.design_cost_scale);
            const auto t2 = theorem2_check(model, constants, effort, policy,
                                           cfg.theorem2_trials,
                                           cfg.base_seed ^ (0xe0 + i));
            const double se = std::sqrt(t2.lhs_se * t2.lhs_se + t2.rhs_se * t2.rhs_se);
            c.require(t2.lhs <= t2.rhs + 4.0 * se,
                      "theorem 2 violation (wide) on " +
                          menu.ids[static_cast<std::size_t>(certified[i])]);
            c.require(corrected >= t2.rhs - 4.0 * t2.rhs_se,
                      "theorem 3 (corrected, wide) violation on " +
                          menu.ids[static_cast<std::size_t>(certified[i])]);
        }
    }
    c.finish(300.0);
}

void criterion4_stealth_chain() {
    Criterion c("criterion 4: stealthiness chain (certificate implies the estimator)");
    const auto cfg = scenarios::ess_chain();
    const SystemModel model = build_model(cfg);
    const auto constants = compute_constants(model);
    const EffortMenu menu = build_menu(cfg, model);
    const double s = cfg.trust_level;
    const double s_bar = s / (constants.contraction * constants.zeta);

    int passing = 0;
    int failing_both = 0;
    for (int i = 1; i < menu.size(); ++i) {
        const double integral = ess_sufficient_integral(
            model.phi(), menu.densities[static_cast<std::size_t>(i)]);
        const auto ess = ess_definition_check(
            model, menu.densities[static_cast<std::size_t>(i)], 1, s, constants,
            cfg.ess_sigma_samples, cfg.ess_obs_trials,
            cfg.base_seed ^ static_cast<std::uint64_t>(i));
        if (integral <= s_bar) {
            ++passing;
            c.require(ess.lhs <= s + 4.0 * ess.std_error,
                      "sufficient pass but estimator reject: " +
                          menu.ids[static_cast<std::size_t>(i)]);
        } else if (ess.lhs > s + 4.0 * ess.std_error) {
            ++failing_both;
        }
    }
    c.require(passing >= 1, "need at least one certified candidate");
    c.require(failing_both >= 1,
              "need a constructed candidate failing both the integral and the definition");
    c.finish(60.0);
}

void criterion5_dp_oracle() {
    Criterion c("criterion 5: exact solver equals the policy-tree oracle");
    int matched = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto cfg = scenarios::tiny(seed);
        const SystemModel model = build_model(cfg);
        const auto alphas = backward_induction(model, nullptr, {3, 4000, true});
        const double z = alpha_value(alphas, InformationState(model.rho()), 0);
        const double oracle = enumerate_policies_oracle(model, nullptr, 3);
        if (std::abs(z - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle))) {
            ++matched;
        }
    }
    c.require(matched == 100, "oracle equivalence failed on " +
                                  std::to_string(100 - matched) + " instances");

    // homogeneity and concavity spot checks
    bool homogeneous = true;
    bool concave = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto cfg = scenarios::tiny(seed);
        const SystemModel model = build_model(cfg);
        const auto alphas = backward_induction(model, nullptr, {3, 4000, true});
        SplitMix64 rng(seed * 17);
        const int n = model.state_grid->size();
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<double> a(static_cast<std::size_t>(n));
            std::vector<double> b(static_cast<std::size_t>(n));
            for (double& x : a) x = rng.next_double();
            for (double& x : b) x = rng.next_double();
            const double lam = 0.2 + 3.0 * rng.next_double();
            std::vector<double> scaled(a);
            for (double& x : scaled) x *= lam;
            std::vector<double> mid(static_cast<std::size_t>(n));
            for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);

            InformationState sa(model.state_grid, a);
            InformationState sb(model.state_grid, b);
            const double va = alpha_value(alphas, sa, 0);
            const double vb = alpha_value(alphas, sb, 0);
            const double vs =
                alpha_value(alphas, InformationState(model.state_grid, scaled), 0);
            const double vm =
                alpha_value(alphas, InformationState(model.state_grid, mid), 0);
            if (std::abs(vs - lam * va) > 1e-12 * (1.0 + std::abs(lam * va))) {
                homogeneous = false;
            }
            if (vm < 0.5 * va + 0.5 * vb - 1e-12) concave = false;
        }
    }
    c.require(homogeneous, "positive homogeneity at 1e-12");
    c.require(concave, "concavity at 1e-12");
    c.finish(60.0);
}

void criterion6_equilibrium() {
    Criterion c("criterion 6: approximate-equilibrium search and cost estimate");

    auto run_search = [](const ScenarioConfig& cfg) {
        const SystemModel model = build_model(cfg);
        const auto constants = compute_constants(model);
        const EffortMenu menu = build_menu(cfg, model);
        EquilibriumOptions opt;
        opt.trust_level = cfg.trust_level;
        opt.design_cost_scale = cfg.design_cost_scale;
        opt.epsilons = cfg.stage_epsilons();
        opt.n_trials = cfg.objective_trials;
        opt.seed = cfg.base_seed;
        opt.dp = {cfg.obs_quadrature_nodes, cfg.alpha_budget, true};
        opt.sequence_budget = cfg.menu_sequence_budget;
        return search_equilibrium(model, menu, constants, opt);
    };

    // singleton nominal menu: the accounting must cancel
    {
        const auto res = run_search(scenarios::equilibrium_nominal());
        c.require(std::abs(res.chosen_objective) <=
                      4.0 * res.chosen_std_error + 1e-15,
                  "nominal-menu objective differs from zero");
    }

    // constructed scenario: zero running cost, well-shaped terminal reward
    {
        const auto cfg = scenarios::equilibrium();
        c.require(cfg.design_cost_scale == 0.01, "design cost parameter must be 0.01");
        const auto res = run_search(cfg);
        bool non_nominal = false;
        for (const auto& id : res.chosen_ids) {
            if (id != "nominal") non_nominal = true;
        }
        c.require(non_nominal, "selected effort is nominal");
        c.require(res.chosen_objective < -4.0 * res.chosen_std_error,
                  "selected effort does not profit beyond 4 standard errors");
        const auto& best = res.rows[static_cast<std::size_t>(res.chosen)];
        for (const auto& row : res.rows) {
            if (!row.evaluated) continue;
            if (row.stealth_pass) {
                c.require(row.objective >=
                              res.theorem5_conservative - 4.0 * row.std_error,
                          "conservative cost estimate violated");
            }
            const double slack =
                res.epsilon_used + 4.0 * std::sqrt(best.std_error * best.std_error +
                                                   row.std_error * row.std_error);
            c.require(best.objective <= row.objective + slack,
                      "candidate table inconsistency");
        }
        char detail[120];
        std::snprintf(detail, sizeof(detail),
                      "chosen=[%s,%s] objective=%.4f se=%.4f",
                      res.chosen_ids[0].c_str(), res.chosen_ids[1].c_str(),
                      res.chosen_objective, res.chosen_std_error);
        std::printf("       %s\n", detail);
    }
    c.finish(600.0);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_artifacts(const fs::path& a, const fs::path& b) {
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename().string();
        if (name == "run_report.json") continue;  // carries wall time
        if (slurp(entry.path()) != slurp(b / name)) return false;
    }
    return true;
}

void criterion7_determinism() {
    Criterion c("criterion 7: byte-identical reruns");
    const auto base = fs::temp_directory_path() / "gaslab_acceptance";
    fs::remove_all(base);

    struct Job {
        const char* name;
        ScenarioConfig config;
        CommandOutcome (*fn)(const ScenarioConfig&, const std::string&,
                             const CommandOptions&);
    };
    const std::vector<Job> jobs{
        {"simulate", scenarios::canonical(), &cmd_simulate},
        {"solve", scenarios::canonical(), &cmd_solve},
        {"stealth", scenarios::ess_chain(), &cmd_stealth},
        {"verify_bounds", scenarios::ess_chain(), &cmd_verify_bounds},
    };
    for (const auto& job : jobs) {
        const auto d1 = base / (std::string(job.name) + "_1");
        const auto d2 = base / (std::string(job.name) + "_2");
        const auto r1 = job.fn(job.config, d1.string(), {});
        const auto r2 = job.fn(job.config, d2.string(), {});
        c.require(r1.exit_code == 0 && r2.exit_code == 0,
                  std::string(job.name) + " did not succeed");
        c.require(same_artifacts(d1, d2),
                  std::string(job.name) + " artifacts differ between reruns");
    }
    c.finish(300.0);
}

}  // namespace

int main() {
    criterion1_cost_equivalence();
    criterion2_stagewise_bounds();
    criterion3_value_deviation_bounds();
    criterion4_stealth_chain();
    criterion5_dp_oracle();
    criterion6_equilibrium();
    criterion7_determinism();

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
