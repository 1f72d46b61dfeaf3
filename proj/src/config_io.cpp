#include "gaslab/config_io.hpp"

#include <fstream>

#include "gaslab/errors.hpp"

namespace gaslab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw config_error(path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double num_field(const json& j, const std::string& path, const char* key) {
    return get_number(member(j, path, key), path + "." + key);
}

double num_field_or(const json& j, const std::string& path, const char* key,
                    double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return get_number(j.at(key), path + "." + key);
}

int int_field(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool bool_field_or(const json& j, const std::string& path, const char* key,
                   bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string str_field(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

GridSpec grid_spec(const json& j, const std::string& path) {
    GridSpec g;
    g.lower = num_field(j, path, "lower");
    g.upper = num_field(j, path, "upper");
    g.n_points = int_field(j, path, "n_points");
    if (!(g.lower < g.upper)) fail(path, "lower must be below upper");
    if (g.n_points < 2) fail(path + ".n_points", "need at least 2");
    return g;
}

json grid_json(const GridSpec& g) {
    return {{"lower", g.lower}, {"upper", g.upper}, {"n_points", g.n_points}};
}

NoiseSpec noise_spec(const json& j, const std::string& path) {
    NoiseSpec n;
    const std::string family = str_field(j, path, "family");
    if (family == "truncated_normal") {
        n.family = NoiseSpec::Family::truncated_normal;
        n.location = num_field(j, path, "location");
        n.scale = num_field(j, path, "scale");
        if (!(n.scale > 0.0)) fail(path + ".scale", "must be positive");
    } else if (family == "uniform") {
        n.family = NoiseSpec::Family::uniform;
    } else {
        fail(path + ".family", "unknown noise family '" + family + "'");
    }
    n.zero_endpoints = bool_field_or(j, path, "zero_endpoints", false);
    return n;
}

json noise_json(const NoiseSpec& n) {
    json j;
    switch (n.family) {
        case NoiseSpec::Family::truncated_normal:
            j["family"] = "truncated_normal";
            j["location"] = n.location;
            j["scale"] = n.scale;
            break;
        case NoiseSpec::Family::uniform:
            j["family"] = "uniform";
            break;
    }
    j["zero_endpoints"] = n.zero_endpoints;
    return j;
}

TerminalCost terminal_cost(const json& j, const std::string& path) {
    const std::string kind = str_field(j, path, "kind");
    if (kind == "zero") return TerminalCost::zero();
    if (kind == "quadratic") {
        return TerminalCost::quadratic(num_field(j, path, "weight"),
                                       num_field_or(j, path, "center", 0.0));
    }
    if (kind == "target_well") {
        const double width = num_field(j, path, "width");
        if (!(width > 0.0)) fail(path + ".width", "must be positive");
        return TerminalCost::target_well(num_field(j, path, "center"), width,
                                         num_field(j, path, "depth"));
    }
    fail(path + ".kind", "unknown terminal cost '" + kind + "'");
}

json terminal_json(const TerminalCost& t) {
    switch (t.kind) {
        case TerminalCost::Kind::zero:
            return {{"kind", "zero"}};
        case TerminalCost::Kind::quadratic:
            return {{"kind", "quadratic"}, {"weight", t.weight}, {"center", t.center}};
        case TerminalCost::Kind::target_well:
            return {{"kind", "target_well"},
                    {"center", t.center},
                    {"width", t.width},
                    {"depth", t.weight}};
    }
    return {};
}

EffortSpec effort_spec(const json& j, const std::string& path) {
    EffortSpec e;
    e.id = str_field(j, path, "id");
    const std::string kind = str_field(j, path, "kind");
    if (kind == "nominal") {
        e.kind = EffortSpec::Kind::nominal;
    } else if (kind == "bump") {
        e.kind = EffortSpec::Kind::bump;
        e.amplitude = num_field(j, path, "amplitude");
        e.center = num_field(j, path, "center");
        e.width = num_field(j, path, "width");
        if (!(e.width > 0.0)) fail(path + ".width", "must be positive");
    } else if (kind == "tilt") {
        e.kind = EffortSpec::Kind::tilt;
        e.amplitude = num_field(j, path, "amplitude");
        e.width = num_field(j, path, "width");
        e.margin = num_field(j, path, "margin");
        if (!(e.width > 0.0)) fail(path + ".width", "must be positive");
        if (!(e.margin > 0.0)) fail(path + ".margin", "must be positive");
    } else {
        fail(path + ".kind", "unknown effort kind '" + kind + "'");
    }
    return e;
}

json effort_json(const EffortSpec& e) {
    json j{{"id", e.id}};
    switch (e.kind) {
        case EffortSpec::Kind::nominal:
            j["kind"] = "nominal";
            break;
        case EffortSpec::Kind::bump:
            j["kind"] = "bump";
            j["amplitude"] = e.amplitude;
            j["center"] = e.center;
            j["width"] = e.width;
            break;
        case EffortSpec::Kind::tilt:
            j["kind"] = "tilt";
            j["amplitude"] = e.amplitude;
            j["width"] = e.width;
            j["margin"] = e.margin;
            break;
    }
    return j;
}

SamplingMode parse_mode(const std::string& mode, const std::string& path) {
    if (mode == "nominal") return SamplingMode::nominal;
    if (mode == "gaslit") return SamplingMode::gaslit;
    if (mode == "reference") return SamplingMode::reference;
    fail(path, "unknown sampling mode '" + mode + "'");
}

}  // namespace

ScenarioConfig config_from_json(const json& root) {
    ScenarioConfig c;
    c.name = str_field(root, "", "name");

    const json& model = member(root, "", "model");
    c.state_grid = grid_spec(member(model, "model", "state_grid"), "model.state_grid");
    c.obs_grid = grid_spec(member(model, "model", "obs_grid"), "model.obs_grid");
    c.increment_grid =
        grid_spec(member(model, "model", "increment_grid"), "model.increment_grid");
    c.horizon = int_field(model, "model", "horizon");
    if (c.horizon < 0) fail("model.horizon", "must be nonnegative");

    const json& controls = member(model, "model", "controls");
    if (!controls.is_array() || controls.empty()) {
        fail("model.controls", "expected a nonempty array");
    }
    c.control_values.clear();
    for (std::size_t i = 0; i < controls.size(); ++i) {
        c.control_values.push_back(
            get_number(controls[i], "model.controls[" + std::to_string(i) + "]"));
    }

    const json& dyn = member(model, "model", "dynamics");
    c.dynamics = {num_field(dyn, "model.dynamics", "state_coef"),
                  num_field(dyn, "model.dynamics", "control_coef")};
    const json& obs = member(model, "model", "observation");
    c.observation = {num_field(obs, "model.observation", "slope"),
                     num_field(obs, "model.observation", "intercept")};
    const json& run = member(model, "model", "running_cost");
    c.running_cost = {num_field(run, "model.running_cost", "state_weight"),
                      num_field(run, "model.running_cost", "control_weight")};
    c.dm_terminal = terminal_cost(member(model, "model", "dm_terminal"),
                                  "model.dm_terminal");
    c.gaslighter_terminal = terminal_cost(
        member(model, "model", "gaslighter_terminal"), "model.gaslighter_terminal");
    c.risk = num_field(model, "model", "risk");
    if (!(c.risk > 0.0)) fail("model.risk", "must be positive");
    c.process_noise =
        noise_spec(member(model, "model", "process_noise"), "model.process_noise");
    c.obs_noise = noise_spec(member(model, "model", "obs_noise"), "model.obs_noise");
    c.prior = noise_spec(member(model, "model", "prior"), "model.prior");
    if (model.contains("gaslit_prior") && !model.at("gaslit_prior").is_null()) {
        c.gaslit_prior = noise_spec(model.at("gaslit_prior"), "model.gaslit_prior");
    }

    const json& gl = member(root, "", "gaslighter");
    const json& menu = member(gl, "gaslighter", "menu");
    if (!menu.is_array()) fail("gaslighter.menu", "expected an array");
    c.menu.clear();
    for (std::size_t i = 0; i < menu.size(); ++i) {
        c.menu.push_back(
            effort_spec(menu[i], "gaslighter.menu[" + std::to_string(i) + "]"));
    }
    c.trust_level = num_field(gl, "gaslighter", "trust_level");
    if (!(c.trust_level > 0.0)) fail("gaslighter.trust_level", "must be positive");
    c.design_cost_scale = num_field(gl, "gaslighter", "design_cost_scale");
    if (!(c.design_cost_scale > 0.0)) {
        fail("gaslighter.design_cost_scale", "must be positive");
    }
    const json& eps = member(gl, "gaslighter", "epsilons");
    if (!eps.is_array() || eps.empty()) {
        fail("gaslighter.epsilons", "expected a nonempty array");
    }
    c.epsilons.clear();
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double e =
            get_number(eps[i], "gaslighter.epsilons[" + std::to_string(i) + "]");
        if (!(e > 0.0)) {
            fail("gaslighter.epsilons[" + std::to_string(i) + "]", "must be positive");
        }
        c.epsilons.push_back(e);
    }

    const json& num = member(root, "", "numerics");
    c.obs_quadrature_nodes = int_field(num, "numerics", "obs_quadrature_nodes");
    if (c.obs_quadrature_nodes < 1) {
        fail("numerics.obs_quadrature_nodes", "must be at least 1");
    }
    c.tie_tolerance = num_field(num, "numerics", "tie_tolerance");
    c.alpha_budget = int_field(num, "numerics", "alpha_budget");
    c.policy_tree_budget =
        static_cast<long>(num_field(num, "numerics", "policy_tree_budget"));
    c.menu_sequence_budget = int_field(num, "numerics", "menu_sequence_budget");

    const json& trials = member(root, "", "trials");
    c.cost_trials = int_field(trials, "trials", "cost");
    c.bound_trials = int_field(trials, "trials", "bound");
    c.theorem2_trials = int_field(trials, "trials", "theorem2");
    c.ess_sigma_samples = int_field(trials, "trials", "ess_sigma");
    c.ess_obs_trials = int_field(trials, "trials", "ess_obs");
    c.simulate_trials = int_field(trials, "trials", "simulate");
    c.simulate_mode = parse_mode(str_field(trials, "trials", "simulate_mode"),
                                 "trials.simulate_mode");
    if (trials.contains("simulate_effort")) {
        c.simulate_effort_id = str_field(trials, "trials", "simulate_effort");
    }
    c.objective_trials = int_field(trials, "trials", "objective");
    c.w_check_forward = int_field(trials, "trials", "w_forward");
    c.w_check_rollouts = int_field(trials, "trials", "w_rollouts");
    for (const char* key : {"cost", "bound", "theorem2", "ess_sigma", "ess_obs",
                            "simulate", "objective", "w_forward", "w_rollouts"}) {
        if (int_field(trials, "trials", key) < 1) {
            fail(std::string("trials.") + key, "must be at least 1");
        }
    }

    const json& seed = member(root, "", "base_seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
        fail("base_seed", "expected an integer");
    }
    c.base_seed = seed.get<std::uint64_t>();
    return c;
}

json config_to_json(const ScenarioConfig& c) {
    json model{
        {"state_grid", grid_json(c.state_grid)},
        {"obs_grid", grid_json(c.obs_grid)},
        {"increment_grid", grid_json(c.increment_grid)},
        {"horizon", c.horizon},
        {"controls", c.control_values},
        {"dynamics",
         {{"state_coef", c.dynamics.state_coef},
          {"control_coef", c.dynamics.control_coef}}},
        {"observation",
         {{"slope", c.observation.slope}, {"intercept", c.observation.intercept}}},
        {"running_cost",
         {{"state_weight", c.running_cost.state_weight},
          {"control_weight", c.running_cost.control_weight}}},
        {"dm_terminal", terminal_json(c.dm_terminal)},
        {"gaslighter_terminal", terminal_json(c.gaslighter_terminal)},
        {"risk", c.risk},
        {"process_noise", noise_json(c.process_noise)},
        {"obs_noise", noise_json(c.obs_noise)},
        {"prior", noise_json(c.prior)},
    };
    if (c.gaslit_prior) {
        model["gaslit_prior"] = noise_json(*c.gaslit_prior);
    }

    json menu = json::array();
    for (const auto& e : c.menu) menu.push_back(effort_json(e));

    return json{
        {"name", c.name},
        {"model", model},
        {"gaslighter",
         {{"menu", menu},
          {"trust_level", c.trust_level},
          {"design_cost_scale", c.design_cost_scale},
          {"epsilons", c.epsilons}}},
        {"numerics",
         {{"obs_quadrature_nodes", c.obs_quadrature_nodes},
          {"tie_tolerance", c.tie_tolerance},
          {"alpha_budget", c.alpha_budget},
          {"policy_tree_budget", static_cast<double>(c.policy_tree_budget)},
          {"menu_sequence_budget", c.menu_sequence_budget}}},
        {"trials",
         {{"cost", c.cost_trials},
          {"bound", c.bound_trials},
          {"theorem2", c.theorem2_trials},
          {"ess_sigma", c.ess_sigma_samples},
          {"ess_obs", c.ess_obs_trials},
          {"simulate", c.simulate_trials},
          {"simulate_mode", to_string(c.simulate_mode)},
          {"simulate_effort", c.simulate_effort_id},
          {"objective", c.objective_trials},
          {"w_forward", c.w_check_forward},
          {"w_rollouts", c.w_check_rollouts}}},
        {"base_seed", c.base_seed},
    };
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw config_error(path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const ScenarioConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write config file: " + path);
    out << config_to_json(config).dump(2) << "\n";
}

std::string config_hash(const ScenarioConfig& config) {
    // canonical form: nlohmann objects keep keys sorted, dump(-1) is compact
    const std::string canon = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gaslab
