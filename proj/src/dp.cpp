#include "gaslab/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "gaslab/errors.hpp"
#include "gaslab/filter.hpp"
#include "gaslab/numeric.hpp"

namespace gaslab {

namespace {

// E† quadrature: evenly spaced nodes on the observation interval with
// trapezoid weights times phi. With one node the midpoint rule stands in.
void obs_quadrature(const SystemModel& model, int n_nodes,
                    std::vector<double>& nodes, std::vector<double>& weights) {
    if (n_nodes < 1) {
        throw std::invalid_argument("obs quadrature needs at least one node");
    }
    const Grid& og = *model.obs_grid;
    nodes.clear();
    weights.clear();
    if (n_nodes == 1) {
        const double mid = 0.5 * (og.lower() + og.upper());
        nodes.push_back(mid);
        weights.push_back(og.length() * model.phi().interp_clamped(mid));
        return;
    }
    const double step = og.length() / static_cast<double>(n_nodes - 1);
    for (int j = 0; j < n_nodes; ++j) {
        const double y = j == n_nodes - 1 ? og.upper() : og.lower() + j * step;
        const double w = (j == 0 || j == n_nodes - 1) ? 0.5 * step : step;
        nodes.push_back(y);
        weights.push_back(w * model.phi().interp_clamped(y));
    }
}

// (adjoint image)(xi) = e^{mu L(xi,u)} phi(y-h(xi))/divisor *
//                       sum_z w_z psi(z - b(xi,u)) alpha(z)
std::vector<double> adjoint_apply(const SystemModel& model,
                                  const std::vector<double>& alpha, double u,
                                  double y, double divisor) {
    const Grid& sg = *model.state_grid;
    const GridDensity& psi = model.psi();
    const GridDensity& phi = model.phi();
    const Grid& pg = *psi.grid();
    const int n = sg.size();
    const double inv_spacing = 1.0 / sg.spacing();

    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const double xi = sg.node(j);
        const double center = model.dynamics(xi, u);
        int lo = static_cast<int>(
            std::floor((center + pg.lower() - sg.lower()) * inv_spacing)) - 1;
        int hi = static_cast<int>(
            std::ceil((center + pg.upper() - sg.lower()) * inv_spacing)) + 1;
        if (lo < 0) lo = 0;
        if (hi > n - 1) hi = n - 1;
        double acc = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double k = psi.interp_zero_outside(sg.node(i) - center);
            if (k != 0.0) acc += sg.weight(i) * k * alpha[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(j)] =
            model.exp_running_cost(xi, u) *
            phi.interp_clamped(y - model.observation(xi)) / divisor * acc;
    }
    return out;
}

double vector_scale(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Pointwise domination with a relative tolerance small enough that pruning
// shifts values by well under 1e-12. Earlier vectors win ties, which keeps
// the lowest generating control index.
class PrunedSet {
  public:
    explicit PrunedSet(bool enabled) : enabled_(enabled) {}

    void insert(AlphaVector v) {
        if (!enabled_) {
            kept_.push_back(std::move(v));
            return;
        }
        const double tol = 1e-15 * std::max(1.0, vector_scale(v.values));
        for (const auto& k : kept_) {
            if (dominates(k.values, v.values, tol)) return;
        }
        std::erase_if(kept_, [&](const AlphaVector& k) {
            return dominates(v.values, k.values, tol) &&
                   !dominates(k.values, v.values, tol);
        });
        kept_.push_back(std::move(v));
    }

    std::vector<AlphaVector> take() { return std::move(kept_); }
    std::size_t size() const { return kept_.size(); }

  private:
    static bool dominates(const std::vector<double>& a,
                          const std::vector<double>& b, double tol) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] > b[i] + tol) return false;
        }
        return true;
    }

    bool enabled_;
    std::vector<AlphaVector> kept_;
};

std::vector<double> terminal_alpha(const SystemModel& model) {
    const Grid& sg = *model.state_grid;
    std::vector<double> v(static_cast<std::size_t>(sg.size()));
    for (int i = 0; i < sg.size(); ++i) {
        v[static_cast<std::size_t>(i)] =
            std::exp(model.risk * model.dm_terminal(sg.node(i)));
    }
    return v;
}

double pairing(const Grid& g, const InformationState& sigma,
               const std::vector<double>& alpha) {
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        acc += g.weight(i) * sigma.value(i) * alpha[static_cast<std::size_t>(i)];
    }
    return acc;
}

}  // namespace

AlphaVectorSet backward_induction(const SystemModel& model,
                                  const GaslightEffort* effort,
                                  const DpOptions& options) {
    if (effort && effort->horizon() != model.horizon) {
        throw std::invalid_argument("backward_induction: effort length mismatch");
    }
    AlphaVectorSet set;
    set.state_grid = model.state_grid;
    set.horizon = model.horizon;
    obs_quadrature(model, options.obs_quadrature_nodes, set.obs_nodes,
                   set.obs_weights);
    set.stages.resize(static_cast<std::size_t>(model.horizon) + 1);
    set.prune_stats.resize(static_cast<std::size_t>(model.horizon));

    set.stages[static_cast<std::size_t>(model.horizon)].push_back(
        {terminal_alpha(model), -1});

    const std::size_t n_y = set.obs_nodes.size();
    for (int k = model.horizon - 1; k >= 0; --k) {
        const auto& next = set.stages[static_cast<std::size_t>(k) + 1];
        const GridDensity& divisor_density =
            effort ? effort->stage(k + 1) : model.phi();
        const auto& control_set = model.control_set(k);

        PrunedSet stage_set(options.prune);
        long generated = 0;

        for (std::size_t ui = 0; ui < control_set.size(); ++ui) {
            const double u = control_set[ui];
            // weighted adjoint image of every next-stage vector at every node
            std::vector<std::vector<std::vector<double>>> images(n_y);
            for (std::size_t j = 0; j < n_y; ++j) {
                const double y = set.obs_nodes[j];
                const double div = divisor_density.interp_clamped(y);
                if (!(div > 0.0)) {
                    throw std::domain_error(effort ? "degenerate effort density"
                                                   : "degenerate reference density");
                }
                images[j].reserve(next.size());
                for (const auto& alpha : next) {
                    auto img = adjoint_apply(model, alpha.values, u, y, div);
                    for (double& x : img) x *= set.obs_weights[j];
                    images[j].push_back(std::move(img));
                }
            }
            // incremental cross-sum over observation nodes with pruning of
            // partial sums (pointwise domination stays sound under addition)
            std::vector<std::vector<double>> partial{
                std::vector<double>(static_cast<std::size_t>(model.state_grid->size()), 0.0)};
            for (std::size_t j = 0; j < n_y; ++j) {
                if (static_cast<long>(partial.size() * images[j].size()) >
                    options.alpha_budget) {
                    throw budget_error("alpha budget exceeded");
                }
                PrunedSet combined(options.prune);
                for (const auto& p : partial) {
                    for (const auto& img : images[j]) {
                        std::vector<double> sum(p.size());
                        for (std::size_t i = 0; i < p.size(); ++i) {
                            sum[i] = p[i] + img[i];
                        }
                        ++generated;
                        combined.insert({std::move(sum), static_cast<int>(ui)});
                    }
                }
                auto taken = combined.take();
                partial.clear();
                partial.reserve(taken.size());
                for (auto& t : taken) partial.push_back(std::move(t.values));
            }
            for (auto& p : partial) {
                stage_set.insert({std::move(p), static_cast<int>(ui)});
                if (static_cast<long>(stage_set.size()) > options.alpha_budget) {
                    throw budget_error("alpha budget exceeded");
                }
            }
        }
        set.prune_stats[static_cast<std::size_t>(k)] = {
            static_cast<int>(std::min<long>(generated, INT32_MAX)),
            static_cast<int>(stage_set.size())};
        set.stages[static_cast<std::size_t>(k)] = stage_set.take();
    }
    return set;
}

double alpha_value(const AlphaVectorSet& alphas, const InformationState& sigma,
                   int k) {
    const auto& stage = alphas.stages[static_cast<std::size_t>(k)];
    if (stage.empty()) throw std::logic_error("empty alpha stage");
    const Grid& g = *alphas.state_grid;
    double best = pairing(g, sigma, stage[0].values);
    for (std::size_t i = 1; i < stage.size(); ++i) {
        best = std::min(best, pairing(g, sigma, stage[i].values));
    }
    return best;
}

int alpha_action_index(const AlphaVectorSet& alphas,
                       const InformationState& sigma, int k) {
    const auto& stage = alphas.stages[static_cast<std::size_t>(k)];
    if (stage.empty()) throw std::logic_error("empty alpha stage");
    const Grid& g = *alphas.state_grid;
    double best = pairing(g, sigma, stage[0].values);
    int best_action = stage[0].action;
    for (std::size_t i = 1; i < stage.size(); ++i) {
        const double v = pairing(g, sigma, stage[i].values);
        if (v < best || (v == best && stage[i].action < best_action)) {
            best = v;
            best_action = stage[i].action;
        }
    }
    return best_action;
}

ControlPolicy make_alpha_policy(std::shared_ptr<const AlphaVectorSet> alphas,
                                const SystemModel& model) {
    return ControlPolicy::feedback(
        [alphas, sets = model.controls](const InformationState* sigma, int k) {
            if (sigma == nullptr) {
                throw std::invalid_argument("alpha policy needs an information state");
            }
            const int idx = alpha_action_index(*alphas, *sigma, k);
            return sets[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx)];
        });
}

std::vector<int> response_set(const SystemModel& model,
                              const GaslightEffort* effort,
                              const AlphaVectorSet& alphas,
                              const InformationState& sigma, int k,
                              double tol_tie) {
    const auto& control_set = model.control_set(k);
    std::vector<double> lookahead(control_set.size());
    for (std::size_t ui = 0; ui < control_set.size(); ++ui) {
        double acc = 0.0;
        for (std::size_t j = 0; j < alphas.obs_nodes.size(); ++j) {
            const double y = alphas.obs_nodes[j];
            const InformationState next =
                effort ? gaslit_update(model, sigma, control_set[ui], y,
                                       effort->stage(k + 1))
                       : info_state_update(model, sigma, control_set[ui], y);
            acc += alphas.obs_weights[j] * alpha_value(alphas, next, k + 1);
        }
        lookahead[ui] = acc;
    }
    const double best = *std::min_element(lookahead.begin(), lookahead.end());
    std::vector<int> out;
    for (std::size_t ui = 0; ui < control_set.size(); ++ui) {
        if (lookahead[ui] <= best + tol_tie) out.push_back(static_cast<int>(ui));
    }
    return out;
}

std::vector<std::vector<double>> open_loop_vectors(
    const SystemModel& model, const GaslightEffort* effort,
    const std::vector<double>& controls, const DpOptions& options) {
    if (static_cast<int>(controls.size()) != model.horizon) {
        throw std::invalid_argument("open_loop_vectors: need K controls");
    }
    std::vector<double> nodes;
    std::vector<double> weights;
    obs_quadrature(model, options.obs_quadrature_nodes, nodes, weights);

    std::vector<std::vector<double>> vectors(
        static_cast<std::size_t>(model.horizon) + 1);
    vectors[static_cast<std::size_t>(model.horizon)] = terminal_alpha(model);
    for (int k = model.horizon - 1; k >= 0; --k) {
        const GridDensity& divisor_density =
            effort ? effort->stage(k + 1) : model.phi();
        std::vector<double> acc(static_cast<std::size_t>(model.state_grid->size()), 0.0);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double div = divisor_density.interp_clamped(nodes[j]);
            if (!(div > 0.0)) {
                throw std::domain_error(effort ? "degenerate effort density"
                                               : "degenerate reference density");
            }
            auto img = adjoint_apply(model,
                                     vectors[static_cast<std::size_t>(k) + 1],
                                     controls[static_cast<std::size_t>(k)],
                                     nodes[j], div);
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += weights[j] * img[i];
            }
        }
        vectors[static_cast<std::size_t>(k)] = std::move(acc);
    }
    return vectors;
}

namespace {

// Fresh implementation of the one-step operator for the oracle: plain loops,
// no range shortcuts, its own interpolation.
std::vector<double> oracle_update(const SystemModel& m,
                                  const std::vector<double>& sigma, double u,
                                  double y, double divisor) {
    const Grid& sg = *m.state_grid;
    const GridDensity& psi = m.psi();
    const GridDensity& phi = m.phi();
    std::vector<double> out(sigma.size(), 0.0);
    for (int zi = 0; zi < sg.size(); ++zi) {
        double acc = 0.0;
        for (int xi = 0; xi < sg.size(); ++xi) {
            const double x = sg.node(xi);
            acc += sg.weight(xi) *
                   psi.interp_zero_outside(sg.node(zi) - m.dynamics(x, u)) *
                   std::exp(m.risk * m.running_cost(x, u)) *
                   phi.interp_clamped(y - m.observation(x)) *
                   sigma[static_cast<std::size_t>(xi)] / divisor;
        }
        out[static_cast<std::size_t>(zi)] = acc;
    }
    return out;
}

struct OracleContext {
    const SystemModel* model;
    const GaslightEffort* effort;
    std::vector<double> nodes;
    std::vector<double> weights;
};

double oracle_best(const OracleContext& ctx, const std::vector<double>& sigma,
                   int k) {
    const SystemModel& m = *ctx.model;
    if (k == m.horizon) {
        double acc = 0.0;
        for (int i = 0; i < m.state_grid->size(); ++i) {
            acc += m.state_grid->weight(i) * sigma[static_cast<std::size_t>(i)] *
                   std::exp(m.risk * m.dm_terminal(m.state_grid->node(i)));
        }
        return acc;
    }
    const GridDensity& divisor_density =
        ctx.effort ? ctx.effort->stage(k + 1) : m.phi();
    double best = std::numeric_limits<double>::infinity();
    for (double u : m.control_set(k)) {
        double acc = 0.0;
        for (std::size_t j = 0; j < ctx.nodes.size(); ++j) {
            const double div = divisor_density.interp_clamped(ctx.nodes[j]);
            acc += ctx.weights[j] *
                   oracle_best(ctx, oracle_update(m, sigma, u, ctx.nodes[j], div),
                               k + 1);
        }
        best = std::min(best, acc);
    }
    return best;
}

}  // namespace

double enumerate_policies_oracle(const SystemModel& model,
                                 const GaslightEffort* effort,
                                 int obs_quadrature_nodes, long tree_budget) {
    if (effort && effort->horizon() != model.horizon) {
        throw std::invalid_argument("enumerate_policies_oracle: effort length mismatch");
    }
    double leaves = 1.0;
    for (int k = 0; k < model.horizon; ++k) {
        leaves *= static_cast<double>(model.control_set(k).size()) *
                  static_cast<double>(obs_quadrature_nodes);
    }
    if (leaves > static_cast<double>(tree_budget)) {
        throw budget_error("policy tree budget exceeded");
    }
    OracleContext ctx;
    ctx.model = &model;
    ctx.effort = effort;
    obs_quadrature(model, obs_quadrature_nodes, ctx.nodes, ctx.weights);
    const GridDensity& start = effort ? model.rho_gaslit() : model.rho();
    std::vector<double> sigma(start.values().begin(), start.values().end());
    return oracle_best(ctx, sigma, 0);
}

}  // namespace gaslab
