#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gaslab/grid.hpp"
#include "gaslab/model.hpp"
#include "gaslab/policy.hpp"

namespace gaslab {

/// One supporting linear functional of the value function, tagged with the
/// control index that generated it (-1 for the terminal stage).
struct AlphaVector {
    std::vector<double> values;
    int action = -1;
};

struct StagePruneStats {
    int generated = 0;
    int kept = 0;
};

struct DpOptions {
    int obs_quadrature_nodes = 5;
    int alpha_budget = 20000;
    bool prune = true;
};

/// Piecewise-linear representation of the DM's value function
///   Z(sigma, k) = min_alpha <sigma, alpha>
/// built by backward induction. The observation expectation is discretized
/// by quadrature at fixed nodes of the observation grid weighted by phi, so
/// the finite problem is solved exactly and a brute-force policy-tree
/// enumeration can certify it.
struct AlphaVectorSet {
    GridPtr state_grid;
    int horizon = 0;
    std::vector<double> obs_nodes;
    std::vector<double> obs_weights;
    std::vector<std::vector<AlphaVector>> stages;  // index 0..K; K is terminal
    std::vector<StagePruneStats> prune_stats;      // one entry per stage 0..K-1
};

/// Solves the DM's problem; with an effort the gaslit operator replaces the
/// nominal one stage by stage. Throws budget_error("alpha budget exceeded")
/// when a stage set would outgrow options.alpha_budget.
AlphaVectorSet backward_induction(const SystemModel& model,
                                  const GaslightEffort* effort,
                                  const DpOptions& options = {});

/// min over stage-k vectors of the quadrature pairing <sigma, alpha>.
double alpha_value(const AlphaVectorSet& alphas, const InformationState& sigma,
                   int k);

/// Control index attaining the minimum at stage k; ties resolve to the
/// lowest control index.
int alpha_action_index(const AlphaVectorSet& alphas,
                       const InformationState& sigma, int k);

/// Feedback policy reading controls off the alpha set.
ControlPolicy make_alpha_policy(std::shared_ptr<const AlphaVectorSet> alphas,
                                const SystemModel& model);

/// All control indices whose one-step lookahead value lies within tol_tie of
/// the stage minimum, using the continuation encoded in `alphas`.
std::vector<int> response_set(const SystemModel& model,
                              const GaslightEffort* effort,
                              const AlphaVectorSet& alphas,
                              const InformationState& sigma, int k,
                              double tol_tie);

/// Open-loop evaluation of a fixed control sequence through the adjoint
/// recursion: one vector per stage, no minimization.
std::vector<std::vector<double>> open_loop_vectors(
    const SystemModel& model, const GaslightEffort* effort,
    const std::vector<double>& controls, const DpOptions& options = {});

/// Exact minimum over all observation-feedback policy trees of the
/// quadrature-discretized expected terminal functional, started from the
/// model prior (the gaslit prior when an effort is given). Independent of
/// the alpha machinery; the guard rejects instances beyond `tree_budget`
/// leaves.
double enumerate_policies_oracle(const SystemModel& model,
                                 const GaslightEffort* effort,
                                 int obs_quadrature_nodes,
                                 long tree_budget = 1000000);

}  // namespace gaslab
