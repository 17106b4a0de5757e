#pragma once

#include <span>
#include <string>
#include <vector>

#include "ordfuse/bs_detector.hpp"
#include "ordfuse/cost_model.hpp"
#include "ordfuse/order_stats.hpp"

namespace ordfuse {

enum class Action { DeclareH0, DeclareH1, Continue };

struct StagePolicy {
    std::vector<double> value;   // J_k on the grid
    std::vector<Action> action;  // chosen action on the grid
    double pi_low = 0.0;   // DeclareH1 for pi < pi_low
    double pi_high = 1.0;  // DeclareH0 for pi >= pi_high
};

// Per-stage value functions and decision regions over a uniform belief grid,
// where the belief is the posterior probability that the channel is free.
struct PolicyTable {
    int K = 0;
    bool one_threshold = false;
    std::vector<double> grid;
    std::vector<StagePolicy> stages;  // stages[k - 1] holds stage k

    const StagePolicy& stage(int k) const;
    Action action_at(int k, double pi) const;
    double value_at(int k, double pi) const;  // linear interpolation
};

// Belief after the report of rank k + 1, using the unconditional ranked
// densities. pi = 0 and pi = 1 are absorbing.
double posterior_update(double pi, double y, int k, const SensorEnsemble& ensemble);

// Exact update for the report of rank k + 1 given the previous report y_prev
// (ignored for k = 0), using the consecutive-rank conditional densities.
double posterior_update_exact(double pi, double y_prev, double y, int k,
                              const SensorEnsemble& ensemble);

struct SolverOptions {
    int grid_size = 1001;
    // Relative tolerance under which two action costs count as tied. Ties go to
    // Continue, then DeclareH0, then DeclareH1.
    double tie_tolerance = 1e-12;
};

PolicyTable solve_backward(const ScenarioConfig& config, const CostModel& costs,
                           const SensorEnsemble& ensemble, const SolverOptions& options = {});

// Throughput policy with one threshold: before the last stage the only options
// are DeclareH0 and Continue. Needs WeightedThroughput costs with zero overheads.
PolicyTable solve_one_threshold(const ScenarioConfig& config, const CostModel& costs,
                                const SensorEnsemble& ensemble, const SolverOptions& options = {});

DecisionOutcome run_policy(std::span<const double> ordered, const PolicyTable& policy,
                           const SensorEnsemble& ensemble, const ScenarioConfig& config);

// Midpoint concavity of every stage's value function on the grid, within
// 1e-9 times the stage's value range.
bool concavity_check(const PolicyTable& policy);

// Accumulated LLR that moves the prior pi0 to belief pi:
// log(pi0 / (1 - pi0)) + log((1 - pi) / pi).
double belief_to_llr(double pi, double pi0);

void save_policy(const PolicyTable& policy, const std::string& path);
PolicyTable load_policy(const std::string& path);

std::string action_name(Action a);

} // namespace ordfuse
