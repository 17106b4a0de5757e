#pragma once

#include "ordfuse/scenario.hpp"

namespace ordfuse {

enum class CostMode { ErrorMin, WeightedThroughput };

struct CostModel {
    CostMode mode = CostMode::ErrorMin;
    double omega = 0.5;  // weight of the primary throughput
    double R_p = 1.0, R_s = 1.0;
    double eta_p = 1.0, eta_s = 1.0;      // success without interference
    double delta_p = 0.0, delta_s = 0.0;  // success despite a collision
    double e_pt = 0.0, e_st = 0.0;        // transmission costs, rate units
    double P_col = 0.0;                   // collision penalty
    double L_f = 0.0, L_b = 0.0;          // lost-opportunity costs
    double c = 1e-4;                      // cost of one more report

    // Throws ConfigError naming the violated invariant.
    void validate() const;
    // c = 0 and no transmission, collision or lost-opportunity costs.
    bool zero_overheads() const;
};

// Cost of declaring `decided` at stage k when `truth` holds.
double decision_cost(int k, Hypothesis decided, Hypothesis truth, const CostModel& costs,
                     const ScenarioConfig& config);

} // namespace ordfuse
