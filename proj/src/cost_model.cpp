#include "ordfuse/cost_model.hpp"

#include <cmath>
#include <string>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

void check(bool ok, const std::string& invariant) {
    if (!ok) throw ConfigError("cost invariant violated: " + invariant);
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

void CostModel::validate() const {
    check(probability(omega), "0 <= omega <= 1");
    check(probability(eta_p) && probability(eta_s) && probability(delta_p) && probability(delta_s),
          "success probabilities in [0, 1]");
    for (double v : {R_p, R_s, e_pt, e_st, P_col, L_f, L_b, c})
        check(std::isfinite(v), "all costs finite");
    check(c >= 0, "c >= 0");
}

bool CostModel::zero_overheads() const {
    return c == 0 && e_pt == 0 && e_st == 0 && P_col == 0 && L_f == 0 && L_b == 0;
}

double decision_cost(int k, Hypothesis decided, Hypothesis truth, const CostModel& costs,
                     const ScenarioConfig& config) {
    require(k >= 0 && k <= config.K, "stage out of range");
    if (costs.mode == CostMode::ErrorMin) return decided == truth ? 0.0 : 1.0;
    const double f = config.remaining_fraction(k);
    const double w = costs.omega;
    if (decided == Hypothesis::H0) {
        if (truth == Hypothesis::H0) return -(1 - w) * costs.R_s * costs.eta_s * f + costs.e_st * f;
        return -w * costs.R_p * costs.delta_p - (1 - w) * costs.R_s * costs.delta_s * f + costs.e_pt +
               costs.e_st * f + costs.P_col;
    }
    if (truth == Hypothesis::H0) return costs.L_f;
    return -w * costs.R_p * costs.eta_p + costs.e_pt + costs.L_b;
}

} // namespace ordfuse
