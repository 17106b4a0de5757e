#pragma once

#include <span>

#include "ordfuse/llr_law.hpp"
#include "ordfuse/scenario.hpp"

namespace ordfuse {

struct DecisionOutcome {
    Hypothesis declared = Hypothesis::H0;
    int stage = 0;              // mini-slots used, 1..K (0 for a prior-only decision)
    double sensing_time = 0.0;  // tau_N + stage * tau
    bool prior_only = false;    // no report could be used

    bool operator==(const DecisionOutcome&) const = default;
};

DecisionOutcome make_outcome(Hypothesis declared, int stage, const ScenarioConfig& config);

// Decision from the prior alone: H1 iff 0 >= log(pi0 / (1 - pi0)).
DecisionOutcome prior_only_decision(const ScenarioConfig& config);

struct StageThresholds {
    double low = 0.0, high = 0.0;
};

// Thresholds on S_k = y_1 + ... + y_k at stage k given the stage-k report y_k.
// Extrema of rho are located from scratch on every call.
StageThresholds thresholds_at_stage(int k, double y_k, const ScenarioConfig& config,
                                    const LlrLaw& law);

// Block rule on the K largest-magnitude reports:
// H1 iff sum_m g(y_m) + (M - K) rho(|y_K|) >= log(pi0 / (1 - pi0)), where
// g = log f(y|H1)/f(y|H0) is the identity for LLR reports.
Hypothesis map_block_decision(std::span<const double> ordered_top_k, const ScenarioConfig& config,
                              const LlrLaw& law);

// Rho extrema come from an envelope built on first use of each law and kept
// per thread.
DecisionOutcome run_detector(std::span<const double> ordered, const ScenarioConfig& config,
                             const LlrLaw& law);

// Same stopping rule on a general reported statistic: the metric is
// sum_m g(y_m) and the bounds use the extrema of g over [-|y_k|, |y_k|] and of rho
// over [0, |y_k|] separately.
DecisionOutcome run_detector_generalized(std::span<const double> ordered,
                                         const ScenarioConfig& config, const LlrLaw& law);

// Detector for repeated use on one scenario: rho extrema come from a
// precomputed envelope instead of a fresh search at every stage.
class OrderedSequentialDetector {
public:
    OrderedSequentialDetector(const ScenarioConfig& config, const LlrLaw& law);

    StageThresholds thresholds(int k, double y_k) const;
    DecisionOutcome run(std::span<const double> ordered) const;
    DecisionOutcome run_generalized(std::span<const double> ordered) const;
    Hypothesis block_decision(std::span<const double> ordered_top_k) const;

    const ScenarioConfig& config() const { return config_; }
    const LlrLaw& law() const { return law_; }

private:
    ScenarioConfig config_;
    LlrLaw law_;
    RhoEnvelope envelope_;
};

} // namespace ordfuse
