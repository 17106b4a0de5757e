#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ordfuse/bs_detector.hpp"
#include "ordfuse/cost_model.hpp"
#include "ordfuse/dp_policy.hpp"
#include "ordfuse/fading.hpp"
#include "ordfuse/sensing_model.hpp"

namespace ordfuse {

enum class DetectorKind {
    BS,             // ordered sequential detector with rho-corrected thresholds
    BSGeneralized,  // same on sum of log f(y|H1)/f(y|H0)
    DP,             // backward-induction policy
    OneThreshold,   // throughput policy without early H1
    BlockMAP,       // block rule on the top K reports
    Genie,          // declares the truth after one report
    PriorOnly       // ignores all reports
};

std::string detector_name(DetectorKind kind);

struct DetectorChoice {
    DetectorKind kind = DetectorKind::BS;
    CostModel costs;        // DP and OneThreshold
    SolverOptions solver;   // DP and OneThreshold
};

// Tallies of one Monte Carlo run. Everything is an integer count of slots per
// (stage, declared, truth), so merging partial runs is exact and the result does
// not depend on how the slots were split.
class SimMetrics {
public:
    SimMetrics() = default;
    SimMetrics(const ScenarioConfig& config, const CostModel& costs);

    void record(const DecisionOutcome& outcome, Hypothesis truth);
    void merge(const SimMetrics& other);

    long trials() const { return trials_; }
    long count(int stage, Hypothesis declared, Hypothesis truth) const;
    long confusion(Hypothesis declared, Hypothesis truth) const;
    std::vector<long> stage_histogram() const;  // index = stage, 0..K
    long prior_only() const { return prior_only_; }

    double p_error() const;
    double p_error_stderr() const;
    double avg_stage() const;
    double avg_stage_stderr() const;
    double avg_sensing_time() const;
    // (1/Q) sum_q I_S R_s (1 - (tau_N + k_q tau) / tau_s), with I_S replaced by its
    // expectation eta_s (channel free) or delta_s (collision) when the secondary transmits.
    double norm_throughput_secondary() const;
    double norm_throughput_secondary_stderr() const;
    // (1/Q) sum_q I_P R_p, with I_P = eta_p (secondary silent) or delta_p (collision)
    // when the primary transmits.
    double norm_throughput_primary() const;
    double norm_throughput_primary_stderr() const;

private:
    std::size_t index(int stage, Hypothesis declared, Hypothesis truth) const;
    double secondary_value(int stage, Hypothesis declared, Hypothesis truth) const;
    double primary_value(Hypothesis declared, Hypothesis truth) const;
    template <class F>
    std::pair<double, double> moments(F value) const;

    int K_ = 0;
    double tau_s_ = 1, tau_N_ = 0, tau_ = 0;
    double R_s_ = 1, R_p_ = 1, eta_s_ = 1, eta_p_ = 1, delta_s_ = 0, delta_p_ = 0;
    long trials_ = 0, prior_only_ = 0;
    std::vector<long> counts_;
};

// A detector prepared for one scenario (policies solved, rho envelope built).
class SlotDetector {
public:
    SlotDetector(const ScenarioConfig& config, const DetectorChoice& choice);

    DecisionOutcome decide(const SlotRealization& slot) const;
    const PolicyTable* policy() const { return policy_ ? policy_.get() : nullptr; }

private:
    ScenarioConfig config_;
    DetectorChoice choice_;
    std::optional<SensorEnsemble> ensemble_;
    std::optional<OrderedSequentialDetector> bs_;
    std::shared_ptr<const PolicyTable> policy_;
};

struct MonteCarloOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    std::optional<FadingConfig> fading;
};

SimMetrics run_monte_carlo(const ScenarioConfig& config, const DetectorChoice& detector, long trials,
                           std::uint64_t seed, const MonteCarloOptions& options = {});

struct AgreementReport {
    long trials = 0;
    long agreements = 0;
    double fraction() const { return trials ? static_cast<double>(agreements) / trials : 1.0; }
    std::optional<std::string> first_disagreement;
};

// Per-slot comparison of the sequential detector (generalized form when
// `generalized` is set) with the block rule on identical realizations.
AgreementReport compare_with_block_oracle(const ScenarioConfig& config, long trials,
                                          std::uint64_t seed, bool generalized = false);

enum class SweepAxis { M, K, c, sigma2_s, omega };

struct SweepRow {
    double value;
    ScenarioConfig config;
    SimMetrics metrics;
};

// One run per value, all with the same seed (common random numbers). Sweeping M
// clips K to M.
std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& values,
                            const ScenarioConfig& base, const DetectorChoice& detector, long trials,
                            std::uint64_t seed, const MonteCarloOptions& options = {});

} // namespace ordfuse
