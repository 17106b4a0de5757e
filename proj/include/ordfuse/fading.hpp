#pragma once

#include <functional>
#include <vector>

#include "ordfuse/rng.hpp"
#include "ordfuse/scenario.hpp"

namespace ordfuse {

// Distribution of a reporting-channel power gain.
struct GainLaw {
    enum class Kind { Exponential, Custom };
    Kind kind = Kind::Exponential;
    double mean = 1.0;                      // Exponential
    std::function<double(double)> tail;     // Custom: Pr(g > x)

    static GainLaw exponential(double mean);
    double tail_prob(double x) const;
};

struct FadingConfig {
    double W = 50e3;        // bandwidth, Hz
    double bits = 20;       // payload per report
    double tau_b = 0.5e-3;  // transmit budget per report, seconds
    double time_unit = 0.01;  // seconds per scenario time unit
    int T_c = 1;            // coherence period, slots
    // Per-sensor values; a single entry applies to every sensor.
    std::vector<double> P_over_sigma = {5.0};
    std::vector<double> Gamma = {2.0};
    std::vector<GainLaw> gain = {GainLaw::exponential(1.0)};

    // Throws ConfigError naming the violated invariant; tau is the mini-slot
    // duration in scenario time units.
    void validate(double tau) const;
};

// Smallest gain at which sensor i's report fits its budget:
// (Gamma_i / (P_i / sigma_f^2)) * (2^(b / (W tau_b)) - 1).
double gain_threshold(int i, const FadingConfig& fading);

// Pr(g_i > gain_threshold), the chance that sensor i can report.
double participation_prob(int i, const FadingConfig& fading);

// Pr(exactly m_bar of the M sensors can report).
double participation_pmf(int m_bar, const FadingConfig& fading, int M);

// Independent inclusion of each sensor with its participation probability.
std::vector<int> sample_participants(const FadingConfig& fading, int M, RandomStream& rng);

// Scenario restricted to the participating sensors, with K clipped to their
// number. An empty set leaves M = K = 0; callers decide from the prior then.
ScenarioConfig effective_config(const ScenarioConfig& config, const std::vector<int>& participants);

} // namespace ordfuse
