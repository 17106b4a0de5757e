#pragma once

#include <cstdint>
#include <vector>

namespace ordfuse {

enum class Hypothesis { H0, H1 };

inline int index_of(Hypothesis h) { return h == Hypothesis::H0 ? 0 : 1; }

enum class MeasurementModel {
    EnergyChiSquare,     // zero-mean Gaussian samples, variance changes under H1
    ShiftInMeanGaussian  // common variance, mean 0 under H0 and mu_i under H1
};

// Slot timing, priors and per-sensor signal parameters of one sensing scenario.
// Defaults are the reference simulation setting.
struct ScenarioConfig {
    int M = 10;           // sensors
    int N = 3;            // samples per sensor per slot
    int K = 8;            // max reporting mini-slots
    double tau_s = 1.0;   // slot duration
    double tau_N = 0.2;   // sampling duration
    double tau = 0.1;     // mini-slot duration
    double pi0 = 0.5;     // prior probability the channel is free
    double sigma2 = 1.0;  // noise variance
    std::vector<double> sigma2_s = std::vector<double>(10, 2.0);
    MeasurementModel model = MeasurementModel::EnergyChiSquare;
    std::vector<double> mu;  // H1 means, ShiftInMeanGaussian only
    std::uint64_t rng_seed = 1;

    // Throws ConfigError naming the violated invariant.
    void validate() const;

    double snr(int sensor) const { return sigma2_s.at(sensor) / sigma2; }
    double log_prior_odds() const;  // log(pi0 / (1 - pi0))
    double sensing_time(int stage) const { return tau_N + stage * tau; }
    double remaining_fraction(int stage) const { return (tau_s - tau_N - stage * tau) / tau_s; }
    bool identical_sensors() const;
};

// Same scenario with M sensors of identical received power (keeps the per-sensor
// lists in step with M).
ScenarioConfig with_sensor_count(ScenarioConfig config, int M);

} // namespace ordfuse
