#include "ordfuse/scenario.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ordfuse/errors.hpp"

namespace ordfuse {

namespace {

void check(bool ok, const std::string& invariant) {
    if (!ok) throw ConfigError("scenario invariant violated: " + invariant);
}

} // namespace

void ScenarioConfig::validate() const {
    check(N >= 1, "N >= 1");
    check(K >= 1, "K >= 1");
    check(M >= K, "M >= K");
    check(tau_s > 0 && tau_N >= 0 && tau > 0, "tau_s > 0, tau_N >= 0, tau > 0");
    // small slack so that e.g. 1 - 0.2 - 8*0.1 is accepted
    check(tau_s - tau_N - K * tau >= -1e-12 * tau_s, "tau_s - tau_N - K*tau >= 0");
    check(pi0 >= 0.0 && pi0 <= 1.0, "0 <= pi0 <= 1");
    check(sigma2 > 0, "sigma2 > 0");
    check(static_cast<int>(sigma2_s.size()) == M, "sigma2_s has M entries");
    for (double s : sigma2_s) check(s > 0 && std::isfinite(s), "all variances > 0");
    if (model == MeasurementModel::ShiftInMeanGaussian) {
        check(static_cast<int>(mu.size()) == M, "mu has M entries");
        for (double m : mu) check(m != 0.0 && std::isfinite(m), "mu_i != 0");
    }
}

double ScenarioConfig::log_prior_odds() const {
    if (pi0 <= 0.0) return -std::numeric_limits<double>::infinity();
    if (pi0 >= 1.0) return std::numeric_limits<double>::infinity();
    return std::log(pi0 / (1.0 - pi0));
}

bool ScenarioConfig::identical_sensors() const {
    for (int i = 1; i < M; ++i) {
        if (sigma2_s[i] != sigma2_s[0]) return false;
        if (model == MeasurementModel::ShiftInMeanGaussian && mu[i] != mu[0]) return false;
    }
    return true;
}

ScenarioConfig with_sensor_count(ScenarioConfig config, int M) {
    const double s = config.sigma2_s.empty() ? 2.0 : config.sigma2_s.front();
    config.M = M;
    config.sigma2_s.assign(M, s);
    if (!config.mu.empty()) config.mu.assign(M, config.mu.front());
    return config;
}

} // namespace ordfuse
