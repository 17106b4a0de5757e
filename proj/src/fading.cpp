#include "ordfuse/fading.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ordfuse/errors.hpp"
#include "ordfuse/order_stats.hpp"

namespace ordfuse {

namespace {

template <class T>
const T& per_sensor(const std::vector<T>& v, int i) {
    require(!v.empty(), "per-sensor fading list is empty");
    return v.size() == 1 ? v.front() : v.at(i);
}

void check(bool ok, const std::string& invariant) {
    if (!ok) throw ConfigError("fading invariant violated: " + invariant);
}

} // namespace

GainLaw GainLaw::exponential(double mean) {
    GainLaw g;
    g.kind = Kind::Exponential;
    g.mean = mean;
    return g;
}

double GainLaw::tail_prob(double x) const {
    if (kind == Kind::Exponential) return x <= 0 ? 1.0 : std::exp(-x / mean);
    require(static_cast<bool>(tail), "custom gain law has no tail function");
    return tail(x);
}

void FadingConfig::validate(double tau) const {
    check(W > 0, "W > 0");
    check(bits >= 0, "b >= 0");
    check(time_unit > 0, "time_unit > 0");
    check(tau_b > 0 && tau_b < tau * time_unit, "0 < tau_b < tau");
    check(T_c >= 1, "T_c >= 1");
    check(!P_over_sigma.empty() && !Gamma.empty() && !gain.empty(), "per-sensor lists non-empty");
    for (double p : P_over_sigma) check(p > 0, "P_i / sigma_f^2 > 0");
    for (double g : Gamma) check(g > 1, "Gamma_i > 1");
    for (const auto& g : gain) check(g.kind != GainLaw::Kind::Exponential || g.mean > 0, "gain means > 0");
}

double gain_threshold(int i, const FadingConfig& fading) {
    const double snr = per_sensor(fading.P_over_sigma, i);
    const double gap = per_sensor(fading.Gamma, i);
    return gap / snr * std::expm1(std::log(2.0) * fading.bits / (fading.W * fading.tau_b));
}

double participation_prob(int i, const FadingConfig& fading) {
    return per_sensor(fading.gain, i).tail_prob(gain_threshold(i, fading));
}

double participation_pmf(int m_bar, const FadingConfig& fading, int M) {
    require(M >= 0 && m_bar >= 0 && m_bar <= M, "participation_pmf needs 0 <= m_bar <= M");
    std::vector<double> in(M), out(M);
    for (int i = 0; i < M; ++i) {
        in[i] = participation_prob(i, fading);
        out[i] = 1.0 - in[i];
    }
    return subset_coefficients(in, out, m_bar)[m_bar];
}

std::vector<int> sample_participants(const FadingConfig& fading, int M, RandomStream& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> out;
    for (int i = 0; i < M; ++i) {
        if (unit(rng) < participation_prob(i, fading)) out.push_back(i);
    }
    return out;
}

ScenarioConfig effective_config(const ScenarioConfig& config, const std::vector<int>& participants) {
    ScenarioConfig out = config;
    out.M = static_cast<int>(participants.size());
    out.K = std::min(config.K, out.M);
    out.sigma2_s.clear();
    out.mu.clear();
    for (int i : participants) {
        require(i >= 0 && i < config.M, "participant index out of range");
        out.sigma2_s.push_back(config.sigma2_s.at(i));
        if (config.model == MeasurementModel::ShiftInMeanGaussian) out.mu.push_back(config.mu.at(i));
    }
    return out;
}

} // namespace ordfuse
