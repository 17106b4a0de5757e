#include "ordfuse/sensing_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordfuse/errors.hpp"
#include "ordfuse/kernels.hpp"

namespace ordfuse {

std::vector<double> SlotRealization::ordered_values() const {
    std::vector<double> v;
    v.reserve(ordered.size());
    for (const auto& r : ordered) v.push_back(r.value);
    return v;
}

double llr_from_samples(std::span<const double> samples, int sensor, const ScenarioConfig& config) {
    require(static_cast<int>(samples.size()) == config.N,
            "llr_from_samples expects exactly N samples");
    require(sensor >= 0 && sensor < config.M, "sensor index out of range");
    const double s2 = config.sigma2;
    if (config.model == MeasurementModel::EnergyChiSquare) {
        const double g = config.snr(sensor);
        double energy = 0.0;
        for (double x : samples) energy += x * x;
        return g / (2.0 * s2 * (g + 1.0)) * energy - 0.5 * config.N * std::log1p(g);
    }
    const double mu0 = 0.0, mu1 = config.mu.at(sensor);
    double sum = 0.0;
    for (double x : samples) sum += (x - mu0) * (x - mu0) - (x - mu1) * (x - mu1);
    return sum / (2.0 * s2);
}

std::vector<RankedLlr> rank_by_magnitude(std::span<const double> llr) {
    require(!llr.empty(), "rank_by_magnitude needs a non-empty list");
    std::vector<RankedLlr> out;
    out.reserve(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i) out.push_back({static_cast<int>(i), llr[i]});
    std::stable_sort(out.begin(), out.end(), [](const RankedLlr& a, const RankedLlr& b) {
        return std::fabs(a.value) > std::fabs(b.value);
    });
    return out;
}

SlotSampler::SlotSampler(const ScenarioConfig& config) : config_(config) {
    const int M = config.M;
    const double s2 = config.sigma2;
    sd0_.assign(M, std::sqrt(s2));
    sd1_.resize(M);
    mean1_.assign(M, 0.0);
    qa_.assign(M, 0.0);
    qb_.assign(M, 0.0);
    qc_.assign(M, 0.0);
    for (int i = 0; i < M; ++i) {
        if (config.model == MeasurementModel::EnergyChiSquare) {
            const double g = config.snr(i);
            sd1_[i] = std::sqrt(config.sigma2_s[i] + s2);
            qa_[i] = g / (2.0 * s2 * (g + 1.0));
            qc_[i] = -0.5 * config.N * std::log1p(g);
        } else {
            const double mu = config.mu.at(i);
            sd1_[i] = std::sqrt(s2);
            mean1_[i] = mu;
            qb_[i] = mu / s2;
            qc_[i] = -config.N * mu * mu / (2.0 * s2);
        }
    }
    samples_.resize(static_cast<std::size_t>(config.N) * M);
}

void SlotSampler::draw(RandomStream& rng, SlotRealization& out) {
    const int M = config_.M, N = config_.N;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.truth = unit(rng) < config_.pi0 ? Hypothesis::H0 : Hypothesis::H1;
    const bool busy = out.truth == Hypothesis::H1;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < M; ++i) {
        const double sd = busy ? sd1_[i] : sd0_[i];
        const double mean = busy ? mean1_[i] : 0.0;
        for (int n = 0; n < N; ++n) samples_[static_cast<std::size_t>(n) * M + i] = mean + sd * normal(rng);
    }
    out.llr.resize(M);
    kernels::quadratic_llr(samples_.data(), N, M, qa_.data(), qb_.data(), qc_.data(), out.llr.data());
    out.ordered = rank_by_magnitude(out.llr);
}

SlotRealization SlotSampler::draw(RandomStream& rng) {
    SlotRealization out;
    draw(rng, out);
    return out;
}

SlotRealization draw_slot(const ScenarioConfig& config, RandomStream& rng) {
    SlotSampler sampler(config);
    return sampler.draw(rng);
}

} // namespace ordfuse
