#pragma once

#include <span>
#include <vector>

#include "ordfuse/rng.hpp"
#include "ordfuse/scenario.hpp"

namespace ordfuse {

struct RankedLlr {
    int sensor;
    double value;
    bool operator==(const RankedLlr&) const = default;
};

struct SlotRealization {
    Hypothesis truth = Hypothesis::H0;
    std::vector<double> llr;         // indexed by sensor
    std::vector<RankedLlr> ordered;  // descending |llr|, ties by sensor index

    std::vector<double> ordered_values() const;
};

double llr_from_samples(std::span<const double> samples, int sensor, const ScenarioConfig& config);

std::vector<RankedLlr> rank_by_magnitude(std::span<const double> llr);

// Draws slots for one scenario, reusing its buffers; LLRs for all sensors are
// formed in one batched kernel call.
class SlotSampler {
public:
    explicit SlotSampler(const ScenarioConfig& config);

    void draw(RandomStream& rng, SlotRealization& out);
    SlotRealization draw(RandomStream& rng);

    // Samples of the last draw, stored as samples[n * M + i].
    const std::vector<double>& samples() const { return samples_; }

private:
    ScenarioConfig config_;
    std::vector<double> sd0_, sd1_, mean1_;
    std::vector<double> qa_, qb_, qc_;
    std::vector<double> samples_;
};

SlotRealization draw_slot(const ScenarioConfig& config, RandomStream& rng);

} // namespace ordfuse
