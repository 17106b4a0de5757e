#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "ordfuse/cost_model.hpp"
#include "ordfuse/fading.hpp"
#include "ordfuse/scenario.hpp"
#include "ordfuse/simulation.hpp"

namespace ordfuse {

struct ExperimentSpec {
    std::string preset = "custom";
    long trials = 10000;
    std::uint64_t seed = 1;
    std::string output = ".";
    DetectorKind detector = DetectorKind::BS;
    int grid_size = 1001;
    unsigned threads = 0;
    std::map<std::string, std::string> overrides;  // keys set explicitly in the file

    void validate() const;
};

struct ConfigBundle {
    ScenarioConfig scenario;
    CostModel costs;
    std::optional<FadingConfig> fading;
    ExperimentSpec experiment;
};

// INI-style file with sections [scenario], [cost], [fading], [experiment].
// Unset keys keep their defaults; unknown sections or keys are rejected.
// Throws ConfigError with the offending line or key.
ConfigBundle load_config(const std::string& path);
ConfigBundle parse_config(const std::string& text, const std::string& source = "<string>");

std::optional<DetectorKind> parse_detector(const std::string& name);

} // namespace ordfuse
