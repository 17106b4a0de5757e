#pragma once

#include <string>
#include <vector>

#include "ordfuse/config_io.hpp"

namespace ordfuse {

std::vector<std::string> preset_names();

// Runs the preset named in the bundle's experiment spec and writes
// <output>/<preset>.csv plus a <preset>.csv.meta.json sidecar holding every
// resolved parameter. Returns the paths written.
std::vector<std::string> run_experiment(const ConfigBundle& bundle);

} // namespace ordfuse
