#pragma once

#include <cstdint>
#include <random>

namespace ordfuse {

using RandomStream = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for one (seed, domain, index) triple. Each slot of a Monte
// Carlo run gets its own stream, so results do not depend on how slots are
// split between workers, and two runs with the same seed see the same slots.
inline RandomStream slot_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0) {
    std::uint64_t s = seed;
    std::uint64_t key = splitmix64(s);
    s = key ^ (domain * 0xd1b54a32d192ed03ULL);
    key = splitmix64(s);
    s = key ^ index;
    return RandomStream(splitmix64(s));
}

enum StreamDomain : std::uint64_t { kSlotDomain = 0, kParticipantDomain = 1 };

} // namespace ordfuse
