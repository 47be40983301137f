#pragma once

#include <cstdint>

#include "smc/sim/rng.hpp"

namespace smc {

/// Replication index -> seed mapping. Seeds are SplitMix64 outputs of the
/// state baseSeed ^ index: the finalizer is a bijection on 64-bit words, so
/// distinct indices always get distinct seeds.
struct SeedPlan {
    std::uint64_t baseSeed = 0;
};

constexpr std::uint64_t deriveSeed(SeedPlan plan, std::uint64_t replicationIndex) {
    std::uint64_t state = plan.baseSeed ^ replicationIndex;
    return splitMix64(state);
}

/// Indices at and above this value are reserved for single long
/// trajectories (warmup, batch means) so they never collide with
/// replication seeds.
inline constexpr std::uint64_t kAuxiliaryStream = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kWarmupStream = kAuxiliaryStream;
inline constexpr std::uint64_t kBatchMeansStream = kAuxiliaryStream + 1;

}  // namespace smc
