#pragma once

#include <cstdint>
#include <random>

namespace mvldp {

/// SplitMix64 finalizer. Used as a counter-based mixer: stream seeds are a
/// pure function of (base seed, stream index, salt), so replicas never share
/// generator state and results do not depend on scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Salts keep independent families of streams apart for the same base seed.
enum class StreamSalt : std::uint64_t {
    replica = 0x5eed0001,
    particle = 0x5eed0002,
    controlled = 0x5eed0003,
    hypothesis = 0x5eed0004,
    optimizer = 0x5eed0005,
    projection = 0x5eed0006,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                    StreamSalt salt = StreamSalt::replica) noexcept {
    return splitmix64(splitmix64(splitmix64(base) + static_cast<std::uint64_t>(salt)) + index);
}

using Rng = std::mt19937_64;

}  // namespace mvldp
