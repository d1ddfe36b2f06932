#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace qrng {

/// Philox4x32-10 block function. Stateless: the output
/// is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Named random streams used by the simulator. Each consumer draws from its
/// own stream so that enabling one noise source never shifts another.
enum class Stream : std::uint64_t {
    phase_steps = 1,
    intensity_signal = 2,
    intensity_lo = 3,
    electrical_i = 4,
    electrical_q = 5,
    drift_walk = 6,
    extractor_seed = 7,
    reference_bits = 8,
};

/// Counter-based generator over Philox4x32-10.
///
/// The 64-bit seed is the Philox key; the counter is (index, stream). Every
/// draw is addressed by its index, so any partition of an index range across
/// threads reproduces the sequential result exactly.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    CounterRng(std::uint64_t seed, Stream stream) noexcept
        : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent child generator; the child key is a Philox hash of
    /// (seed, stream, child).
    CounterRng split(std::uint64_t child) const noexcept;

    std::array<std::uint32_t, 4> block(std::uint64_t index) const noexcept;

    std::uint64_t bits64(std::uint64_t index) const noexcept;

    /// Uniform double in the open interval (0, 1), 53-bit resolution.
    double uniform(std::uint64_t index) const noexcept;

    /// Two independent standard normals from one Philox block (Box-Muller).
    std::pair<double, double> normal_pair(std::uint64_t index) const noexcept;

    /// Standard normal number `index`; consecutive even/odd indices share a
    /// Box-Muller pair.
    double normal(std::uint64_t index) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace qrng
