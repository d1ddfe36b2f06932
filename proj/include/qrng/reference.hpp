#pragma once

// Straight-line serial versions of the parallel kernels. Slow; kept as test
// oracles and as the baseline in the benchmarks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qrng/bitstream.hpp"
#include "qrng/entropy.hpp"
#include "qrng/optics.hpp"
#include "qrng/stochastic.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng::reference {

PhasePath sample_phase_path(const LaserParams& laser, double delay_time, double sample_period,
                            std::size_t count, std::uint64_t seed, double max_grid_step = 0.0);

std::vector<double> exact_random_walk(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                                      double step_sigma);

IQTrace simulate_trace(const PhasePath& path, const LaserParams& laser,
                       const InterferometerParams& ifm, const DetectorParams& det_i,
                       const DetectorParams& det_q, const NoiseSwitches& noise, std::uint64_t seed);

/// Row-by-row matrix product over GF(2).
BitStream toeplitz_extract(const BitStream& input, const ToeplitzSpec& spec);

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

}  // namespace qrng::reference
