#include "qrng/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qrng/errors.hpp"
#include "qrng/exec.hpp"
#include "qrng/rng.hpp"

namespace qrng {

using detail::require;
using std::numbers::pi;

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

LaserParams LaserParams::from_linewidth(double linewidth, double mean_power, double intensity_sigma) {
    require(finite(linewidth) && linewidth > 0.0, "laser linewidth must be positive");
    LaserParams p{linewidth, 1.0 / (pi * linewidth), mean_power, intensity_sigma};
    p.validate();
    return p;
}

LaserParams LaserParams::from_coherence_time(double coherence_time, double mean_power,
                                             double intensity_sigma) {
    require(finite(coherence_time) && coherence_time > 0.0, "coherence time must be positive");
    LaserParams p{1.0 / (pi * coherence_time), coherence_time, mean_power, intensity_sigma};
    p.validate();
    return p;
}

void LaserParams::validate() const {
    require(finite(linewidth) && linewidth > 0.0, "laser linewidth must be positive");
    require(finite(coherence_time) && coherence_time > 0.0, "coherence time must be positive");
    const double expected = 1.0 / (pi * linewidth);
    require(std::abs(coherence_time - expected) <= 1e-12 * expected,
            "coherence time must equal 1/(pi * linewidth)");
    require(finite(mean_power) && mean_power > 0.0, "mean optical power must be positive");
    require(finite(intensity_sigma) && intensity_sigma >= 0.0,
            "intensity sigma must be non-negative");
}

double delay_time(double delay_length, double fiber_index) {
    require(finite(delay_length) && delay_length >= 0.0, "delay length must be >= 0");
    require(finite(fiber_index) && fiber_index >= 1.0, "fiber index must be >= 1");
    return fiber_index * delay_length / kSpeedOfLight;
}

double phase_variance(double delay_length, double fiber_index, double coherence_time) {
    require(finite(coherence_time) && coherence_time > 0.0, "coherence time must be positive");
    return 2.0 * delay_time(delay_length, fiber_index) / coherence_time;
}

double folded_gaussian_pdf(double x, double sigma_sq, int k_max) {
    require(finite(x), "phase must be finite");
    require(finite(sigma_sq) && sigma_sq > 0.0, "variance must be positive");
    require(k_max >= 1, "k_max must be >= 1");
    const double norm = 1.0 / std::sqrt(2.0 * pi * sigma_sq);
    double sum = 0.0;
    // Smallest terms first.
    for (int k = k_max; k >= 1; --k) {
        const double a = x - 2.0 * pi * k;
        const double b = x + 2.0 * pi * k;
        sum += std::exp(-a * a / (2.0 * sigma_sq)) + std::exp(-b * b / (2.0 * sigma_sq));
    }
    sum += std::exp(-x * x / (2.0 * sigma_sq));
    return norm * sum;
}

double wrap_phase(double x) {
    require(finite(x), "phase must be finite");
    if (x >= -pi && x < pi) return x;
    double r = std::fmod(x + pi, 2.0 * pi);
    if (r < 0.0) r += 2.0 * pi;
    double y = r - pi;
    if (y >= pi) y = -pi;
    if (y < -pi) y = -pi;
    return y;
}

PhaseGrid make_phase_grid(double delay, double sample_period, double variance, std::uint64_t seed,
                          double max_step) {
    require(finite(delay) && delay > 0.0, "delay time must be positive");
    require(finite(sample_period) && sample_period > 0.0, "sample period must be positive");
    require(finite(variance) && variance > 0.0, "phase variance must be positive");

    std::int64_t r_min = 1;
    if (max_step > 0.0) {
        r_min = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(sample_period / max_step - 1e-9)));
    }
    constexpr double kTolerance = 1e-3;
    std::int64_t best_r = r_min;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::int64_t r = r_min; r < r_min + 4096; ++r) {
        const double step = sample_period / static_cast<double>(r);
        const auto l = static_cast<std::int64_t>(std::llround(delay / step));
        if (l < 1) continue;
        const double err = std::abs(static_cast<double>(l) * step - delay) / delay;
        if (err < best_err) {
            best_err = err;
            best_r = r;
        }
        if (err <= kTolerance) break;
    }
    PhaseGrid g;
    g.steps_per_sample = best_r;
    g.step = sample_period / static_cast<double>(best_r);
    g.steps_per_delay = std::max<std::int64_t>(1, std::llround(delay / g.step));
    g.step_sigma = std::sqrt(variance / static_cast<double>(g.steps_per_delay));
    g.seed = seed;
    return g;
}

namespace detail {

std::int64_t to_fixed(double x) { return static_cast<std::int64_t>(std::llround(x * kFixedScale)); }

double from_fixed(std::int64_t q) { return static_cast<double>(q) / kFixedScale; }

std::uint64_t step_index(std::int64_t u) {
    constexpr std::uint64_t kOrigin = std::uint64_t{1} << 62;
    return kOrigin + static_cast<std::uint64_t>(u);
}

}  // namespace detail

void fine_increments(const PhaseGrid& grid, std::int64_t first, std::span<double> out) {
    if (out.empty()) return;
    const CounterRng rng(grid.seed, Stream::phase_steps);
    const std::int64_t l = grid.steps_per_delay;
    const auto n = static_cast<std::int64_t>(out.size());
    // prefix[m] = sum of q_u for u in [first, first + m), modulo 2^64.
    std::vector<std::uint64_t> prefix(static_cast<std::size_t>(n + l));
    std::uint64_t acc = 0;
    prefix[0] = 0;
    for (std::int64_t m = 0; m + 1 < n + l; ++m) {
        const double z = rng.normal(detail::step_index(first + m));
        acc += static_cast<std::uint64_t>(detail::to_fixed(z * grid.step_sigma));
        prefix[static_cast<std::size_t>(m + 1)] = acc;
    }
    for (std::int64_t j = 0; j < n; ++j) {
        const auto diff = static_cast<std::int64_t>(prefix[static_cast<std::size_t>(j + l)] -
                                                    prefix[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(j)] = detail::from_fixed(diff);
    }
}

PhasePath sample_phase_path(const LaserParams& laser, double delay, double sample_period,
                            std::size_t count, std::uint64_t seed, double max_grid_step) {
    laser.validate();
    require(count >= 1, "sample count must be >= 1");
    require(finite(delay) && delay > 0.0, "delay time must be positive");
    require(finite(sample_period) && sample_period > 0.0, "sample period must be positive");

    const double variance = 2.0 * delay / laser.coherence_time;
    const PhaseGrid grid = make_phase_grid(delay, sample_period, variance, seed, max_grid_step);

    PhasePath path;
    path.increments.resize(count);
    path.sample_period = sample_period;
    path.delay_time = delay;
    path.rng_seed = seed;
    path.variance = variance;
    path.grid = grid;

    const std::int64_t r = grid.steps_per_sample;
    const std::size_t per_chunk = std::max<std::size_t>(1, kChunk / static_cast<std::size_t>(r));
    const auto chunks = static_cast<std::int64_t>(chunk_count(count, per_chunk));

#pragma omp parallel
    {
        std::vector<double> fine;
#pragma omp for schedule(static)
        for (std::int64_t c = 0; c < chunks; ++c) {
            const std::size_t i0 = static_cast<std::size_t>(c) * per_chunk;
            const std::size_t i1 = std::min(count, i0 + per_chunk);
            const auto j0 = static_cast<std::int64_t>(i0) * r;
            const auto span_len = static_cast<std::size_t>((static_cast<std::int64_t>(i1 - i0) - 1) * r + 1);
            fine.resize(span_len);
            fine_increments(grid, j0, fine);
            for (std::size_t i = i0; i < i1; ++i) {
                path.increments[i] = fine[(i - i0) * static_cast<std::size_t>(r)];
            }
        }
    }
    return path;
}

std::vector<double> exact_random_walk(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                                      double step_sigma) {
    std::vector<double> walk(count, 0.0);
    if (count == 0) return walk;
    const CounterRng rng(seed, stream);
    const auto chunks = static_cast<std::int64_t>(chunk_count(count));
    std::vector<std::uint64_t> local(count, 0);
    std::vector<std::uint64_t> chunk_sum(static_cast<std::size_t>(chunks), 0);

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t i0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t i1 = std::min(count, i0 + kChunk);
        std::uint64_t acc = 0;
        for (std::size_t i = i0; i < i1; ++i) {
            if (i > 0) acc += static_cast<std::uint64_t>(detail::to_fixed(rng.normal(i) * step_sigma));
            local[i] = acc;
        }
        chunk_sum[static_cast<std::size_t>(c)] = acc;
    }
    std::uint64_t offset = 0;
    std::vector<std::uint64_t> chunk_offset(static_cast<std::size_t>(chunks), 0);
    for (std::int64_t c = 0; c < chunks; ++c) {
        chunk_offset[static_cast<std::size_t>(c)] = offset;
        offset += chunk_sum[static_cast<std::size_t>(c)];
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t i0 = static_cast<std::size_t>(c) * kChunk;
        const std::size_t i1 = std::min(count, i0 + kChunk);
        for (std::size_t i = i0; i < i1; ++i) {
            walk[i] = detail::from_fixed(
                static_cast<std::int64_t>(local[i] + chunk_offset[static_cast<std::size_t>(c)]));
        }
    }
    return walk;
}

}  // namespace qrng
