#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qrng {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s, exact

/// Laser source. `coherence_time` and `linewidth` are tied by
/// tau_c = 1 / (pi * linewidth); use the factories to keep them consistent.
struct LaserParams {
    double linewidth = 0.0;        // Hz
    double coherence_time = 0.0;   // s
    double mean_power = 0.0;       // W
    double intensity_sigma = 0.0;  // W, std. dev. of the power fluctuation

    static LaserParams from_linewidth(double linewidth, double mean_power,
                                      double intensity_sigma = 0.0);
    static LaserParams from_coherence_time(double coherence_time, double mean_power,
                                           double intensity_sigma = 0.0);

    void validate() const;
};

/// Interferometer delay T = n * L / c.
double delay_time(double delay_length, double fiber_index);

/// Variance of the phase difference accumulated over the interferometer
/// delay: 2 * T_delay / tau_c.
double phase_variance(double delay_length, double fiber_index, double coherence_time);

/// Wrapped-Gaussian density on [-pi, pi), truncated to |k| <= k_max images.
double folded_gaussian_pdf(double x, double sigma_sq, int k_max = 10);

/// Reduce to the half-open interval [-pi, pi); pi itself maps to -pi.
/// Values already inside the interval are returned unchanged.
double wrap_phase(double x);

/// Simulation grid for the laser phase. The Wiener path is sampled with step
/// `step`; samples are `steps_per_sample` grid steps apart and the delay spans
/// `steps_per_delay` steps. `step_sigma` is chosen so that the windowed sum over
/// one delay has exactly the requested variance.
struct PhaseGrid {
    double step = 0.0;
    std::int64_t steps_per_sample = 1;
    std::int64_t steps_per_delay = 1;
    double step_sigma = 0.0;
    std::uint64_t seed = 0;

    double realized_delay() const { return step * static_cast<double>(steps_per_delay); }
};

/// Pick the coarsest grid (not coarser than `max_step`) on which both the
/// sample period and the delay are integer step counts, the delay to within
/// 1e-3 relative.
PhaseGrid make_phase_grid(double delay_time, double sample_period, double variance,
                          std::uint64_t seed, double max_step = 0.0);

/// Phase differences at fine-grid indices [first, first + out.size()).
/// Index j covers the Wiener increments on [j, j + steps_per_delay) grid steps;
/// negative j are allowed. Results are bit-identical for any split of the
/// index range.
void fine_increments(const PhaseGrid& grid, std::int64_t first, std::span<double> out);

/// Sampled phase differences Delta-xi(t_i) = phi(t_i) - phi(t_i - T_delay).
struct PhasePath {
    std::vector<double> increments;  // rad
    double sample_period = 0.0;      // s
    double delay_time = 0.0;         // s
    std::uint64_t rng_seed = 0;
    double variance = 0.0;           // rad^2, the model variance
    std::optional<PhaseGrid> grid;   // set when generated by sample_phase_path

    std::size_t size() const { return increments.size(); }
};

/// Brownian (Wiener) phase diffusion with diffusion constant 2 / tau_c, so the
/// marginal variance is phase_variance() and the lag-1 correlation is
/// max(0, 1 - sample_period / delay_time). OpenMP-parallel; identical to
/// reference::sample_phase_path for any thread count.
PhasePath sample_phase_path(const LaserParams& laser, double delay_time, double sample_period,
                            std::size_t count, std::uint64_t seed, double max_grid_step = 0.0);

/// Cumulative sums of i.i.d. N(0, step_sigma^2) steps, walk[0] = 0. Summed in
/// fixed point so the parallel scan equals the sequential one bit for bit.
std::vector<double> exact_random_walk(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                                      double step_sigma);

namespace detail {

/// Fixed-point scale used for exactly-associative sums of Gaussian steps.
inline constexpr double kFixedScale = 0x1.0p40;

std::int64_t to_fixed(double x);
double from_fixed(std::int64_t q);

/// Normal-draw index of grid step `u` (u may be negative).
std::uint64_t step_index(std::int64_t u);

}  // namespace detail

}  // namespace qrng
