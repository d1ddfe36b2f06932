#include "qrng/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qrng/errors.hpp"
#include "qrng/rng.hpp"

namespace qrng::reference {

using qrng::detail::require;

namespace {

// Fine-grid increments for indices [first, first + count), from one prefix sum.
std::vector<double> all_fine_increments(const PhaseGrid& grid, std::int64_t first, std::size_t count) {
    const CounterRng rng(grid.seed, Stream::phase_steps);
    const std::int64_t l = grid.steps_per_delay;
    const std::size_t total = count + static_cast<std::size_t>(l);
    std::vector<std::uint64_t> prefix(total, 0);
    for (std::size_t m = 1; m < total; ++m) {
        const double z = rng.normal(qrng::detail::step_index(first + static_cast<std::int64_t>(m) - 1));
        prefix[m] = prefix[m - 1] + static_cast<std::uint64_t>(qrng::detail::to_fixed(z * grid.step_sigma));
    }
    std::vector<double> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        out[j] = qrng::detail::from_fixed(static_cast<std::int64_t>(prefix[j + static_cast<std::size_t>(l)] - prefix[j]));
    }
    return out;
}

}  // namespace

PhasePath sample_phase_path(const LaserParams& laser, double delay, double sample_period,
                            std::size_t count, std::uint64_t seed, double max_grid_step) {
    laser.validate();
    require(count >= 1, "sample count must be >= 1");
    require(delay > 0.0 && sample_period > 0.0, "delay and sample period must be positive");
    const double variance = 2.0 * delay / laser.coherence_time;
    const PhaseGrid grid = make_phase_grid(delay, sample_period, variance, seed, max_grid_step);
    const std::int64_t r = grid.steps_per_sample;
    const auto fine = all_fine_increments(grid, 0, (count - 1) * static_cast<std::size_t>(r) + 1);

    PhasePath path;
    path.sample_period = sample_period;
    path.delay_time = delay;
    path.rng_seed = seed;
    path.variance = variance;
    path.grid = grid;
    path.increments.resize(count);
    for (std::size_t i = 0; i < count; ++i) path.increments[i] = fine[i * static_cast<std::size_t>(r)];
    return path;
}

std::vector<double> exact_random_walk(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                                      double step_sigma) {
    const CounterRng rng(seed, stream);
    std::vector<double> walk(count, 0.0);
    std::uint64_t acc = 0;
    for (std::size_t i = 1; i < count; ++i) {
        acc += static_cast<std::uint64_t>(qrng::detail::to_fixed(rng.normal(i) * step_sigma));
        walk[i] = qrng::detail::from_fixed(static_cast<std::int64_t>(acc));
    }
    return walk;
}

IQTrace simulate_trace(const PhasePath& path, const LaserParams& laser,
                       const InterferometerParams& ifm, const DetectorParams& det_i,
                       const DetectorParams& det_q, const NoiseSwitches& noise, std::uint64_t seed) {
    laser.validate();
    ifm.validate();
    det_i.validate();
    det_q.validate();
    const std::size_t n = path.size();
    require(n >= 1, "phase path must be nonempty");

    const double t = ifm.bs_transmittance;
    const double ps_mean = ifm.delay_loss * t * laser.mean_power;
    const double plo_mean = (1.0 - t) * laser.mean_power;
    const double rel = laser.intensity_sigma / laser.mean_power;
    const double ps_sigma = ifm.signal_power_sigma.value_or(rel * ps_mean);
    const double plo_sigma = ifm.lo_power_sigma.value_or(rel * plo_mean);
    const double gain_i = det_i.transimpedance * det_i.responsivity;
    const double gain_q = noise.mismatch ? det_q.transimpedance * det_q.responsivity : gain_i;
    const double sw_i = det_i.electrical_noise_sigma;
    const double sw_q = noise.mismatch ? det_q.electrical_noise_sigma : det_i.electrical_noise_sigma;

    const CounterRng rng_s(seed, Stream::intensity_signal);
    const CounterRng rng_lo(seed, Stream::intensity_lo);
    const CounterRng rng_wi(seed, Stream::electrical_i);
    const CounterRng rng_wq(seed, Stream::electrical_q);

    std::vector<double> drift;
    if (noise.drift && ifm.drift_mode == DriftMode::slow_walk && ifm.drift_step > 0.0) {
        drift = exact_random_walk(seed, static_cast<std::uint64_t>(Stream::drift_walk), n, ifm.drift_step);
    }

    std::vector<double> taps;
    std::vector<double> fine;
    std::int64_t r = 1;
    std::int64_t j_first = 0;
    if (noise.bandwidth) {
        require(path.grid.has_value(), "detector bandwidth needs a generated phase path");
        require(path.grid->step <= 0.5 * det_i.response_time,
                "phase grid too coarse for the detector response time");
        taps = qrng::detail::single_pole_taps(det_i.response_time, path.grid->step);
        r = path.grid->steps_per_sample;
        const auto k = static_cast<std::int64_t>(taps.size());
        j_first = -(k - 1);
        fine = all_fine_increments(*path.grid, j_first,
                                   static_cast<std::size_t>(static_cast<std::int64_t>(n - 1) * r + k));
    }

    IQTrace trace;
    trace.v_i.resize(n);
    trace.v_q.resize(n);
    trace.sample_rate = 1.0 / path.sample_period;
    trace.adc_bits = det_i.adc_bits;
    trace.adc_fullscale = det_i.adc_fullscale;
    trace.metadata.source = TraceSource::simulated;
    trace.metadata.seed = seed;

    for (std::size_t i = 0; i < n; ++i) {
        double p_s = ps_mean;
        double p_lo = plo_mean;
        if (noise.intensity) {
            p_s += ps_sigma * rng_s.normal(i);
            p_lo += plo_sigma * rng_lo.normal(i);
            if (p_s <= 0.0 || p_lo <= 0.0) {
                ++trace.metadata.clamped_power_draws;
                p_s = std::max(p_s, 0.0);
                p_lo = std::max(p_lo, 0.0);
            }
        }
        const double field = std::sqrt(p_s * p_lo);
        double offset = ifm.static_phase;
        if (noise.drift) offset += ifm.drift_phase + (drift.empty() ? 0.0 : drift[i]);

        double c_part;
        double s_part;
        if (noise.bandwidth) {
            const std::int64_t end = static_cast<std::int64_t>(i) * r - j_first;
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t k = 0; k < taps.size(); ++k) {
                acc += taps[k] * std::polar(1.0, fine[static_cast<std::size_t>(end) - k]);
            }
            const std::complex<double> z = std::polar(1.0, offset) * acc;
            c_part = z.real();
            s_part = z.imag();
        } else {
            c_part = std::cos(offset + path.increments[i]);
            s_part = std::sin(offset + path.increments[i]);
        }
        double vi = gain_i * field * c_part;
        double vq = gain_q * field * s_part;
        if (noise.electrical) {
            vi += sw_i * rng_wi.normal(i);
            vq += sw_q * rng_wq.normal(i);
        }
        if (noise.adc) {
            vi = adc_level(adc_code(vi, det_i.adc_bits, det_i.adc_fullscale), det_i.adc_bits, det_i.adc_fullscale);
            vq = adc_level(adc_code(vq, det_q.adc_bits, det_q.adc_fullscale), det_q.adc_bits, det_q.adc_fullscale);
        }
        trace.v_i[i] = vi;
        trace.v_q[i] = vq;
    }
    return trace;
}

BitStream toeplitz_extract(const BitStream& input, const ToeplitzSpec& spec) {
    const std::size_t n = spec.n();
    const std::size_t m = spec.m();
    if (input.size() < n) throw InsufficientInputError("extractor input shorter than one block");
    BitStream out;
    for (std::size_t b = 0; b < input.size() / n; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            bool y = false;
            for (std::size_t j = 0; j < n; ++j) y ^= spec.entry(i, j) && input[b * n + j];
            out.push_back(y);
        }
    }
    return out;
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    Histogram h = Histogram::uniform(lo, hi, bins);
    for (double v : values) h.add(v);
    return h;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    require(n > max_lag, "series must be longer than max_lag");
    long double mu = 0.0L;
    for (double v : series) mu += v;
    mu /= static_cast<long double>(n);
    std::vector<double> r(max_lag + 1);
    long double c0 = 0.0L;
    for (double v : series) c0 += (v - mu) * (v - mu);
    if (!(c0 > 0.0L)) throw DegenerateError("series has zero variance; autocorrelation undefined");
    for (std::size_t k = 0; k <= max_lag; ++k) {
        long double ck = 0.0L;
        for (std::size_t i = 0; i + k < n; ++i) ck += (series[i] - mu) * (series[i + k] - mu);
        r[k] = static_cast<double>(ck / c0);
    }
    return r;
}

}  // namespace qrng::reference
