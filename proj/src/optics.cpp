#include "qrng/optics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/exec.hpp"
#include "qrng/rng.hpp"

namespace qrng {

using detail::require;
using std::numbers::pi;

double InterferometerParams::delay() const { return delay_time(delay_length, fiber_index); }

void InterferometerParams::validate() const {
    (void)delay();
    require(std::isfinite(delay_loss) && delay_loss > 0.0 && delay_loss <= 1.0,
            "delay loss K must lie in (0, 1]");
    require(std::isfinite(bs_transmittance) && bs_transmittance > 0.0 && bs_transmittance < 1.0,
            "beam-splitter transmittance T must lie in (0, 1)");
    require(std::isfinite(static_phase) && static_phase >= -pi && static_phase < pi,
            "static phase must be stored wrapped to [-pi, pi)");
    require(std::isfinite(drift_phase) && drift_phase >= -pi && drift_phase < pi,
            "drift phase must be stored wrapped to [-pi, pi)");
    require(std::isfinite(drift_step) && drift_step >= 0.0, "drift step must be >= 0");
    if (signal_power_sigma) require(*signal_power_sigma >= 0.0, "signal power sigma must be >= 0");
    if (lo_power_sigma) require(*lo_power_sigma >= 0.0, "LO power sigma must be >= 0");
}

void DetectorParams::validate() const {
    require(std::isfinite(transimpedance) && transimpedance > 0.0, "transimpedance must be positive");
    require(std::isfinite(responsivity) && responsivity > 0.0, "responsivity must be positive");
    require(std::isfinite(electrical_noise_sigma) && electrical_noise_sigma >= 0.0,
            "electrical noise sigma must be >= 0");
    require(std::isfinite(response_time) && response_time > 0.0, "response time must be positive");
    require(adc_bits >= 1 && adc_bits <= 16, "ADC bits must lie in [1, 16]");
    require(std::isfinite(adc_fullscale) && adc_fullscale > 0.0, "ADC full scale must be positive");
}

void IQTrace::validate() const {
    require(!v_i.empty(), "trace must hold at least one sample");
    require(v_i.size() == v_q.size(), "I and Q channels must have equal length");
    require(std::isfinite(sample_rate) && sample_rate > 0.0, "sample rate must be positive");
    for (std::size_t k = 0; k < v_i.size(); ++k) {
        require(std::isfinite(v_i[k]) && std::isfinite(v_q[k]), "trace samples must be finite");
    }
}

double bhd_amplitude(const LaserParams& laser, const InterferometerParams& ifm,
                     const DetectorParams& det) {
    laser.validate();
    ifm.validate();
    det.validate();
    const double t = ifm.bs_transmittance;
    return det.transimpedance * det.responsivity * laser.mean_power *
           std::sqrt(ifm.delay_loss * t * (1.0 - t));
}

double additional_phase(double i0, double q0, double i0_meas, double q0_meas) {
    for (double a : {i0, q0, i0_meas, q0_meas}) {
        require(std::isfinite(a) && a > 0.0, "channel amplitudes must be positive");
    }
    return std::atan((i0_meas * q0 - i0 * q0_meas) / (q0 * q0_meas + i0_meas * i0));
}

double measured_phase_error(double phi, double i0, double q0, double i0_meas, double q0_meas) {
    for (double a : {i0, q0, i0_meas, q0_meas}) {
        require(std::isfinite(a) && a > 0.0, "channel amplitudes must be positive");
    }
    const double measured = std::atan2(q0_meas * std::sin(phi) / q0, i0_meas * std::cos(phi) / i0);
    return std::remainder(measured - phi, 2.0 * pi);
}

std::uint32_t adc_code(double v, int bits, double fullscale) {
    const double levels = std::ldexp(1.0, bits);
    const double x = std::floor((v + fullscale) / (2.0 * fullscale) * levels);
    if (!(x >= 0.0)) return 0;
    if (x >= levels) return static_cast<std::uint32_t>(levels) - 1;
    return static_cast<std::uint32_t>(x);
}

double adc_level(std::uint32_t code, int bits, double fullscale) {
    const double levels = std::ldexp(1.0, bits);
    return -fullscale + (static_cast<double>(code) + 0.5) * (2.0 * fullscale / levels);
}

std::vector<std::uint32_t> adc_quantize(std::span<const double> v, int bits, double fullscale) {
    require(bits >= 1 && bits <= 16, "ADC bits must lie in [1, 16]");
    require(fullscale > 0.0, "ADC full scale must be positive");
    std::vector<std::uint32_t> out(v.size());
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = adc_code(v[k], bits, fullscale);
    return out;
}

namespace detail {

std::vector<double> single_pole_taps(double tau, double dt) {
    const double a = std::exp(-dt / tau);
    // Truncate where the tail weight drops below 1e-12.
    const auto count = static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(a))) + 1;
    std::vector<double> taps(count);
    double w = 1.0 - a;
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        taps[k] = w;
        sum += w;
        w *= a;
    }
    for (double& t : taps) t /= sum;
    return taps;
}

}  // namespace detail

namespace {

struct ArmPowers {
    double signal_mean;
    double lo_mean;
    double signal_sigma;
    double lo_sigma;
};

ArmPowers arm_powers(const LaserParams& laser, const InterferometerParams& ifm) {
    const double t = ifm.bs_transmittance;
    ArmPowers p{};
    p.signal_mean = ifm.delay_loss * t * laser.mean_power;
    p.lo_mean = (1.0 - t) * laser.mean_power;
    const double rel = laser.intensity_sigma / laser.mean_power;
    p.signal_sigma = ifm.signal_power_sigma.value_or(rel * p.signal_mean);
    p.lo_sigma = ifm.lo_power_sigma.value_or(rel * p.lo_mean);
    return p;
}

}  // namespace

IQTrace simulate_trace(const PhasePath& path, const LaserParams& laser,
                       const InterferometerParams& ifm, const DetectorParams& det_i,
                       const DetectorParams& det_q, const NoiseSwitches& noise, std::uint64_t seed) {
    laser.validate();
    ifm.validate();
    det_i.validate();
    det_q.validate();
    require(path.size() >= 1, "phase path must be nonempty");
    require(path.sample_period > 0.0, "phase path sample period must be positive");

    const std::size_t n = path.size();
    const ArmPowers arms = arm_powers(laser, ifm);
    const double gain_i = det_i.transimpedance * det_i.responsivity;
    const double gain_q = noise.mismatch ? det_q.transimpedance * det_q.responsivity : gain_i;
    const double sigma_w_i = det_i.electrical_noise_sigma;
    const double sigma_w_q = noise.mismatch ? det_q.electrical_noise_sigma : det_i.electrical_noise_sigma;

    const CounterRng rng_s(seed, Stream::intensity_signal);
    const CounterRng rng_lo(seed, Stream::intensity_lo);
    const CounterRng rng_wi(seed, Stream::electrical_i);
    const CounterRng rng_wq(seed, Stream::electrical_q);

    std::vector<double> drift;
    if (noise.drift && ifm.drift_mode == DriftMode::slow_walk && ifm.drift_step > 0.0) {
        drift = exact_random_walk(seed, static_cast<std::uint64_t>(Stream::drift_walk), n, ifm.drift_step);
    }

    std::vector<double> taps;
    std::int64_t r = 1;
    if (noise.bandwidth) {
        require(path.grid.has_value(), "detector bandwidth needs a generated phase path");
        require(path.grid->step <= 0.5 * det_i.response_time,
                "phase grid too coarse for the detector response time");
        taps = detail::single_pole_taps(det_i.response_time, path.grid->step);
        r = path.grid->steps_per_sample;
    }
    const auto k_taps = static_cast<std::int64_t>(taps.size());

    IQTrace trace;
    trace.v_i.resize(n);
    trace.v_q.resize(n);
    trace.sample_rate = 1.0 / path.sample_period;
    trace.adc_bits = det_i.adc_bits;
    trace.adc_fullscale = det_i.adc_fullscale;
    trace.metadata.source = TraceSource::simulated;
    trace.metadata.seed = seed;

    const std::size_t per_chunk =
        noise.bandwidth ? std::max<std::size_t>(1, kChunk / static_cast<std::size_t>(r)) : kChunk;
    const auto chunks = static_cast<std::int64_t>(chunk_count(n, per_chunk));
    std::size_t clamped = 0;

#pragma omp parallel reduction(+ : clamped)
    {
        std::vector<double> fine;
        std::vector<std::complex<double>> phasor;
#pragma omp for schedule(static)
        for (std::int64_t c = 0; c < chunks; ++c) {
            const std::size_t i0 = static_cast<std::size_t>(c) * per_chunk;
            const std::size_t i1 = std::min(n, i0 + per_chunk);
            std::int64_t j_first = 0;
            if (noise.bandwidth) {
                j_first = static_cast<std::int64_t>(i0) * r - (k_taps - 1);
                const auto len = static_cast<std::size_t>(static_cast<std::int64_t>(i1 - 1 - i0) * r + k_taps);
                fine.resize(len);
                fine_increments(*path.grid, j_first, fine);
                phasor.resize(len);
                for (std::size_t m = 0; m < len; ++m) phasor[m] = std::polar(1.0, fine[m]);
            }
            for (std::size_t i = i0; i < i1; ++i) {
                double p_s = arms.signal_mean;
                double p_lo = arms.lo_mean;
                if (noise.intensity) {
                    p_s += arms.signal_sigma * rng_s.normal(i);
                    p_lo += arms.lo_sigma * rng_lo.normal(i);
                    if (p_s <= 0.0 || p_lo <= 0.0) {
                        ++clamped;
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
                    const auto end = static_cast<std::int64_t>(i) * r - j_first;  // index of t_i
                    std::complex<double> acc{0.0, 0.0};
                    for (std::int64_t k = 0; k < k_taps; ++k) {
                        acc += taps[static_cast<std::size_t>(k)] * phasor[static_cast<std::size_t>(end - k)];
                    }
                    const std::complex<double> z = std::polar(1.0, offset) * acc;
                    c_part = z.real();
                    s_part = z.imag();
                } else {
                    const double theta = offset + path.increments[i];
                    c_part = std::cos(theta);
                    s_part = std::sin(theta);
                }
                double vi = gain_i * field * c_part;
                double vq = gain_q * field * s_part;
                if (noise.electrical) {
                    vi += sigma_w_i * rng_wi.normal(i);
                    vq += sigma_w_q * rng_wq.normal(i);
                }
                if (noise.adc) {
                    vi = adc_level(adc_code(vi, det_i.adc_bits, det_i.adc_fullscale), det_i.adc_bits,
                                   det_i.adc_fullscale);
                    vq = adc_level(adc_code(vq, det_q.adc_bits, det_q.adc_fullscale), det_q.adc_bits,
                                   det_q.adc_fullscale);
                }
                trace.v_i[i] = vi;
                trace.v_q[i] = vq;
            }
        }
    }
    trace.metadata.clamped_power_draws = clamped;
    return trace;
}

TimingReport validate_timing(const LaserParams& laser, const InterferometerParams& ifm,
                             const DetectorParams& det, double sample_rate) {
    TimingReport report;
    const double delay = ifm.delay();
    report.phase_variance = delay > 0.0 ? 2.0 * delay / laser.coherence_time : 0.0;

    std::ostringstream msg;
    if (det.response_time >= laser.coherence_time) {
        msg << "detector response time " << det.response_time << " s is not shorter than the laser "
            << "coherence time " << laser.coherence_time << " s; phase noise is averaged out";
        report.warnings.push_back(msg.str());
        msg.str("");
    }
    if (report.phase_variance < kUniformPhaseVariance) {
        msg << "phase variance " << report.phase_variance << " rad^2 is below "
            << kUniformPhaseVariance << "; the wrapped phase is not uniform";
        report.warnings.push_back(msg.str());
        msg.str("");
    }
    if (sample_rate > 0.0 && delay > 0.0) {
        const double ts = 1.0 / sample_rate;
        report.increment_lag1 = std::max(0.0, 1.0 - ts / delay);
        // Successive wrapped phases differ by a wrapped Gaussian of variance
        // 2 sigma^2 (1 - rho); the sawtooth's Fourier series gives the
        // correlation (6 / pi^2) sum_k exp(-k^2 v / 2) / k^2.
        const double v = 2.0 * report.phase_variance * (1.0 - report.increment_lag1);
        double sum = 0.0;
        for (int k = 1; k <= 200; ++k) sum += std::exp(-0.5 * k * k * v) / (k * k);
        report.predicted_phase_lag1 = 6.0 / (pi * pi) * sum;
        msg << "expected lag-1 correlation: " << report.increment_lag1 << " (phase increments), "
            << report.predicted_phase_lag1 << " (wrapped phase) at " << sample_rate << " Sa/s";
        report.notes.push_back(msg.str());
    }
    return report;
}

}  // namespace qrng
