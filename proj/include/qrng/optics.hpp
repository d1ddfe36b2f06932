#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/stochastic.hpp"

namespace qrng {

enum class DriftMode { fixed, slow_walk };

/// Unbalanced interferometer and beam splitter.
struct InterferometerParams {
    double delay_length = 6.0;       // m
    double fiber_index = 1.5;
    double delay_loss = 1.0;         // K in (0, 1]
    double bs_transmittance = 0.5;   // T in (0, 1)
    double static_phase = 0.0;       // rad, omega_0 * T_delay (stored wrapped)
    double drift_phase = 0.0;        // rad, classical phi_0 (stored wrapped)
    DriftMode drift_mode = DriftMode::fixed;
    double drift_step = 0.0;         // rad per sample, slow-walk only
    // Explicit per-arm power fluctuation std. devs (W). When unset they are the
    // laser's relative fluctuation applied to each arm's mean power.
    std::optional<double> signal_power_sigma;
    std::optional<double> lo_power_sigma;

    double delay() const;
    void validate() const;
};

/// One balanced homodyne detector channel plus its digitizer.
struct DetectorParams {
    double transimpedance = 16e3;          // V/A
    double responsivity = 1.0;             // A/W
    double electrical_noise_sigma = 0.0;   // V
    double response_time = 625e-12;        // s
    int adc_bits = 10;
    double adc_fullscale = 1.0;            // V, the ADC spans [-fullscale, fullscale)

    void validate() const;
};

enum class TraceSource { simulated, ingested };

struct TraceMetadata {
    TraceSource source = TraceSource::simulated;
    std::uint64_t config_digest = 0;
    std::uint64_t seed = 0;
    std::size_t clamped_power_draws = 0;  // simulator warning counter
};

/// Time-aligned I/Q voltages.
struct IQTrace {
    std::vector<double> v_i;
    std::vector<double> v_q;
    double sample_rate = 0.0;  // Sa/s
    int adc_bits = 10;
    double adc_fullscale = 1.0;
    TraceMetadata metadata;

    std::size_t size() const { return v_i.size(); }
    void validate() const;
};

/// Independently switchable non-idealities.
struct NoiseSwitches {
    bool intensity = false;   // power fluctuations on both arms
    bool electrical = false;  // additive white noise per channel
    bool drift = false;       // classical interferometer phase phi_0
    bool mismatch = false;    // channel Q uses its own gain; off = Q copies I
    bool bandwidth = false;   // single-pole detector low-pass, tau = response_time
    bool adc = false;         // quantize voltages to the ADC grid

    static NoiseSwitches all_off() { return {}; }
    static NoiseSwitches all_on() { return {true, true, true, true, true, true}; }
};

/// Peak BHD output Z * R * P0 * sqrt(K * T * (1 - T)).
double bhd_amplitude(const LaserParams& laser, const InterferometerParams& ifm,
                     const DetectorParams& det);

/// Phase offset introduced by unequal channel amplitudes:
/// atan((I0' Q0 - I0 Q0') / (Q0 Q0' + I0' I0)).
double additional_phase(double i0, double q0, double i0_meas, double q0_meas);

/// Exact error of the phase reconstructed from mismatched channels at true
/// phase `phi`, when each channel is normalized by its nominal amplitude.
double measured_phase_error(double phi, double i0, double q0, double i0_meas, double q0_meas);

/// Baseband I/Q voltages for a sampled phase path.
///
/// Per sample: V_I = Z1 R1 sqrt(P_S P_LO) cos(theta0 + phi0 + dxi) + w1 and
/// V_Q likewise with sin and channel-2 parameters. Intensity draws are shared
/// by both channels of a sample. With `bandwidth` on, the unit phasor
/// exp(i dxi) is low-passed on the path's fine grid before scaling; that needs
/// a generated path whose grid step is at most half the response time.
/// OpenMP-parallel; matches reference::simulate_trace bit for bit.
IQTrace simulate_trace(const PhasePath& path, const LaserParams& laser,
                       const InterferometerParams& ifm, const DetectorParams& det_i,
                       const DetectorParams& det_q, const NoiseSwitches& noise, std::uint64_t seed);

struct TimingReport {
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    double phase_variance = 0.0;
    double increment_lag1 = 0.0;        // corr of successive Delta-xi
    double predicted_phase_lag1 = 0.0;  // corr of successive wrapped phases
};

/// Advisory checks: detector response vs. coherence time, and phase variance
/// against the uniform-phase threshold of 10 rad^2.
TimingReport validate_timing(const LaserParams& laser, const InterferometerParams& ifm,
                             const DetectorParams& det, double sample_rate);

/// Largest variance below which the wrapped phase is not yet uniform.
inline constexpr double kUniformPhaseVariance = 10.0;

/// Mid-rise ADC: code = floor((v + fs) / (2 fs) * 2^bits), clamped.
std::uint32_t adc_code(double v, int bits, double fullscale);
double adc_level(std::uint32_t code, int bits, double fullscale);
std::vector<std::uint32_t> adc_quantize(std::span<const double> v, int bits, double fullscale);

namespace detail {

/// Truncated, renormalized impulse response of a single-pole low-pass
/// sampled with step `dt`.
std::vector<double> single_pole_taps(double tau, double dt);

}  // namespace detail

}  // namespace qrng
