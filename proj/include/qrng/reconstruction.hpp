#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "qrng/optics.hpp"

namespace qrng {

enum class NormalizationMethod { percentile, arcsine_fit, fixed };

std::string_view to_string(NormalizationMethod method);
NormalizationMethod parse_normalization(std::string_view name);

/// Result of normalize_iq: the unit-amplitude trace and the per-channel
/// estimates that produced it.
struct NormalizedTrace {
    IQTrace trace;
    double offset_i = 0.0;
    double offset_q = 0.0;
    double amplitude_i = 1.0;
    double amplitude_q = 1.0;
};

/// Minimum samples per channel accepted by normalize_iq.
inline constexpr std::size_t kMinNormalizeSamples = 1000;

/// Remove each channel's mean, then divide by its estimated amplitude.
///
/// percentile: half the distance between the 0.1 % and 99.9 % quantiles.
/// arcsine_fit: amplitude minimizing the Kolmogorov distance between the
/// channel and the arcsine law.
/// fixed is not an estimator; use the overload taking amplitudes.
NormalizedTrace normalize_iq(const IQTrace& trace,
                             NormalizationMethod method = NormalizationMethod::percentile);

/// Remove each channel's mean, then divide by known (hardware) amplitudes.
NormalizedTrace normalize_iq(const IQTrace& trace, double amplitude_i, double amplitude_q);

/// Amplitude estimate of one bias-removed channel.
double estimate_amplitude(std::vector<double> centered, NormalizationMethod method);

struct PhaseSeries {
    std::vector<double> phases;  // rad, in [-pi, pi)
    std::uint64_t source_digest = 0;
    std::size_t zero_vector_count = 0;

    std::size_t size() const { return phases.size(); }
};

struct SymbolStream {
    std::vector<std::uint16_t> symbols;
    int bits_per_symbol = 0;

    std::size_t size() const { return symbols.size(); }
};

/// atan2(V_Q, V_I) per sample, folded into [-pi, pi). (0, 0) maps to 0 and is
/// counted in zero_vector_count.
PhaseSeries reconstruct_phase(const IQTrace& trace);

/// Phase of one (V_I, V_Q) pair with the same conventions.
double reconstruct_phase(double v_i, double v_q);

/// Symbol floor((phi + pi) / delta), delta = pi / 2^(n-1), clamped to 2^n - 1.
std::uint16_t quantize_phase(double phi, int n);

/// 2^n uniform bins over [-pi, pi).
SymbolStream quantize_phase(const PhaseSeries& series, int n);

}  // namespace qrng
