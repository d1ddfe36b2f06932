#include "qrng/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qrng/errors.hpp"

namespace qrng {

using detail::require;
using std::numbers::pi;

namespace {

double quantile(std::vector<double>& v, double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

double mean(const std::vector<double>& v) {
    // Kahan summation.
    double sum = 0.0;
    double comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.size());
}

double arcsine_cdf(double x, double a) {
    if (x <= -a) return 0.0;
    if (x >= a) return 1.0;
    return 0.5 + std::asin(x / a) / pi;
}

// Kolmogorov distance between sorted samples and arcsine(a).
double ks_distance(const std::vector<double>& sorted, double a) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double f = arcsine_cdf(sorted[k], a);
        d = std::max({d, std::abs(f - static_cast<double>(k) / n), std::abs(f - static_cast<double>(k + 1) / n)});
    }
    return d;
}

double fit_arcsine(std::vector<double> v) {
    // Up to 2^17 evenly spaced order statistics are enough for a 1e-3 fit.
    std::sort(v.begin(), v.end());
    std::vector<double> sorted;
    constexpr std::size_t kMax = std::size_t{1} << 17;
    if (v.size() > kMax) {
        sorted.reserve(kMax);
        for (std::size_t k = 0; k < kMax; ++k) {
            sorted.push_back(v[(k * (v.size() - 1)) / (kMax - 1)]);
        }
    } else {
        sorted = std::move(v);
    }
    double var = 0.0;
    for (double x : sorted) var += x * x;
    var /= static_cast<double>(sorted.size());
    const double a0 = std::sqrt(2.0 * var);
    // Golden-section search over [0.7 a0, 1.3 a0].
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.7 * a0;
    double hi = 1.3 * a0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = ks_distance(sorted, x1);
    double f2 = ks_distance(sorted, x2);
    for (int it = 0; it < 60 && hi - lo > 1e-7 * a0; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = ks_distance(sorted, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = ks_distance(sorted, x2);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double estimate_amplitude(std::vector<double> centered, NormalizationMethod method) {
    require(centered.size() >= kMinNormalizeSamples, "normalization needs at least 1000 samples");
    const auto [mn, mx] = std::minmax_element(centered.begin(), centered.end());
    if (!(*mx > *mn)) throw DegenerateError("channel is constant; amplitude cannot be estimated");
    double a = 0.0;
    if (method == NormalizationMethod::percentile) {
        const double hi = quantile(centered, 0.999);
        const double lo = quantile(centered, 0.001);
        a = 0.5 * (hi - lo);
    } else if (method == NormalizationMethod::arcsine_fit) {
        a = fit_arcsine(std::move(centered));
    } else {
        throw ParameterError("fixed normalization does not estimate amplitudes");
    }
    if (!(a > 0.0)) throw DegenerateError("channel has no spread between its 0.1% and 99.9% quantiles");
    return a;
}

std::string_view to_string(NormalizationMethod method) {
    switch (method) {
        case NormalizationMethod::percentile: return "percentile";
        case NormalizationMethod::arcsine_fit: return "arcsine_fit";
        case NormalizationMethod::fixed: return "fixed";
    }
    return "";
}

NormalizationMethod parse_normalization(std::string_view name) {
    for (auto m : {NormalizationMethod::percentile, NormalizationMethod::arcsine_fit, NormalizationMethod::fixed}) {
        if (to_string(m) == name) return m;
    }
    throw ParameterError("unknown normalization '" + std::string(name) + "' (percentile, arcsine_fit or fixed)");
}

namespace {

NormalizedTrace center(const IQTrace& trace) {
    trace.validate();
    require(trace.size() >= kMinNormalizeSamples, "normalization needs at least 1000 samples per channel");
    NormalizedTrace out;
    out.trace = trace;
    out.offset_i = mean(trace.v_i);
    out.offset_q = mean(trace.v_q);
    for (double& x : out.trace.v_i) x -= out.offset_i;
    for (double& x : out.trace.v_q) x -= out.offset_q;
    return out;
}

void scale(NormalizedTrace& out) {
    for (double& x : out.trace.v_i) x /= out.amplitude_i;
    for (double& x : out.trace.v_q) x /= out.amplitude_q;
}

}  // namespace

NormalizedTrace normalize_iq(const IQTrace& trace, NormalizationMethod method) {
    require(method != NormalizationMethod::fixed, "fixed normalization needs the channel amplitudes");
    NormalizedTrace out = center(trace);
    out.amplitude_i = estimate_amplitude(out.trace.v_i, method);
    out.amplitude_q = estimate_amplitude(out.trace.v_q, method);
    scale(out);
    return out;
}

NormalizedTrace normalize_iq(const IQTrace& trace, double amplitude_i, double amplitude_q) {
    require(std::isfinite(amplitude_i) && amplitude_i > 0.0 && std::isfinite(amplitude_q) && amplitude_q > 0.0,
            "channel amplitudes must be positive");
    NormalizedTrace out = center(trace);
    out.amplitude_i = amplitude_i;
    out.amplitude_q = amplitude_q;
    scale(out);
    return out;
}

double reconstruct_phase(double v_i, double v_q) {
    if (v_i == 0.0 && v_q == 0.0) return 0.0;
    const double phi = std::atan2(v_q, v_i);
    // atan2 returns (-pi, pi]; +pi belongs to the left edge.
    return phi >= pi ? -pi : phi;
}

PhaseSeries reconstruct_phase(const IQTrace& trace) {
    require(trace.size() >= 1 && trace.v_i.size() == trace.v_q.size(),
            "trace must be nonempty with equal channel lengths");
    PhaseSeries out;
    out.phases.resize(trace.size());
    out.source_digest = trace.metadata.config_digest;
    std::size_t zeros = 0;
    const auto n = static_cast<std::int64_t>(trace.size());
#pragma omp parallel for schedule(static) reduction(+ : zeros)
    for (std::int64_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        if (trace.v_i[i] == 0.0 && trace.v_q[i] == 0.0) ++zeros;
        out.phases[i] = reconstruct_phase(trace.v_i[i], trace.v_q[i]);
    }
    out.zero_vector_count = zeros;
    return out;
}

std::uint16_t quantize_phase(double phi, int n) {
    const double delta = pi / std::ldexp(1.0, n - 1);
    const double x = std::floor((phi + pi) / delta);
    const double top = std::ldexp(1.0, n) - 1.0;
    if (!(x >= 0.0)) return 0;
    return static_cast<std::uint16_t>(std::min(x, top));
}

SymbolStream quantize_phase(const PhaseSeries& series, int n) {
    require(n >= 1 && n <= 16, "bits per symbol must lie in [1, 16]");
    SymbolStream out;
    out.bits_per_symbol = n;
    out.symbols.resize(series.size());
    const auto count = static_cast<std::int64_t>(series.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < count; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out.symbols[i] = quantize_phase(series.phases[i], n);
    }
    return out;
}

}  // namespace qrng
