#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qrng/errors.hpp"
#include "qrng/reconstruction.hpp"
#include "qrng/rng.hpp"

using namespace qrng;
using std::numbers::pi;

namespace {

IQTrace arcsine_trace(double amp_i, double amp_q, std::size_t n, std::uint64_t seed = 3) {
    const CounterRng rng(seed, 0);
    IQTrace t;
    t.sample_rate = 200e6;
    t.v_i.resize(n);
    t.v_q.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double phi = 2.0 * pi * rng.uniform(k) - pi;
        t.v_i[k] = amp_i * std::cos(phi) + 0.01;
        t.v_q[k] = amp_q * std::sin(phi) - 0.02;
    }
    return t;
}

}  // namespace

TEST(NormalizeIq, MeasuredAmplitudesBecomeUnit) {
    const auto t = arcsine_trace(0.5955, 0.5675, 200'000);
    for (auto method : {NormalizationMethod::percentile, NormalizationMethod::arcsine_fit}) {
        const auto n = normalize_iq(t, method);
        EXPECT_NEAR(n.amplitude_i, 0.5955, 0.01 * 0.5955);
        EXPECT_NEAR(n.amplitude_q, 0.5675, 0.01 * 0.5675);
        EXPECT_NEAR(n.offset_i, 0.01, 5e-3);
        EXPECT_NEAR(n.offset_q, -0.02, 5e-3);
        double max_i = 0.0;
        for (double v : n.trace.v_i) max_i = std::max(max_i, std::abs(v));
        EXPECT_NEAR(max_i, 1.0, 0.02);
    }
}

TEST(NormalizeIq, IdempotentOnUnitChannels) {
    const auto t = arcsine_trace(1.0, 1.0, 200'000);
    const auto once = normalize_iq(t);
    const auto twice = normalize_iq(once.trace);
    EXPECT_NEAR(twice.amplitude_i, 1.0, 0.01);
    EXPECT_NEAR(twice.amplitude_q, 1.0, 0.01);
}

TEST(NormalizeIq, RejectsDegenerateAndShort) {
    auto t = arcsine_trace(1.0, 1.0, 5000);
    std::fill(t.v_q.begin(), t.v_q.end(), 0.3);
    EXPECT_THROW(normalize_iq(t), DegenerateError);
    EXPECT_THROW(normalize_iq(arcsine_trace(1.0, 1.0, 999)), ParameterError);
}

TEST(NormalizeIq, FixedAmplitudes) {
    const auto t = arcsine_trace(0.5955, 0.5675, 20'000);
    const auto n = normalize_iq(t, 0.5955, 0.5675);
    EXPECT_EQ(n.amplitude_i, 0.5955);
    EXPECT_EQ(n.amplitude_q, 0.5675);
    for (std::size_t k = 0; k < t.size(); ++k) {
        ASSERT_NEAR(n.trace.v_i[k], (t.v_i[k] - n.offset_i) / 0.5955, 1e-15);
    }
    EXPECT_THROW(normalize_iq(t, NormalizationMethod::fixed), ParameterError);
    EXPECT_THROW(normalize_iq(t, 0.0, 1.0), ParameterError);
    EXPECT_EQ(parse_normalization("fixed"), NormalizationMethod::fixed);
    EXPECT_EQ(to_string(NormalizationMethod::arcsine_fit), "arcsine_fit");
    EXPECT_THROW(parse_normalization("max"), ParameterError);
}

TEST(ReconstructPhase, Examples) {
    EXPECT_EQ(reconstruct_phase(1.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(reconstruct_phase(0.0, 1.0), pi / 2);
    EXPECT_DOUBLE_EQ(reconstruct_phase(-1.0, -1.0), -3 * pi / 4);
    EXPECT_EQ(reconstruct_phase(-1.0, 0.0), -pi);
    EXPECT_EQ(reconstruct_phase(0.0, 0.0), 0.0);
}

TEST(ReconstructPhase, CountsZeroVectors) {
    IQTrace t;
    t.sample_rate = 1.0;
    t.v_i = {0.0, 1.0, 0.0, -0.0};
    t.v_q = {0.0, 1.0, 2.0, 0.0};
    const auto s = reconstruct_phase(t);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.zero_vector_count, 2u);
    EXPECT_EQ(s.phases[0], 0.0);
    EXPECT_EQ(s.phases[3], 0.0);
    EXPECT_DOUBLE_EQ(s.phases[1], pi / 4);
}

TEST(QuantizePhase, Examples) {
    EXPECT_EQ(quantize_phase(-pi, 10), 0);
    EXPECT_EQ(quantize_phase(0.0, 10), 512);
    EXPECT_EQ(quantize_phase(pi, 10), 1023);
    EXPECT_EQ(quantize_phase(std::nextafter(pi, 0.0), 10), 1023);
    EXPECT_EQ(quantize_phase(0.0, 1), 1);
    EXPECT_EQ(quantize_phase(-0.1, 1), 0);
}

TEST(QuantizePhase, RejectsBadWidth) {
    PhaseSeries s;
    s.phases = {0.0};
    EXPECT_THROW(quantize_phase(s, 0), ParameterError);
    EXPECT_THROW(quantize_phase(s, 17), ParameterError);
    EXPECT_NO_THROW(quantize_phase(s, 16));
}

TEST(QuantizePhase, UniformPhaseFillsBinsEvenly) {
    const CounterRng rng(12, 0);
    PhaseSeries s;
    const std::size_t n = 1'000'000;
    s.phases.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.phases[k] = 2.0 * pi * rng.uniform(k) - pi;
    const auto sym = quantize_phase(s, 10);
    EXPECT_EQ(sym.bits_per_symbol, 10);
    std::vector<double> counts(1024, 0.0);
    for (auto v : sym.symbols) counts[v] += 1.0;
    const double p = 1.0 / 1024.0;
    EXPECT_NEAR(p, 9.77e-4, 1e-6);
    const double sd = std::sqrt(p * (1 - p) / n);
    for (double c : counts) EXPECT_NEAR(c / n, p, 5.5 * sd);
}
