// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "qrng/entropy.hpp"
#include "qrng/optics.hpp"
#include "qrng/reference.hpp"
#include "qrng/rng.hpp"
#include "qrng/stochastic.hpp"
#include "qrng/toeplitz.hpp"

using namespace qrng;

namespace {

const LaserParams& laser() {
    static const auto l = LaserParams::from_coherence_time(6e-9, 1.4e-4, 7.855e-7);
    return l;
}

const double kDelay = delay_time(6.0, 1.5);
constexpr double kPeriod = 5e-9;
constexpr double kFineStep = 625e-12 / 8.0;

std::vector<double> uniform_values(std::size_t n) {
    const CounterRng rng(1, 0);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = -std::numbers::pi + 2 * std::numbers::pi * rng.uniform(i);
    return v;
}

BitStream random_bits(std::size_t n) {
    const CounterRng rng(2, Stream::reference_bits);
    BitStream b;
    b.reserve(n);
    for (std::size_t k = 0; k < n; k += 64) b.append_msb(rng.bits64(k / 64), 64);
    return b;
}

void BM_PhasePath(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(sample_phase_path(laser(), kDelay, kPeriod, n, 1, kFineStep));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PhasePathSerial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    for (auto _ : st) {
        benchmark::DoNotOptimize(reference::sample_phase_path(laser(), kDelay, kPeriod, n, 1, kFineStep));
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool kParallel>
void BM_Trace(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto path = sample_phase_path(laser(), kDelay, kPeriod, n, 1, kFineStep);
    InterferometerParams ifm;
    DetectorParams det;
    det.electrical_noise_sigma = 7.666e-3;
    const auto noise = NoiseSwitches::all_on();
    for (auto _ : st) {
        if constexpr (kParallel) {
            benchmark::DoNotOptimize(simulate_trace(path, laser(), ifm, det, det, noise, 3));
        } else {
            benchmark::DoNotOptimize(reference::simulate_trace(path, laser(), ifm, det, det, noise, 3));
        }
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool kParallel>
void BM_Toeplitz(benchmark::State& st) {
    const auto blocks = static_cast<std::size_t>(st.range(0));
    const ToeplitzSpec spec(4000, 3920, deterministic_seed(4000, 3920, 1));
    const auto in = random_bits(blocks * 4000);
    for (auto _ : st) {
        if constexpr (kParallel) {
            benchmark::DoNotOptimize(extract(in, spec));
        } else {
            benchmark::DoNotOptimize(reference::toeplitz_extract(in, spec));
        }
    }
    st.SetBytesProcessed(st.iterations() * st.range(0) * 500);
}

template <bool kParallel>
void BM_Histogram(benchmark::State& st) {
    const auto v = uniform_values(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        if constexpr (kParallel) {
            benchmark::DoNotOptimize(make_histogram(v, -std::numbers::pi, std::numbers::pi, 256));
        } else {
            benchmark::DoNotOptimize(reference::make_histogram(v, -std::numbers::pi, std::numbers::pi, 256));
        }
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool kParallel>
void BM_Autocorrelation(benchmark::State& st) {
    const auto v = uniform_values(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        if constexpr (kParallel) {
            benchmark::DoNotOptimize(autocorrelation(v, 50));
        } else {
            benchmark::DoNotOptimize(reference::autocorrelation(v, 50));
        }
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_PhasePath)->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhasePathSerial)->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trace<true>)->Name("BM_Trace")->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trace<false>)->Name("BM_TraceSerial")->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Toeplitz<true>)->Name("BM_Toeplitz")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Toeplitz<false>)->Name("BM_ToeplitzSerial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histogram<true>)->Name("BM_Histogram")->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histogram<false>)->Name("BM_HistogramSerial")->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Autocorrelation<true>)->Name("BM_Autocorrelation")->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Autocorrelation<false>)->Name("BM_AutocorrelationSerial")->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
