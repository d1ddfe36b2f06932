#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qrng/optics.hpp"
#include "qrng/randomness_tests.hpp"
#include "qrng/reconstruction.hpp"
#include "qrng/stochastic.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng {

struct SimulationConfig {
    std::size_t sample_count = 1'000'000;
    double sample_rate = 200e6;  // Sa/s
    std::uint64_t seed = 1;
    NoiseSwitches noise = NoiseSwitches::all_on();
};

struct AnalysisConfig {
    int phase_bits = 10;
    std::size_t phase_bins = 256;    // KLD / phase histogram bins
    std::size_t voltage_bins = 256;  // I/Q histogram bins
    std::size_t max_lag = 50;
    NormalizationMethod normalization = NormalizationMethod::percentile;
    std::optional<double> amplitude_i;  // V, used by fixed normalization
    std::optional<double> amplitude_q;
};

struct ExtractionConfig {
    std::size_t n = 4000;
    std::optional<std::size_t> m;             // derived from the min-entropy rate when unset
    std::optional<double> min_entropy_rate;   // per bit; measured from the symbols when unset
    double epsilon = kDefaultEpsilon;
    ExtractionMode mode = ExtractionMode::lemma;
    std::optional<std::filesystem::path> seed_file;
    std::optional<std::uint64_t> seed;        // deterministic generator seed
};

struct ExperimentConfig {
    LaserParams laser;
    InterferometerParams interferometer;
    DetectorParams detector_i;
    DetectorParams detector_q;
    SimulationConfig simulation;
    AnalysisConfig analysis;
    ExtractionConfig extraction;
    TestConfig tests;

    /// The experimental values of the reference setup: 6 m delay, 6 ns
    /// coherence time, 0.14 mW, measured arm powers and noise levels,
    /// 200 MSa/s, n = 4000 / m = 3920.
    static ExperimentConfig reference_setup();

    void validate() const;

    /// Every field in a fixed order; the digest is computed over this text,
    /// and parsing it gives back an equal configuration.
    std::string canonical_text() const;
    std::uint64_t digest() const;
};

/// INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments (full-line, or after whitespace following a value). Keys not set keep the reference_setup() defaults. Unknown
/// sections or keys are errors. Relative seed_file paths resolve against
/// `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string format_digest(std::uint64_t digest);

}  // namespace qrng
