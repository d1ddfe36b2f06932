#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/bitstream.hpp"

namespace qrng {

/// Per-test parameters; defaults follow the public suite's recommendations.
struct TestParams {
    std::size_t block_frequency_m = 128;
    unsigned serial_m = 16;
    unsigned approximate_entropy_m = 10;
};

/// A registered statistical test. `run` returns one p-value per entry of
/// `subtests` and throws LengthError when the input is too short.
struct TestDefinition {
    std::string name;
    std::vector<std::string> subtests;
    std::size_t min_bits = 100;
    std::function<std::vector<double>(std::span<const std::uint8_t>, const TestParams&)> run;
};

class TestRegistry {
public:
    void add(TestDefinition def);
    const TestDefinition& find(std::string_view name) const;
    bool contains(std::string_view name) const;
    const std::vector<TestDefinition>& tests() const noexcept { return tests_; }

    /// The eight implemented tests.
    static const TestRegistry& builtin();

private:
    std::vector<TestDefinition> tests_;
};

enum class TestName {
    monobit,
    block_frequency,
    runs,
    longest_run,
    cumulative_sums,
    serial,
    approximate_entropy,
    dft_spectral,
};

std::string_view to_string(TestName name);

/// Tests of the 15-test suite that this battery does not implement; listed in
/// every report.
const std::vector<std::string>& unimplemented_tests();

std::vector<double> run_test(TestName name, const BitStream& bits, const TestParams& params = {});
std::vector<double> run_test(std::string_view name, const BitStream& bits, const TestParams& params = {});

enum class ProportionRule {
    confidence_band,  // (1 - alpha) - 3 sqrt(alpha (1 - alpha) / N)
    fixed,            // fixed_threshold
};

struct TestConfig {
    std::size_t sequence_bits = 1'000'000;
    std::size_t sequence_count = 100;
    double alpha = 0.01;
    ProportionRule proportion_rule = ProportionRule::confidence_band;
    double fixed_threshold = 0.98;
    double uniformity_threshold = 1e-4;
    TestParams params;
    std::vector<std::string> enabled;  // empty = every registered test

    void validate() const;
    /// Fixed thresholds: proportion > 0.98 and uniformity p > 1e-4.
    static TestConfig fixed_rule();
};

struct SubtestResult {
    std::string name;
    std::vector<double> p_values;  // one per sequence, in sequence order
    double uniformity_p = 0.0;
    double proportion = 0.0;
    double proportion_bound = 0.0;
    bool passed = false;
};

struct TestResult {
    std::string name;
    std::vector<SubtestResult> subtests;
    bool passed = false;
};

struct TestReport {
    std::vector<TestResult> tests;  // sorted by name
    std::vector<std::string> not_implemented;
    std::size_t sequence_count = 0;
    std::size_t sequence_bits = 0;
    bool passed = false;
};

/// Run the enabled tests over every sequence (sequences in parallel).
TestReport run_battery(std::span<const BitStream> sequences, const TestConfig& config,
                       const TestRegistry& registry = TestRegistry::builtin());

/// Chi-square uniformity of p-values over ten equal bins (igamc(9/2, chi2/2)).
double pvalue_uniformity(std::span<const double> p_values);

/// Raw statistics without the suite's minimum-length gates; for small
/// worked examples. `bits` holds one 0/1 value per element.
namespace stat {

double monobit(std::span<const std::uint8_t> bits);
double block_frequency(std::span<const std::uint8_t> bits, std::size_t m);
double runs(std::span<const std::uint8_t> bits);
double longest_run(std::span<const std::uint8_t> bits);
std::array<double, 2> cumulative_sums(std::span<const std::uint8_t> bits);  // forward, reverse
std::array<double, 2> serial(std::span<const std::uint8_t> bits, unsigned m);
double approximate_entropy(std::span<const std::uint8_t> bits, unsigned m);
double dft_spectral(std::span<const std::uint8_t> bits);

}  // namespace stat

namespace special {

/// Regularized upper incomplete gamma Q(a, x).
double igamc(double a, double x);
double erfc(double x);
double normal_cdf(double x);

}  // namespace special

}  // namespace qrng
