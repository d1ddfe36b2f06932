#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qrng/errors.hpp"
#include "qrng/randomness_tests.hpp"
#include "qrng/rng.hpp"

using namespace qrng;

namespace {

std::vector<std::uint8_t> parse(const std::string& s) {
    std::vector<std::uint8_t> v;
    for (char c : s) v.push_back(c == '1' ? 1 : 0);
    return v;
}

BitStream random_stream(std::size_t n, std::uint64_t seed, std::uint64_t sub = 0) {
    const CounterRng rng = CounterRng(seed, Stream::reference_bits).split(sub);
    BitStream out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; k += 64) {
        out.append_msb(rng.bits64(k / 64), static_cast<unsigned>(std::min<std::size_t>(64, n - k)));
    }
    return out;
}

constexpr double kTol = 1e-6;

}  // namespace

TEST(Statistics, WorkedExamples) {
    EXPECT_NEAR(stat::monobit(parse("1011010101")), 0.527089, kTol);
    EXPECT_NEAR(stat::block_frequency(parse("0110011010"), 3), 0.801252, kTol);
    EXPECT_NEAR(stat::runs(parse("1001101011")), 0.147232, kTol);
    EXPECT_NEAR(stat::cumulative_sums(parse("1011010111"))[0], 0.4116588, kTol);
    const auto serial = stat::serial(parse("0011011101"), 3);
    EXPECT_NEAR(serial[0], 0.808792, kTol);
    EXPECT_NEAR(serial[1], 0.670320, kTol);
    EXPECT_NEAR(stat::approximate_entropy(parse("0100110101"), 3), 0.261961, kTol);
    // |X_j| for j < 5 is {0, 2, 4.47, 2, 4.47}; all five fall under sqrt(10 ln 20),
    // so N1 = 5 and d = 0.25 / sqrt(10 * 0.95 * 0.05 / 4).
    EXPECT_NEAR(stat::dft_spectral(parse("1001010011")), 0.46815990985442807, 1e-12);
    EXPECT_NEAR(stat::longest_run(parse("11001100000101010110110001001100111000000000001001001101010100010001001111"
                                        "010110100000001101011111001100111001101101100010110010")),
                0.180609, kTol);
}

TEST(Statistics, MonobitExtremes) {
    const std::vector<std::uint8_t> ones(100, 1);
    EXPECT_NEAR(stat::monobit(ones), std::erfc(10.0 / std::numbers::sqrt2), 1e-15);
    std::vector<std::uint8_t> alt(100);
    for (std::size_t k = 0; k < alt.size(); ++k) alt[k] = k % 2;
    EXPECT_DOUBLE_EQ(stat::monobit(alt), 1.0);
}

TEST(Statistics, RunsPrerequisite) {
    // Proportion of ones far from 1/2: the runs test reports 0.
    std::vector<std::uint8_t> skew(200, 1);
    for (std::size_t k = 0; k < 20; ++k) skew[k * 10] = 0;
    EXPECT_EQ(stat::runs(skew), 0.0);
}

TEST(Special, Identities) {
    EXPECT_NEAR(special::igamc(2.0, 1.0), 2.0 / std::numbers::e, 1e-10);
    EXPECT_NEAR(special::igamc(3.0, 2.0), 5.0 * std::exp(-2.0), 1e-10);
    for (double x : {0.01, 0.3, 1.0, 4.0, 12.0}) {
        EXPECT_NEAR(special::igamc(0.5, x), std::erfc(std::sqrt(x)), 1e-10) << x;
    }
    EXPECT_NEAR(special::erfc(1.0), 0.15729920705028513, 1e-10);
    EXPECT_NEAR(special::erfc(0.5), 0.4795001221869535, 1e-10);
    EXPECT_NEAR(special::erfc(2.0), 0.004677734981047266, 1e-10);
    EXPECT_NEAR(special::normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(special::normal_cdf(1.0) + special::normal_cdf(-1.0), 1.0, 1e-15);
}

TEST(Registry, BuiltinContents) {
    const auto& reg = TestRegistry::builtin();
    EXPECT_EQ(reg.tests().size(), 8u);
    for (auto n : {TestName::monobit, TestName::block_frequency, TestName::runs, TestName::longest_run,
                   TestName::cumulative_sums, TestName::serial, TestName::approximate_entropy,
                   TestName::dft_spectral}) {
        EXPECT_TRUE(reg.contains(to_string(n))) << to_string(n);
    }
    EXPECT_EQ(reg.find("serial").subtests.size(), 2u);
    EXPECT_EQ(reg.find("cumulative-sums").subtests.size(), 2u);
    EXPECT_THROW(reg.find("universal"), ParameterError);
    EXPECT_EQ(unimplemented_tests().size(), 7u);
    EXPECT_EQ(reg.tests().size() + unimplemented_tests().size(), 15u);
}

TEST(Registry, CustomTests) {
    TestRegistry reg;
    reg.add({"always-half", {"always-half"}, 10, [](auto, const TestParams&) { return std::vector<double>{0.5}; }});
    EXPECT_THROW(reg.add({"always-half", {"x"}, 10, [](auto, const TestParams&) { return std::vector<double>{}; }}),
                 ParameterError);
    EXPECT_THROW(reg.add({"", {"x"}, 10, nullptr}), ParameterError);

    TestConfig cfg;
    cfg.enabled = {"always-half"};
    const std::vector<BitStream> seqs(10, random_stream(100, 1));
    const auto report = run_battery(seqs, cfg, reg);
    ASSERT_EQ(report.tests.size(), 1u);
    EXPECT_DOUBLE_EQ(report.tests[0].subtests[0].proportion, 1.0);
    // Every p-value in one bin.
    EXPECT_LT(report.tests[0].subtests[0].uniformity_p, 1e-4);
    EXPECT_FALSE(report.passed);
}

TEST(RunTest, LengthGates) {
    EXPECT_THROW(run_test(TestName::monobit, random_stream(99, 1)), LengthError);
    EXPECT_NO_THROW(run_test(TestName::monobit, random_stream(100, 1)));
    EXPECT_THROW(run_test(TestName::longest_run, random_stream(127, 1)), LengthError);
    EXPECT_THROW(run_test(TestName::dft_spectral, random_stream(999, 1)), LengthError);
    // Serial with m = 16 needs floor(log2 n) > 18.
    EXPECT_THROW(run_test(TestName::serial, random_stream(100000, 1)), LengthError);
    TestParams small;
    small.serial_m = 3;
    small.approximate_entropy_m = 2;
    EXPECT_EQ(run_test(TestName::serial, random_stream(1000, 1), small).size(), 2u);
    EXPECT_EQ(run_test("approximate-entropy", random_stream(1000, 1), small).size(), 1u);
    EXPECT_THROW(run_test("no-such-test", random_stream(1000, 1)), ParameterError);
}

TEST(Battery, ValidationAndErrors) {
    TestConfig cfg;
    const std::vector<BitStream> mixed{random_stream(1000, 1), random_stream(1001, 2)};
    EXPECT_THROW(run_battery(mixed, cfg), ParameterError);
    EXPECT_THROW(run_battery(std::span<const BitStream>(), cfg), ParameterError);
    cfg.alpha = 0.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Battery, AllZeroSequencesFail) {
    TestConfig cfg;
    cfg.enabled = {"monobit", "runs"};
    const std::vector<BitStream> seqs(20, BitStream(std::vector<std::uint8_t>(125, 0), 1000));
    const auto report = run_battery(seqs, cfg);
    ASSERT_EQ(report.tests.size(), 2u);
    EXPECT_EQ(report.tests[0].name, "monobit");
    EXPECT_DOUBLE_EQ(report.tests[0].subtests[0].proportion, 0.0);
    EXPECT_FALSE(report.tests[0].passed);
    EXPECT_FALSE(report.passed);
    EXPECT_EQ(report.not_implemented.size(), 7u);
}

TEST(Battery, FixedRuleBound) {
    const auto cfg = TestConfig::fixed_rule();
    EXPECT_EQ(cfg.proportion_rule, ProportionRule::fixed);
    std::vector<BitStream> seqs;
    for (std::uint64_t s = 0; s < 10; ++s) seqs.push_back(random_stream(1000, 5, s));
    auto c = cfg;
    c.enabled = {"monobit"};
    const auto report = run_battery(seqs, c);
    EXPECT_DOUBLE_EQ(report.tests[0].subtests[0].proportion_bound, 0.98);

    TestConfig band;
    band.enabled = {"monobit"};
    const auto r2 = run_battery(seqs, band);
    EXPECT_NEAR(r2.tests[0].subtests[0].proportion_bound, 0.99 - 3.0 * std::sqrt(0.01 * 0.99 / 10.0), 1e-15);
}

TEST(Battery, GoodGeneratorPasses) {
    TestConfig cfg;
    cfg.params.block_frequency_m = 64;
    cfg.params.serial_m = 5;
    cfg.params.approximate_entropy_m = 4;
    std::vector<BitStream> seqs;
    for (std::uint64_t s = 0; s < 50; ++s) seqs.push_back(random_stream(8192, 11, s));
    const auto report = run_battery(seqs, cfg);
    EXPECT_EQ(report.tests.size(), 8u);
    for (std::size_t k = 1; k < report.tests.size(); ++k) {
        EXPECT_LT(report.tests[k - 1].name, report.tests[k].name);
    }
    for (const auto& t : report.tests) {
        for (const auto& s : t.subtests) {
            EXPECT_TRUE(s.passed) << s.name << " proportion " << s.proportion << " uniformity " << s.uniformity_p;
            for (double p : s.p_values) {
                ASSERT_GE(p, 0.0);
                ASSERT_LE(p, 1.0);
            }
        }
    }
    EXPECT_TRUE(report.passed);
}

TEST(Battery, NullRejectionRate) {
    std::size_t monobit_rejects = 0;
    std::size_t runs_rejects = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto bits = random_stream(1000, 21, s).to_bits();
        if (stat::monobit(bits) < 0.01) ++monobit_rejects;
        if (stat::runs(bits) < 0.01) ++runs_rejects;
    }
    // Binomial(1000, 0.01): mean 10, sd 3.1.
    EXPECT_LE(monobit_rejects, 25u);
    EXPECT_LE(runs_rejects, 25u);
    EXPECT_GE(monobit_rejects + runs_rejects, 4u);
}

TEST(Uniformity, Examples) {
    std::vector<double> flat;
    for (int k = 0; k < 100; ++k) flat.push_back((k + 0.5) / 100.0);
    EXPECT_NEAR(pvalue_uniformity(flat), 1.0, 1e-12);
    EXPECT_THROW(pvalue_uniformity({}), ParameterError);
}
