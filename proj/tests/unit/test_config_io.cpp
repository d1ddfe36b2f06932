#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/trace_io.hpp"

using namespace qrng;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("qrng_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                   ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

IQTrace sample_trace(std::size_t n) {
    IQTrace t;
    t.sample_rate = 200e6;
    t.adc_bits = 10;
    t.adc_fullscale = 1.0;
    t.metadata.config_digest = 0x0123456789abcdefULL;
    t.metadata.seed = 42;
    for (std::size_t k = 0; k < n; ++k) {
        t.v_i.push_back(static_cast<float>(0.6 * std::cos(0.37 * static_cast<double>(k))));
        t.v_q.push_back(static_cast<float>(-0.57 * std::sin(0.37 * static_cast<double>(k))));
    }
    return t;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ReferenceSetupValues) {
    const auto c = ExperimentConfig::reference_setup();
    EXPECT_DOUBLE_EQ(c.laser.coherence_time, 6e-9);
    EXPECT_DOUBLE_EQ(c.laser.mean_power, 1.4e-4);
    EXPECT_NEAR(c.interferometer.bs_transmittance, 0.514286, 1e-6);
    EXPECT_NEAR(c.interferometer.delay_loss, 0.569444, 1e-6);
    EXPECT_DOUBLE_EQ(c.interferometer.delay(), 1.5 * 6.0 / 299792458.0);
    EXPECT_EQ(c.simulation.sample_rate, 200e6);
    EXPECT_EQ(c.extraction.n, 4000u);
    EXPECT_EQ(c.extraction.mode, ExtractionMode::rate_only);
    EXPECT_FALSE(c.simulation.noise.drift);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseOverridesAndDefaults) {
    const auto c = parse_config(R"(
# comment
[laser]
linewidth = 50e6
[simulation]
sample_count = 1e4
sample_rate = 100e6
drift = on
; another comment
[extraction]
n = 64
m = 32
seed = 7
mode = lemma
[tests]
proportion_rule = fixed
enabled = monobit, runs
)");
    EXPECT_NEAR(c.laser.coherence_time, 1.0 / (std::numbers::pi * 50e6), 1e-20);
    EXPECT_EQ(c.simulation.sample_count, 10000u);
    EXPECT_EQ(c.simulation.sample_rate, 100e6);
    EXPECT_TRUE(c.simulation.noise.drift);
    EXPECT_EQ(c.extraction.m, 32u);
    EXPECT_EQ(c.extraction.seed, 7u);
    EXPECT_EQ(c.extraction.mode, ExtractionMode::lemma);
    EXPECT_EQ(c.tests.proportion_rule, ProportionRule::fixed);
    EXPECT_EQ(c.tests.enabled, (std::vector<std::string>{"monobit", "runs"}));
    // Untouched keys keep the reference values.
    EXPECT_DOUBLE_EQ(c.laser.mean_power, 1.4e-4);
    EXPECT_EQ(c.detector_i.electrical_noise_sigma, 7.666e-3);
}

TEST(Config, CanonicalRoundTripAndDigest) {
    auto c = ExperimentConfig::reference_setup();
    c.extraction.seed = 99;
    c.tests.enabled = {"serial"};
    const auto text = c.canonical_text();
    const auto back = parse_config(text);
    EXPECT_EQ(back.canonical_text(), text);
    EXPECT_EQ(back.digest(), c.digest());
    EXPECT_EQ(format_digest(c.digest()).size(), 16u);

    auto d = c;
    d.simulation.seed = 2;
    EXPECT_NE(d.digest(), c.digest());
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("[nope]\n"), ParameterError);
    EXPECT_THROW(parse_config("[laser]\ncolour = red\n"), ParameterError);
    EXPECT_THROW(parse_config("[simulation]\nseed = 1\nseed = 2\n"), ParameterError);
    EXPECT_THROW(parse_config("[laser]\nlinewidth = 5e7\ncoherence_time = 6e-9\n"), ParameterError);
    EXPECT_THROW(parse_config("[simulation]\nsample_rate = -1\n"), ParameterError);
    EXPECT_THROW(parse_config("[simulation]\nsample_count = lots\n"), ParameterError);
    EXPECT_THROW(parse_config("[extraction]\nmode = strict\n"), ParameterError);
    EXPECT_THROW(parse_config("[extraction]\nseed = 1\nseed_file = s.bin\n"), ParameterError);
    EXPECT_THROW(parse_config("[interferometer]\nbs_transmittance = 1.5\n"), ParameterError);

    const auto msg = error_of([] { parse_config("[laser]\n\nmean_power 3\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_THROW(parse_config("[laser\n"), FormatError);
    EXPECT_THROW(parse_config("mean_power = 1\n"), FormatError);
    EXPECT_THROW(parse_config("[laser]\nmean_power =\n"), FormatError);
}

#ifdef QRNG_CONFIG_DIR
TEST(Config, ShippedReferenceFileMatchesDefaults) {
    const auto c = load_config(fs::path(QRNG_CONFIG_DIR) / "reference.ini");
    EXPECT_EQ(c.canonical_text(), ExperimentConfig::reference_setup().canonical_text());
}
#endif

TEST(Config, TrailingComments) {
    const auto c = parse_config("[simulation]\nseed = 9   # run id\nsample_rate = 1e8 ; Sa/s\n");
    EXPECT_EQ(c.simulation.seed, 9u);
    EXPECT_EQ(c.simulation.sample_rate, 1e8);
}

TEST(Config, FixedNormalizationNeedsAmplitudes) {
    EXPECT_THROW(parse_config("[analysis]\nnormalization = fixed\n"), ParameterError);
    const auto c = parse_config("[analysis]\nnormalization = fixed\namplitude_i = 0.5955\namplitude_q = 0.5675\n");
    EXPECT_EQ(c.analysis.normalization, NormalizationMethod::fixed);
    EXPECT_EQ(parse_config(c.canonical_text()).canonical_text(), c.canonical_text());
}

TEST(Config, LoadResolvesSeedFile) {
    TempDir dir;
    write_text(dir / "run.ini", "[extraction]\nseed_file = seed.bin\n");
    const auto c = load_config(dir / "run.ini");
    ASSERT_TRUE(c.extraction.seed_file);
    EXPECT_EQ(*c.extraction.seed_file, dir / "seed.bin");
    EXPECT_THROW(load_config(dir / "missing.ini"), Error);
}

TEST(TraceIo, FormatNames) {
    EXPECT_EQ(parse_trace_format("binary"), TraceFormat::binary);
    EXPECT_EQ(parse_trace_format("csv"), TraceFormat::csv);
    EXPECT_THROW(parse_trace_format("hdf5"), ParameterError);
}

TEST(TraceIo, BinaryRoundTrip) {
    TempDir dir;
    const auto t = sample_trace(1000);
    write_trace_binary(dir / "t.iqt", t);
    EXPECT_EQ(fs::file_size(dir / "t.iqt"), kTraceHeaderSize + 1000 * 8);
    const auto back = read_trace_binary(dir / "t.iqt");
    EXPECT_EQ(back.v_i, t.v_i);
    EXPECT_EQ(back.v_q, t.v_q);
    EXPECT_EQ(back.sample_rate, t.sample_rate);
    EXPECT_EQ(back.adc_bits, t.adc_bits);
    EXPECT_EQ(back.adc_fullscale, t.adc_fullscale);
    EXPECT_EQ(back.metadata.config_digest, t.metadata.config_digest);
    EXPECT_EQ(back.metadata.seed, t.metadata.seed);
}

TEST(TraceIo, BinaryCorruption) {
    TempDir dir;
    write_trace_binary(dir / "t.iqt", sample_trace(100));
    std::string bytes;
    {
        std::ifstream in(dir / "t.iqt", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
    }
    write_text(dir / "trunc.iqt", bytes.substr(0, bytes.size() - 3));
    const auto msg = error_of([&] { read_trace_binary(dir / "trunc.iqt"); });
    EXPECT_NE(msg.find("800"), std::string::npos) << msg;
    EXPECT_THROW(read_trace_binary(dir / "trunc.iqt"), FormatError);

    write_text(dir / "short.iqt", bytes.substr(0, 20));
    EXPECT_THROW(read_trace_binary(dir / "short.iqt"), FormatError);

    std::string bad = bytes;
    bad[0] = 'X';
    write_text(dir / "magic.iqt", bad);
    EXPECT_THROW(read_trace_binary(dir / "magic.iqt"), FormatError);

    bad = bytes;
    bad[6] = 3;
    write_text(dir / "chan.iqt", bad);
    EXPECT_THROW(read_trace_binary(dir / "chan.iqt"), FormatError);
}

TEST(TraceIo, CsvRoundTrip) {
    TempDir dir;
    const auto t = sample_trace(500);
    write_trace_csv(dir / "t.csv", t);
    const auto back = read_trace_csv(dir / "t.csv");
    ASSERT_EQ(back.size(), t.size());
    // Nine significant digits identify each float exactly.
    for (std::size_t k = 0; k < t.size(); ++k) {
        ASSERT_EQ(static_cast<float>(back.v_i[k]), t.v_i[k]);
        ASSERT_EQ(static_cast<float>(back.v_q[k]), t.v_q[k]);
    }
    EXPECT_EQ(back.sample_rate, t.sample_rate);
    EXPECT_EQ(back.metadata.config_digest, t.metadata.config_digest);
}

TEST(TraceIo, CsvRejectsNonFinite) {
    TempDir dir;
    write_text(dir / "t.csv", "# sample_rate=1e6\nv_i,v_q\n0.1,0.2\nnan,0.3\n0.4,inf\n0.5,-0.6\n");
    std::size_t rejected = 0;
    const auto t = ingest_trace(dir / "t.csv", TraceFormat::csv, &rejected);
    EXPECT_EQ(rejected, 2u);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t.v_i[1], 0.5);
    EXPECT_EQ(t.metadata.source, TraceSource::ingested);
    EXPECT_EQ(t.sample_rate, 1e6);
}

TEST(TraceIo, CsvReportsBadLine) {
    TempDir dir;
    write_text(dir / "t.csv", "v_i,v_q\n0.1,0.2\n0.3,abc\n");
    const auto msg = error_of([&] { read_trace_csv(dir / "t.csv"); });
    EXPECT_NE(msg.find(":3"), std::string::npos) << msg;
    EXPECT_THROW(read_trace_csv(dir / "t.csv"), FormatError);
}

TEST(TraceIo, AtomicWrite) {
    TempDir dir;
    write_file_atomic(dir / "a.txt", "hello");
    write_file_atomic(dir / "a.txt", "world");
    std::ifstream in(dir / "a.txt");
    std::string s;
    in >> s;
    EXPECT_EQ(s, "world");
    EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
}
