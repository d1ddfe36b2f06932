#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"
#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/pipeline.hpp"

using namespace qrng;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qrng_pipe_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ExperimentConfig small_config() {
    auto c = ExperimentConfig::reference_setup();
    c.simulation.sample_count = 20000;
    c.extraction.seed = 5;
    c.tests.sequence_bits = 1000;
    c.tests.sequence_count = 10;
    c.tests.params.serial_m = 3;
    c.tests.params.approximate_entropy_m = 2;
    c.tests.params.block_frequency_m = 20;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PipelineOptions opts(const fs::path& dir, std::string_view stages) {
    PipelineOptions o;
    o.out_dir = dir;
    o.stages = parse_stages(stages);
    return o;
}

}  // namespace

TEST(Stages, Parsing) {
    EXPECT_EQ(parse_stages("all").size(), 5u);
    EXPECT_FALSE(parse_stages("all").count(Stage::ingest));
    EXPECT_EQ(parse_stages("simulate, extract"), (std::set<Stage>{Stage::simulate, Stage::extract}));
    EXPECT_THROW(parse_stages("simulate,fly"), ParameterError);
    EXPECT_EQ(to_string(Stage::analyze), "analyze");
}

TEST(Pipeline, FullRunThroughput) {
    const auto dir = fresh_dir("full");
    const auto r = run_pipeline(small_config(), opts(dir, "all"));
    ASSERT_TRUE(r.dims);
    EXPECT_EQ(r.dims->n, 4000u);
    EXPECT_EQ(r.dims->m, 3920u);
    EXPECT_DOUBLE_EQ(*r.bits_per_sample, 9.8);
    EXPECT_NEAR(*r.nominal_bit_rate, 1.96e9, 1.0);
    ASSERT_TRUE(r.tests_passed);
    for (const char* a : {artifact::trace, artifact::phases, artifact::hist_i, artifact::hist_q,
                          artifact::hist_phase, artifact::analysis, artifact::extracted, artifact::tests,
                          artifact::summary}) {
        EXPECT_TRUE(fs::exists(dir / a)) << a;
    }

    const auto digest = format_digest(small_config().digest());
    for (const char* a : {artifact::analysis, artifact::tests, artifact::summary}) {
        const auto doc = nlohmann::json::parse(slurp(dir / a));
        EXPECT_EQ(doc.at("config_digest"), digest) << a;
    }
    for (const char* a : {artifact::hist_i, artifact::hist_phase}) {
        EXPECT_NE(slurp(dir / a).find(digest), std::string::npos) << a;
    }
    const auto summary = nlohmann::json::parse(slurp(dir / artifact::summary));
    EXPECT_DOUBLE_EQ(summary.at("bits_per_sample").get<double>(), 9.8);

    const auto report = nlohmann::json::parse(slurp(dir / artifact::analysis));
    const double h = report.at("min_entropy").at("phase_bits").get<double>();
    EXPECT_GT(h, 9.0);
    EXPECT_LE(h, 10.0);
}

TEST(Pipeline, SimulateOnly) {
    const auto dir = fresh_dir("sim");
    const auto r = run_pipeline(small_config(), opts(dir, "simulate"));
    EXPECT_TRUE(fs::exists(dir / artifact::trace));
    EXPECT_FALSE(fs::exists(dir / artifact::analysis));
    EXPECT_FALSE(fs::exists(dir / artifact::extracted));
    EXPECT_FALSE(r.dims);
    const auto trace = read_trace_binary(dir / artifact::trace);
    EXPECT_EQ(trace.size(), 20000u);
    EXPECT_EQ(trace.metadata.config_digest, small_config().digest());
}

TEST(Pipeline, StagesAcrossInvocations) {
    const auto dir = fresh_dir("split");
    run_pipeline(small_config(), opts(dir, "simulate,reconstruct"));
    const auto r = run_pipeline(small_config(), opts(dir, "extract"));
    ASSERT_TRUE(r.dims);
    EXPECT_TRUE(fs::exists(dir / artifact::extracted));
}

TEST(Pipeline, MissingInputs) {
    const auto dir = fresh_dir("missing");
    EXPECT_THROW(run_pipeline(small_config(), opts(dir, "extract")), DependencyError);
    EXPECT_THROW(run_pipeline(small_config(), opts(dir, "analyze")), DependencyError);
    EXPECT_THROW(run_pipeline(small_config(), opts(dir, "test")), DependencyError);
    auto o = opts(dir, "ingest");
    EXPECT_THROW(run_pipeline(small_config(), o), DependencyError);
    o.stages = {Stage::simulate, Stage::ingest};
    o.input = dir / "x.iqt";
    EXPECT_THROW(run_pipeline(small_config(), o), ParameterError);
}

TEST(Pipeline, MissingSeed) {
    const auto dir = fresh_dir("noseed");
    auto c = small_config();
    c.extraction.seed.reset();
    EXPECT_THROW(run_pipeline(c, opts(dir, "simulate,reconstruct,extract")), ParameterError);
}

TEST(Pipeline, Deterministic) {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    run_pipeline(small_config(), opts(a, "simulate,reconstruct,extract"));
    run_pipeline(small_config(), opts(b, "simulate,reconstruct,extract"));
    EXPECT_EQ(slurp(a / artifact::extracted), slurp(b / artifact::extracted));
    EXPECT_EQ(slurp(a / artifact::trace), slurp(b / artifact::trace));

    auto other = small_config();
    other.simulation.seed = 2;
    const auto c = fresh_dir("det_c");
    run_pipeline(other, opts(c, "simulate,reconstruct,extract"));
    EXPECT_NE(slurp(a / artifact::extracted), slurp(c / artifact::extracted));
}

TEST(Pipeline, IngestCsv) {
    const auto src = fresh_dir("ingest_src");
    run_pipeline(small_config(), opts(src, "simulate"));
    auto trace = read_trace_binary(src / artifact::trace);
    write_trace_csv(src / "capture.csv", trace);

    const auto dir = fresh_dir("ingest");
    auto o = opts(dir, "ingest,reconstruct,analyze");
    o.input = src / "capture.csv";
    o.input_format = TraceFormat::csv;
    const auto r = run_pipeline(small_config(), o);
    EXPECT_TRUE(fs::exists(dir / artifact::analysis));
    EXPECT_EQ(read_trace_binary(dir / artifact::trace).size(), 20000u);
    (void)r;
}

TEST(BitFile, RoundTrip) {
    const auto dir = fresh_dir("bitfile");
    const BitStream bits({0xA5, 0x5A, 0xC0}, 18);
    write_bit_file(dir / "x.bin", bits, {40, 20}, 77);
    ToeplitzDims dims;
    std::uint64_t digest = 0;
    EXPECT_EQ(read_bit_file(dir / "x.bin", &dims, &digest), bits);
    EXPECT_EQ(dims.m, 20u);
    EXPECT_EQ(digest, 77u);
    std::ofstream(dir / "bad.bin") << "nope";
    EXPECT_THROW(read_bit_file(dir / "bad.bin"), FormatError);
}

#ifdef QRNG_CLI_PATH
namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QRNG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
    const auto dir = fresh_dir("cli");
    {
        std::ofstream ini(dir / "small.ini");
        ini << "[simulation]\nsample_count = 5000\n[extraction]\nseed = 3\n";
    }
    const std::string cfg = "-c " + (dir / "small.ini").string();
    const std::string out = " -o " + (dir / "run").string();
    EXPECT_EQ(run_cli("simulate " + cfg + out + " -q"), 0);
    EXPECT_EQ(run_cli("reconstruct " + cfg + out + " -q"), 0);
    EXPECT_EQ(run_cli("extract " + cfg + out + " -q"), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / artifact::extracted));

    EXPECT_EQ(run_cli("simulate --no-such-flag"), 2);
    EXPECT_EQ(run_cli("simulate " + cfg + " --seed notanumber" + out), 2);

    std::ofstream(dir / "bad.csv") << "v_i,v_q\n0.1,zz\n";
    EXPECT_EQ(run_cli("ingest " + cfg + " -i " + (dir / "bad.csv").string() + " -f csv -o " +
                      (dir / "ing").string()),
              3);
    EXPECT_EQ(run_cli("extract " + cfg + " -o " + (dir / "empty").string()), 4);

    {
        std::ofstream ini(dir / "starved.ini");
        ini << "[simulation]\nsample_count = 5000\n[extraction]\nseed = 3\nn = 64\nmode = lemma\n"
               "min_entropy_rate = 0.5\n";
    }
    EXPECT_EQ(run_cli("extract -c " + (dir / "starved.ini").string() + out), 5);
}
#endif
