// qrng: command-line front end for the phase-reconstruction pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/pipeline.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kGeneric = 1,
    kParameter = 2,
    kFormat = 3,
    kDependency = 4,
    kInsufficientEntropy = 5,
};

struct Args {
    std::string config;
    std::string out = "out";
    std::string stages;
    std::string input;
    std::string format = "binary";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> extractor_seed;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Args& a) {
    cmd->add_option("-c,--config", a.config, "Experiment config (INI); reference setup when omitted");
    cmd->add_option("-o,--out", a.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", a.seed, "Override simulation.seed");
    cmd->add_option("--extractor-seed", a.extractor_seed, "Override extraction.seed");
    cmd->add_flag("-q,--quiet", a.quiet, "Suppress the summary on stdout");
}

int run(const Args& a, const std::set<qrng::Stage>& stages) {
    qrng::ExperimentConfig cfg = a.config.empty() ? qrng::ExperimentConfig::reference_setup() : qrng::load_config(a.config);
    if (a.seed) cfg.simulation.seed = *a.seed;
    if (a.extractor_seed) {
        cfg.extraction.seed = *a.extractor_seed;
        cfg.extraction.seed_file.reset();
    }
    cfg.validate();

    qrng::PipelineOptions opt;
    opt.out_dir = a.out;
    opt.stages = stages;
    if (!a.input.empty()) opt.input = a.input;
    opt.input_format = qrng::parse_trace_format(a.format);

    const qrng::PipelineResult r = qrng::run_pipeline(cfg, opt);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    if (!a.quiet) {
        std::cout << "config digest " << qrng::format_digest(r.config_digest) << '\n';
        for (const auto& [name, path] : r.artifacts) std::cout << "  wrote " << path.string() << '\n';
        if (r.bits_per_sample) {
            std::printf("bits/sample %.4g, nominal rate %.4g bit/s\n", *r.bits_per_sample, *r.nominal_bit_rate);
        }
        if (r.tests_passed) std::cout << "test battery: " << (*r.tests_passed ? "pass" : "FAIL") << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-reconstruction QRNG simulator and post-processing pipeline"};
    app.require_subcommand(1);
    Args a;

    auto* sim = app.add_subcommand("simulate", "Simulate an I/Q trace");
    auto* ing = app.add_subcommand("ingest", "Import a captured I/Q trace");
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct and quantize the phase");
    auto* ana = app.add_subcommand("analyze", "Histograms, min-entropy, KLD, autocorrelation");
    auto* ext = app.add_subcommand("extract", "Toeplitz extraction");
    auto* tst = app.add_subcommand("test", "Run the statistical test battery");
    auto* pip = app.add_subcommand("pipeline", "Run several stages in order");
    for (auto* cmd : {sim, ing, rec, ana, ext, tst, pip}) add_common(cmd, a);
    ing->add_option("-i,--input", a.input, "Trace file to ingest")->required();
    ing->add_option("-f,--format", a.format, "binary or csv")->capture_default_str();
    pip->add_option("-s,--stages", a.stages, "Comma-separated stages, or 'all'")->default_val("all");
    pip->add_option("-i,--input", a.input, "Trace file for the ingest stage");
    pip->add_option("-f,--format", a.format, "binary or csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kParameter;
    }

    try {
        std::set<qrng::Stage> stages;
        if (*sim) stages = {qrng::Stage::simulate};
        if (*ing) stages = {qrng::Stage::ingest};
        if (*rec) stages = {qrng::Stage::reconstruct};
        if (*ana) stages = {qrng::Stage::analyze};
        if (*ext) stages = {qrng::Stage::extract};
        if (*tst) stages = {qrng::Stage::test};
        if (*pip) stages = qrng::parse_stages(a.stages);
        return run(a, stages);
    } catch (const qrng::InsufficientEntropyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInsufficientEntropy;
    } catch (const qrng::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParameter;
    } catch (const qrng::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFormat;
    } catch (const qrng::DependencyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDependency;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kGeneric;
    }
}
