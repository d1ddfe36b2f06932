#include "qrng/pipeline.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/reconstruction.hpp"

namespace qrng {

using json = nlohmann::ordered_json;
using detail::require;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const fs::path& path, const json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::simulate: return "simulate";
        case Stage::ingest: return "ingest";
        case Stage::reconstruct: return "reconstruct";
        case Stage::analyze: return "analyze";
        case Stage::extract: return "extract";
        case Stage::test: return "test";
    }
    return "";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::simulate, Stage::ingest, Stage::reconstruct, Stage::analyze, Stage::extract,
                    Stage::test}) {
        if (to_string(s) == name) return s;
    }
    throw ParameterError("unknown stage '" + std::string(name) + "'");
}

std::set<Stage> parse_stages(std::string_view list) {
    std::set<Stage> out;
    std::stringstream ss{std::string(list)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        if (item == "all") {
            out.insert({Stage::simulate, Stage::reconstruct, Stage::analyze, Stage::extract, Stage::test});
        } else {
            out.insert(parse_stage(item));
        }
    }
    require(!out.empty(), "no stages selected");
    return out;
}

void write_phase_file(const fs::path& path, const PhaseSeries& phases, const SymbolStream& symbols,
                      std::uint64_t digest) {
    require(phases.size() == symbols.size(), "phase and symbol counts differ");
    std::string buf;
    buf.reserve(32 + phases.size() * 10);
    buf.append("PHS1", 4);
    put<std::uint8_t>(buf, 1);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(symbols.bits_per_symbol));
    put<std::uint16_t>(buf, 0);
    put<std::uint64_t>(buf, digest);
    put<std::uint64_t>(buf, phases.size());
    put<std::uint64_t>(buf, phases.zero_vector_count);
    for (double p : phases.phases) put<double>(buf, p);
    for (std::uint16_t s : symbols.symbols) put<std::uint16_t>(buf, s);
    write_file_atomic(path, buf);
}

void read_phase_file(const fs::path& path, PhaseSeries& phases, SymbolStream& symbols) {
    const std::string buf = read_all(path);
    const std::string name = path.string();
    if (buf.size() < 32) throw FormatError(name + ": truncated header");
    if (buf.compare(0, 4, "PHS1") != 0) throw FormatError(name + ": bad magic at byte 0");
    if (get<std::uint8_t>(buf, 4) != 1) throw FormatError(name + ": unsupported version at byte 4");
    symbols.bits_per_symbol = get<std::uint8_t>(buf, 5);
    phases.source_digest = get<std::uint64_t>(buf, 8);
    const auto count = get<std::uint64_t>(buf, 16);
    phases.zero_vector_count = get<std::uint64_t>(buf, 24);
    if (count > buf.size() || buf.size() - 32 != count * 10) {
        throw FormatError(name + ": payload holds " + std::to_string(buf.size() - 32) + " bytes, expected " +
                          std::to_string(count * 10));
    }
    phases.phases.resize(count);
    symbols.symbols.resize(count);
    for (std::size_t k = 0; k < count; ++k) phases.phases[k] = get<double>(buf, 32 + 8 * k);
    const std::size_t sym0 = 32 + 8 * count;
    for (std::size_t k = 0; k < count; ++k) symbols.symbols[k] = get<std::uint16_t>(buf, sym0 + 2 * k);
}

void write_bit_file(const fs::path& path, const BitStream& bits, ToeplitzDims dims, std::uint64_t digest) {
    std::string buf;
    buf.append("XBT1", 4);
    put<std::uint8_t>(buf, 1);
    buf.append(3, '\0');
    put<std::uint64_t>(buf, digest);
    put<std::uint64_t>(buf, dims.n);
    put<std::uint64_t>(buf, dims.m);
    put<std::uint64_t>(buf, bits.size());
    buf.append(reinterpret_cast<const char*>(bits.bytes().data()), bits.bytes().size());
    write_file_atomic(path, buf);
}

BitStream read_bit_file(const fs::path& path, ToeplitzDims* dims, std::uint64_t* digest) {
    std::string buf = read_all(path);
    const std::string name = path.string();
    if (buf.size() < 40) throw FormatError(name + ": truncated header");
    if (buf.compare(0, 4, "XBT1") != 0) throw FormatError(name + ": bad magic at byte 0");
    if (get<std::uint8_t>(buf, 4) != 1) throw FormatError(name + ": unsupported version at byte 4");
    if (digest) *digest = get<std::uint64_t>(buf, 8);
    if (dims) *dims = {get<std::uint64_t>(buf, 16), get<std::uint64_t>(buf, 24)};
    const auto bit_length = get<std::uint64_t>(buf, 32);
    const std::size_t bytes = buf.size() - 40;
    if (bit_length / 8 + (bit_length % 8 != 0) != bytes) {
        throw FormatError(name + ": payload holds " + std::to_string(bytes) + " bytes for " +
                          std::to_string(bit_length) + " bits");
    }
    std::vector<std::uint8_t> data(buf.begin() + 40, buf.end());
    return BitStream(std::move(data), bit_length);
}

namespace {

json histogram_json(const Histogram& h) {
    return {{"bins", h.bins()}, {"lo", h.edges.front()}, {"hi", h.edges.back()}, {"total", h.total},
            {"outside", h.outside}};
}

void write_histogram_csv(const fs::path& path, const Histogram& h, const ReferenceLaw& ref,
                         std::uint64_t digest) {
    std::ostringstream o;
    o.precision(12);
    o << "# config_digest=" << format_digest(digest) << '\n';
    o << "bin_center,count,reference_density\n";
    const auto centers = h.centers();
    for (std::size_t b = 0; b < h.bins(); ++b) {
        o << centers[b] << ',' << h.counts[b] << ',' << reference_pdf(ref, centers[b]) << '\n';
    }
    write_file_atomic(path, o.str());
}

class Runner {
public:
    Runner(const ExperimentConfig& cfg, const PipelineOptions& opt)
        : cfg_(cfg), opt_(opt), digest_(cfg.digest()) {
        result_.config_digest = digest_;
    }

    PipelineResult run() {
        require(!opt_.stages.empty(), "no stages selected");
        require(!(opt_.stages.contains(Stage::simulate) && opt_.stages.contains(Stage::ingest)),
                "choose either simulate or ingest, not both");
        fs::create_directories(opt_.out_dir);
        for (Stage s : {Stage::simulate, Stage::ingest, Stage::reconstruct, Stage::analyze, Stage::extract,
                        Stage::test}) {
            if (!opt_.stages.contains(s)) continue;
            switch (s) {
                case Stage::simulate: simulate(); break;
                case Stage::ingest: ingest(); break;
                case Stage::reconstruct: reconstruct(); break;
                case Stage::analyze: analyze(); break;
                case Stage::extract: extract(); break;
                case Stage::test: test(); break;
            }
            result_.stages_run.push_back(s);
        }
        summarize();
        return result_;
    }

private:
    fs::path at(const char* name) const { return opt_.out_dir / name; }

    void need(Stage stage, const char* name, const char* producer) const {
        if (!fs::exists(at(name))) {
            throw DependencyError("stage '" + std::string(to_string(stage)) + "' needs " + at(name).string() +
                                  " (produced by '" + producer + "')");
        }
    }

    void record(const char* name) { result_.artifacts[name] = at(name); }

    void check_digest(std::uint64_t found, const char* name) {
        if (found != digest_) {
            result_.warnings.push_back(std::string(name) + " was produced under config digest " +
                                       format_digest(found) + ", current config is " + format_digest(digest_));
        }
    }

    void simulate() {
        const auto& s = cfg_.simulation;
        const double ts = 1.0 / s.sample_rate;
        const double max_step = s.noise.bandwidth ? cfg_.detector_i.response_time / 8.0 : 0.0;
        const TimingReport timing =
            validate_timing(cfg_.laser, cfg_.interferometer, cfg_.detector_i, s.sample_rate);
        for (const auto& w : timing.warnings) result_.warnings.push_back(w);
        const PhasePath path =
            sample_phase_path(cfg_.laser, cfg_.interferometer.delay(), ts, s.sample_count, s.seed, max_step);
        IQTrace trace = simulate_trace(path, cfg_.laser, cfg_.interferometer, cfg_.detector_i, cfg_.detector_q,
                                       s.noise, s.seed);
        if (trace.metadata.clamped_power_draws > 0) {
            result_.warnings.push_back(std::to_string(trace.metadata.clamped_power_draws) +
                                       " power draws were clamped at zero");
        }
        trace.metadata.config_digest = digest_;
        write_trace_binary(at(artifact::trace), trace);
        record(artifact::trace);
        sample_rate_ = trace.sample_rate;
    }

    void ingest() {
        if (!opt_.input) throw DependencyError("stage 'ingest' needs an input trace file");
        std::size_t rejected = 0;
        IQTrace trace = ingest_trace(*opt_.input, opt_.input_format, &rejected);
        if (rejected > 0) result_.warnings.push_back(std::to_string(rejected) + " non-finite rows rejected");
        trace.metadata.config_digest = digest_;
        write_trace_binary(at(artifact::trace), trace);
        record(artifact::trace);
        sample_rate_ = trace.sample_rate;
    }

    NormalizedTrace normalize(const IQTrace& trace) const {
        const auto& a = cfg_.analysis;
        if (a.normalization == NormalizationMethod::fixed) return normalize_iq(trace, *a.amplitude_i, *a.amplitude_q);
        return normalize_iq(trace, a.normalization);
    }

    IQTrace load_trace(Stage stage) {
        need(stage, artifact::trace, "simulate or ingest");
        IQTrace t = read_trace_binary(at(artifact::trace));
        check_digest(t.metadata.config_digest, artifact::trace);
        sample_rate_ = t.sample_rate;
        return t;
    }

    void reconstruct() {
        const IQTrace trace = load_trace(Stage::reconstruct);
        const NormalizedTrace norm = normalize(trace);
        PhaseSeries phases = reconstruct_phase(norm.trace);
        phases.source_digest = digest_;
        if (phases.zero_vector_count > 0) {
            result_.warnings.push_back(std::to_string(phases.zero_vector_count) + " samples had (0, 0) I/Q");
        }
        const SymbolStream symbols = quantize_phase(phases, cfg_.analysis.phase_bits);
        write_phase_file(at(artifact::phases), phases, symbols, digest_);
        record(artifact::phases);
    }

    void analyze() {
        const IQTrace trace = load_trace(Stage::analyze);
        need(Stage::analyze, artifact::phases, "reconstruct");
        PhaseSeries phases;
        SymbolStream symbols;
        read_phase_file(at(artifact::phases), phases, symbols);
        check_digest(phases.source_digest, artifact::phases);

        const auto& a = cfg_.analysis;
        const NormalizedTrace norm = normalize(trace);
        const ReferenceLaw arcsine = ReferenceLaw::arcsine(1.0);
        const ReferenceLaw uniform = ReferenceLaw::uniform(-std::numbers::pi, std::numbers::pi);
        const Histogram hi = make_histogram(norm.trace.v_i, -1.25, 1.25, a.voltage_bins);
        const Histogram hq = make_histogram(norm.trace.v_q, -1.25, 1.25, a.voltage_bins);
        const Histogram hp = make_histogram(phases.phases, -std::numbers::pi, std::numbers::pi, a.phase_bins);
        write_histogram_csv(at(artifact::hist_i), hi, arcsine, digest_);
        write_histogram_csv(at(artifact::hist_q), hq, arcsine, digest_);
        write_histogram_csv(at(artifact::hist_phase), hp, uniform, digest_);
        record(artifact::hist_i);
        record(artifact::hist_q);
        record(artifact::hist_phase);

        // Channel min-entropy over the ideal [-1, 1) range of the normalized voltages.
        const int adc = trace.adc_bits;
        auto channel_entropy = [&](const std::vector<double>& v) {
            std::vector<std::uint64_t> counts(std::size_t{1} << adc, 0);
            for (double x : v) ++counts[adc_code(x, adc, 1.0)];
            return min_entropy(counts);
        };
        const double h_phase = min_entropy(symbols);
        auto kld_json = [](const KldResult& k) {
            return k.support_mismatch ? json("inf") : json(k.bits);
        };

        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["config_digest"] = format_digest(digest_);
        doc["sample_count"] = trace.size();
        doc["sample_rate"] = trace.sample_rate;
        doc["normalization"] = {
            {"method", to_string(a.normalization)},
            {"offset_i", norm.offset_i},
            {"offset_q", norm.offset_q},
            {"amplitude_i", norm.amplitude_i},
            {"amplitude_q", norm.amplitude_q}};
        doc["min_entropy"] = {{"i_bits", channel_entropy(norm.trace.v_i)},
                              {"q_bits", channel_entropy(norm.trace.v_q)},
                              {"channel_adc_bits", adc},
                              {"phase_bits", h_phase},
                              {"phase_symbol_bits", symbols.bits_per_symbol},
                              {"phase_rate_per_bit", h_phase / symbols.bits_per_symbol}};
        doc["kld_bits"] = {
            {"phase_vs_uniform", kld_json(kld(hp, uniform))},
            {"phase_vs_standard_gaussian", kld_json(kld(hp, ReferenceLaw::gaussian(0.0, 1.0)))},
            {"phase_vs_fitted_gaussian", kld_json(kld(hp, ReferenceLaw::fitted_gaussian(phases.phases)))},
            {"i_vs_arcsine", kld_json(kld(hi, arcsine))},
            {"q_vs_arcsine", kld_json(kld(hq, arcsine))}};
        doc["histograms"] = {{"i", histogram_json(hi)}, {"q", histogram_json(hq)}, {"phase", histogram_json(hp)}};
        const std::size_t lag = std::min(a.max_lag, phases.size() - 1);
        doc["phase_autocorrelation"] = autocorrelation(phases.phases, lag);
        doc["zero_vector_count"] = phases.zero_vector_count;
        const TimingReport timing =
            validate_timing(cfg_.laser, cfg_.interferometer, cfg_.detector_i, trace.sample_rate);
        doc["timing"] = {{"phase_variance", timing.phase_variance},
                         {"warnings", timing.warnings},
                         {"notes", timing.notes}};
        write_json(at(artifact::analysis), doc);
        record(artifact::analysis);
    }

    void extract() {
        need(Stage::extract, artifact::phases, "reconstruct");
        PhaseSeries phases;
        SymbolStream symbols;
        read_phase_file(at(artifact::phases), phases, symbols);
        check_digest(phases.source_digest, artifact::phases);

        const auto& e = cfg_.extraction;
        ToeplitzDims dims;
        if (e.m) {
            dims = {e.n, *e.m};
        } else {
            const double rate = e.min_entropy_rate.value_or(min_entropy(symbols) / symbols.bits_per_symbol);
            dims = derive_params(rate, e.n, e.epsilon, e.mode);
        }
        BitStream seed;
        if (e.seed_file) {
            seed = read_seed_file(*e.seed_file, dims.n, dims.m);
        } else if (e.seed) {
            seed = deterministic_seed(dims.n, dims.m, *e.seed);
        } else {
            throw ParameterError("extraction needs a seed: set extraction.seed_file or extraction.seed");
        }
        const BitStream raw = symbols_to_bits(symbols);
        const ExtractionResult out = qrng::extract(raw, ToeplitzSpec(dims.n, dims.m, std::move(seed)));
        write_bit_file(at(artifact::extracted), out.bits, dims, digest_);
        record(artifact::extracted);
        result_.dims = dims;
        if (out.discarded_bits > 0) {
            result_.warnings.push_back(std::to_string(out.discarded_bits) + " trailing input bits discarded");
        }
    }

    void test() {
        need(Stage::test, artifact::extracted, "extract");
        std::uint64_t found = 0;
        ToeplitzDims dims;
        const BitStream bits = read_bit_file(at(artifact::extracted), &dims, &found);
        check_digest(found, artifact::extracted);
        if (!result_.dims) result_.dims = dims;

        TestConfig tc = cfg_.tests;
        const std::size_t available = bits.size() / tc.sequence_bits;
        if (available == 0) {
            throw InsufficientInputError("test stage needs " + std::to_string(tc.sequence_bits) +
                                         " bits per sequence, extracted file holds " +
                                         std::to_string(bits.size()));
        }
        const std::size_t count = std::min(available, tc.sequence_count);
        if (count < tc.sequence_count) {
            result_.warnings.push_back("only " + std::to_string(count) + " of " +
                                       std::to_string(tc.sequence_count) + " test sequences available");
        }
        std::vector<BitStream> seqs;
        seqs.reserve(count);
        for (std::size_t k = 0; k < count; ++k) seqs.push_back(bits.slice(k * tc.sequence_bits, tc.sequence_bits));
        const TestReport report = run_battery(seqs, tc);
        result_.tests_passed = report.passed;

        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["config_digest"] = format_digest(digest_);
        doc["sequence_count"] = report.sequence_count;
        doc["sequence_bits"] = report.sequence_bits;
        doc["alpha"] = tc.alpha;
        doc["proportion_rule"] = tc.proportion_rule == ProportionRule::fixed ? "fixed" : "band";
        doc["uniformity_threshold"] = tc.uniformity_threshold;
        doc["passed"] = report.passed;
        json tests = json::array();
        for (const auto& t : report.tests) {
            json jt{{"name", t.name}, {"passed", t.passed}};
            json subs = json::array();
            for (const auto& s : t.subtests) {
                subs.push_back({{"name", s.name},
                                {"proportion", s.proportion},
                                {"proportion_bound", s.proportion_bound},
                                {"uniformity_p", s.uniformity_p},
                                {"passed", s.passed},
                                {"p_values", s.p_values}});
            }
            jt["subtests"] = subs;
            tests.push_back(jt);
        }
        doc["tests"] = tests;
        doc["not_implemented"] = report.not_implemented;
        write_json(at(artifact::tests), doc);
        record(artifact::tests);
    }

    void summarize() {
        const auto& e = cfg_.extraction;
        std::optional<ToeplitzDims> dims = result_.dims;
        if (!dims && e.m) dims = ToeplitzDims{e.n, *e.m};
        if (!dims && e.min_entropy_rate) dims = derive_params(*e.min_entropy_rate, e.n, e.epsilon, e.mode);
        const double rate = sample_rate_ > 0.0 ? sample_rate_ : cfg_.simulation.sample_rate;
        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["config_digest"] = format_digest(digest_);
        json stages = json::array();
        for (Stage s : result_.stages_run) stages.push_back(to_string(s));
        doc["stages"] = stages;
        json arts = json::object();
        for (const auto& [name, path] : result_.artifacts) arts[name] = path.filename().string();
        doc["artifacts"] = arts;
        if (dims) {
            result_.bits_per_sample = cfg_.analysis.phase_bits * dims->ratio();
            result_.nominal_bit_rate = *result_.bits_per_sample * rate;
            doc["extraction"] = {{"n", dims->n}, {"m", dims->m}, {"ratio", dims->ratio()}};
            doc["bits_per_sample"] = *result_.bits_per_sample;
            doc["nominal_bit_rate"] = *result_.nominal_bit_rate;
        }
        doc["sample_rate"] = rate;
        if (result_.tests_passed) doc["tests_passed"] = *result_.tests_passed;
        doc["warnings"] = result_.warnings;
        write_json(at(artifact::summary), doc);
        result_.artifacts[artifact::summary] = at(artifact::summary);
    }

    const ExperimentConfig& cfg_;
    const PipelineOptions& opt_;
    std::uint64_t digest_;
    double sample_rate_ = 0.0;
    PipelineResult result_;
};

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& options) {
    config.validate();
    return Runner(config, options).run();
}

}  // namespace qrng
