#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/config.hpp"
#include "qrng/trace_io.hpp"

namespace qrng {

enum class Stage { simulate, ingest, reconstruct, analyze, extract, test };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);
/// Comma-separated stage list; "all" means simulate..test.
std::set<Stage> parse_stages(std::string_view list);

/// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* trace = "trace.iqt";
inline constexpr const char* phases = "phases.bin";
inline constexpr const char* hist_i = "hist_i.csv";
inline constexpr const char* hist_q = "hist_q.csv";
inline constexpr const char* hist_phase = "hist_phase.csv";
inline constexpr const char* analysis = "analysis_report.json";
inline constexpr const char* extracted = "extracted.bin";
inline constexpr const char* tests = "test_report.json";
inline constexpr const char* summary = "summary.json";
}  // namespace artifact

struct PipelineOptions {
    std::filesystem::path out_dir = ".";
    std::set<Stage> stages;
    std::optional<std::filesystem::path> input;  // ingest source
    TraceFormat input_format = TraceFormat::binary;
};

struct PipelineResult {
    std::uint64_t config_digest = 0;
    std::vector<Stage> stages_run;
    std::map<std::string, std::filesystem::path> artifacts;
    std::vector<std::string> warnings;
    std::optional<ToeplitzDims> dims;
    std::optional<double> bits_per_sample;   // phase_bits * m / n
    std::optional<double> nominal_bit_rate;  // bits_per_sample * sample rate
    std::optional<bool> tests_passed;
};

/// Run the selected stages in order. Each stage reads its inputs from the
/// output directory, so a stage may run on artifacts left by an earlier
/// invocation. Missing inputs raise DependencyError. summary.json is written
/// last whenever any stage ran.
PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& options);

/// phases.bin: "PHS1", version u8, bits u8, 2 reserved, digest u64, count u64,
/// zero-vector count u64, then count f64 phases and count u16 symbols.
void write_phase_file(const std::filesystem::path& path, const PhaseSeries& phases, const SymbolStream& symbols,
                      std::uint64_t digest);
void read_phase_file(const std::filesystem::path& path, PhaseSeries& phases, SymbolStream& symbols);

/// extracted.bin: "XBT1", version u8, 3 reserved, digest u64, n u64, m u64,
/// bit length u64, then the packed bits.
void write_bit_file(const std::filesystem::path& path, const BitStream& bits, ToeplitzDims dims,
                    std::uint64_t digest);
BitStream read_bit_file(const std::filesystem::path& path, ToeplitzDims* dims = nullptr,
                        std::uint64_t* digest = nullptr);

}  // namespace qrng
