#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qrng/optics.hpp"

namespace qrng {

enum class TraceFormat { binary, csv };

TraceFormat parse_trace_format(std::string_view name);

/// Binary trace, little endian:
///
///   offset size
///        0    4  magic "IQT1"
///        4    1  version (1)
///        5    1  flags (0)
///        6    1  channel count (2)
///        7    1  reserved (0)
///        8    8  config digest, u64
///       16    8  sample count, u64
///       24    8  sample rate, f64
///       32    1  ADC bits, u8
///       33    8  ADC full scale, f64
///       41    8  seed, u64
///       49       payload: count x (I, Q) as f32
inline constexpr std::size_t kTraceHeaderSize = 49;

void write_trace_binary(const std::filesystem::path& path, const IQTrace& trace);
IQTrace read_trace_binary(const std::filesystem::path& path);

/// CSV trace: optional `# key=value` lines (sample_rate, adc_bits,
/// adc_fullscale, config_digest, seed), a `v_i,v_q` header, then one row per
/// sample.
void write_trace_csv(const std::filesystem::path& path, const IQTrace& trace);

struct CsvReadStats {
    std::size_t rejected_rows = 0;  // rows with NaN or Inf
};
IQTrace read_trace_csv(const std::filesystem::path& path, CsvReadStats* stats = nullptr);

/// Read a captured trace; metadata.source is set to ingested. Rows or samples
/// holding NaN/Inf are dropped and counted in `rejected_rows`.
IQTrace ingest_trace(const std::filesystem::path& path, TraceFormat format,
                     std::size_t* rejected_rows = nullptr);

/// Write `bytes` to `path` via a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace qrng
