#include "qrng/trace_io.hpp"

#include <bit>
#include <cctype>
#include <iomanip>
#include <limits>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "qrng/errors.hpp"

namespace qrng {

static_assert(std::endian::native == std::endian::little, "trace I/O assumes a little-endian host");

TraceFormat parse_trace_format(std::string_view name) {
    if (name == "binary" || name == "bin" || name == "iqt") return TraceFormat::binary;
    if (name == "csv") return TraceFormat::csv;
    throw ParameterError("unknown trace format '" + std::string(name) + "' (binary or csv)");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

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

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void write_trace_binary(const std::filesystem::path& path, const IQTrace& trace) {
    trace.validate();
    std::string buf;
    buf.reserve(kTraceHeaderSize + trace.size() * 8);
    buf.append("IQT1", 4);
    put<std::uint8_t>(buf, 1);
    put<std::uint8_t>(buf, 0);
    put<std::uint8_t>(buf, 2);
    put<std::uint8_t>(buf, 0);
    put<std::uint64_t>(buf, trace.metadata.config_digest);
    put<std::uint64_t>(buf, trace.size());
    put<double>(buf, trace.sample_rate);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(trace.adc_bits));
    put<double>(buf, trace.adc_fullscale);
    put<std::uint64_t>(buf, trace.metadata.seed);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        put<float>(buf, static_cast<float>(trace.v_i[k]));
        put<float>(buf, static_cast<float>(trace.v_q[k]));
    }
    write_file_atomic(path, buf);
}

IQTrace read_trace_binary(const std::filesystem::path& path) {
    const std::string buf = read_all(path);
    const std::string name = path.string();
    if (buf.size() < kTraceHeaderSize) {
        throw FormatError(name + ": truncated header, " + std::to_string(buf.size()) + " of " +
                          std::to_string(kTraceHeaderSize) + " bytes");
    }
    if (buf.compare(0, 4, "IQT1") != 0) throw FormatError(name + ": bad magic at byte 0");
    if (get<std::uint8_t>(buf, 4) != 1) {
        throw FormatError(name + ": unsupported version " + std::to_string(get<std::uint8_t>(buf, 4)) + " at byte 4");
    }
    if (get<std::uint8_t>(buf, 6) != 2) {
        throw FormatError(name + ": channel count " + std::to_string(get<std::uint8_t>(buf, 6)) +
                          " at byte 6, expected 2");
    }
    IQTrace t;
    t.metadata.config_digest = get<std::uint64_t>(buf, 8);
    const auto count = get<std::uint64_t>(buf, 16);
    t.sample_rate = get<double>(buf, 24);
    t.adc_bits = get<std::uint8_t>(buf, 32);
    t.adc_fullscale = get<double>(buf, 33);
    t.metadata.seed = get<std::uint64_t>(buf, 41);
    t.metadata.source = TraceSource::ingested;

    const std::size_t payload = buf.size() - kTraceHeaderSize;
    if (count > (std::numeric_limits<std::uint64_t>::max() - kTraceHeaderSize) / 8 || payload != count * 8) {
        throw FormatError(name + ": payload holds " + std::to_string(payload) + " bytes, header declares " +
                          std::to_string(count) + " samples (" + std::to_string(count * 8) + " bytes)" +
                          (payload < count * 8 ? "; file is truncated" : ""));
    }
    if (!(t.sample_rate > 0.0) || !std::isfinite(t.sample_rate)) {
        throw FormatError(name + ": invalid sample rate at byte 24");
    }
    t.v_i.resize(count);
    t.v_q.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t off = kTraceHeaderSize + 8 * k;
        t.v_i[k] = get<float>(buf, off);
        t.v_q[k] = get<float>(buf, off + 4);
    }
    return t;
}

void write_trace_csv(const std::filesystem::path& path, const IQTrace& trace) {
    trace.validate();
    std::ostringstream o;
    o << std::setprecision(17);
    o << "# sample_rate=" << trace.sample_rate << '\n';
    o << "# adc_bits=" << trace.adc_bits << '\n';
    o << "# adc_fullscale=" << trace.adc_fullscale << '\n';
    o << "# config_digest=" << trace.metadata.config_digest << '\n';
    o << "# seed=" << trace.metadata.seed << '\n';
    o << "v_i,v_q\n" << std::setprecision(9);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        o << static_cast<float>(trace.v_i[k]) << ',' << static_cast<float>(trace.v_q[k]) << '\n';
    }
    write_file_atomic(path, o.str());
}

namespace {

bool parse_number(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    // from_chars does not accept a leading '+'.
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc::result_out_of_range) {
        out = std::numeric_limits<double>::infinity();
        return ptr == s.data() + s.size();
    }
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

IQTrace read_trace_csv(const std::filesystem::path& path, CsvReadStats* stats) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    const std::string name = path.string();
    IQTrace t;
    t.metadata.source = TraceSource::ingested;
    t.sample_rate = 0.0;
    std::size_t rejected = 0;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = name + ":" + std::to_string(line_no);
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            const std::string value = line.substr(eq + 1);
            double v = 0.0;
            if (!parse_number(value, v)) throw FormatError(where + ": non-numeric metadata value '" + value + "'");
            if (key == "sample_rate") {
                t.sample_rate = v;
            } else if (key == "adc_bits") {
                t.adc_bits = static_cast<int>(v);
            } else if (key == "adc_fullscale") {
                t.adc_fullscale = v;
            } else if (key == "config_digest") {
                std::from_chars(value.data(), value.data() + value.size(), t.metadata.config_digest);
            } else if (key == "seed") {
                std::from_chars(value.data(), value.data() + value.size(), t.metadata.seed);
            }
            continue;
        }
        if (!header_seen) {
            std::string h = line;
            std::erase(h, ' ');
            if (h != "v_i,v_q") throw FormatError(where + ": expected header 'v_i,v_q'");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw FormatError(where + ": expected two comma-separated fields");
        }
        double vi = 0.0;
        double vq = 0.0;
        const std::string_view row(line);
        auto lower = [](std::string_view s) {
            std::string r;
            for (char c : s) {
                if (c != ' ' && c != '\t') r.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
            return r;
        };
        auto special = [&](std::string_view s, double& out) {
            const std::string l = lower(s);
            if (l == "nan" || l == "-nan" || l == "+nan") {
                out = std::numeric_limits<double>::quiet_NaN();
                return true;
            }
            if (l == "inf" || l == "+inf" || l == "infinity" || l == "+infinity") {
                out = std::numeric_limits<double>::infinity();
                return true;
            }
            if (l == "-inf" || l == "-infinity") {
                out = -std::numeric_limits<double>::infinity();
                return true;
            }
            return false;
        };
        const auto a = row.substr(0, comma);
        const auto b = row.substr(comma + 1);
        if (!parse_number(a, vi) && !special(a, vi)) {
            throw FormatError(where + ": non-numeric field '" + std::string(a) + "' in column 1");
        }
        if (!parse_number(b, vq) && !special(b, vq)) {
            throw FormatError(where + ": non-numeric field '" + std::string(b) + "' in column 2");
        }
        if (!std::isfinite(vi) || !std::isfinite(vq)) {
            ++rejected;
            continue;
        }
        t.v_i.push_back(vi);
        t.v_q.push_back(vq);
    }
    if (!header_seen) throw FormatError(name + ": missing 'v_i,v_q' header");
    if (!(t.sample_rate > 0.0)) throw FormatError(name + ": missing or invalid '# sample_rate=' line");
    if (stats) stats->rejected_rows = rejected;
    return t;
}

IQTrace ingest_trace(const std::filesystem::path& path, TraceFormat format, std::size_t* rejected_rows) {
    IQTrace t;
    std::size_t rejected = 0;
    if (format == TraceFormat::binary) {
        t = read_trace_binary(path);
        std::vector<double> vi;
        std::vector<double> vq;
        vi.reserve(t.size());
        vq.reserve(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (std::isfinite(t.v_i[k]) && std::isfinite(t.v_q[k])) {
                vi.push_back(t.v_i[k]);
                vq.push_back(t.v_q[k]);
            } else {
                ++rejected;
            }
        }
        if (rejected) {
            t.v_i = std::move(vi);
            t.v_q = std::move(vq);
        }
    } else {
        CsvReadStats stats;
        t = read_trace_csv(path, &stats);
        rejected = stats.rejected_rows;
    }
    if (t.size() == 0) throw FormatError(path.string() + ": no finite samples");
    t.metadata.source = TraceSource::ingested;
    if (rejected_rows) *rejected_rows = rejected;
    return t;
}

}  // namespace qrng
