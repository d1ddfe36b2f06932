#include "qrng/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "qrng/errors.hpp"

namespace qrng {

using detail::require;

ExperimentConfig ExperimentConfig::reference_setup() {
    ExperimentConfig c;
    constexpr double p0 = 1.40e-4;
    constexpr double p_lo = 0.068e-3;
    constexpr double p_s = 0.041e-3;
    c.laser = LaserParams::from_coherence_time(6e-9, p0, 7.855e-7);

    auto& ifm = c.interferometer;
    ifm.delay_length = 6.0;
    ifm.fiber_index = 1.5;
    ifm.bs_transmittance = 1.0 - p_lo / p0;
    ifm.delay_loss = p_s / (ifm.bs_transmittance * p0);
    ifm.signal_power_sigma = 2.823e-7;
    ifm.lo_power_sigma = 4.505e-7;

    c.detector_i.electrical_noise_sigma = 7.666e-3;
    c.detector_q.electrical_noise_sigma = 7.356e-3;
    // Measured amplitude ratio of the two channels.
    c.detector_q.transimpedance = 16e3 * 567.5 / 595.5;

    c.simulation.noise = NoiseSwitches::all_on();
    c.simulation.noise.drift = false;

    c.extraction.mode = ExtractionMode::rate_only;
    c.extraction.min_entropy_rate = 0.98;
    return c;
}

void ExperimentConfig::validate() const {
    laser.validate();
    interferometer.validate();
    detector_i.validate();
    detector_q.validate();
    require(simulation.sample_count >= 1, "simulation.sample_count must be >= 1");
    require(std::isfinite(simulation.sample_rate) && simulation.sample_rate > 0.0,
            "simulation.sample_rate must be positive");
    require(analysis.phase_bits >= 1 && analysis.phase_bits <= 16, "analysis.phase_bits must lie in [1, 16]");
    require(analysis.phase_bins >= 1 && analysis.voltage_bins >= 1, "histogram bin counts must be >= 1");
    if (analysis.normalization == NormalizationMethod::fixed) {
        require(analysis.amplitude_i && analysis.amplitude_q,
                "fixed normalization needs analysis.amplitude_i and analysis.amplitude_q");
    }
    for (const auto& a : {analysis.amplitude_i, analysis.amplitude_q}) {
        if (a) require(std::isfinite(*a) && *a > 0.0, "analysis amplitudes must be positive");
    }
    require(extraction.n >= 1, "extraction.n must be >= 1");
    if (extraction.m) require(*extraction.m >= 1 && *extraction.m <= extraction.n, "extraction.m must lie in [1, n]");
    if (extraction.min_entropy_rate) {
        require(*extraction.min_entropy_rate > 0.0 && *extraction.min_entropy_rate <= 1.0,
                "extraction.min_entropy_rate must lie in (0, 1]");
    }
    require(extraction.epsilon > 0.0 && extraction.epsilon < 1.0, "extraction.epsilon must lie in (0, 1)");
    require(!(extraction.seed_file && extraction.seed), "give extraction.seed_file or extraction.seed, not both");
    tests.validate();
    for (const auto& name : tests.enabled) (void)TestRegistry::builtin().find(name);
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Parser {
    std::string key;

    [[noreturn]] void bad(const std::string& value, const char* what) const {
        throw ParameterError("config key '" + key + "': '" + value + "' is not " + what);
    }

    double real(const std::string& v) const {
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) bad(v, "a finite number");
        return out;
    }

    std::uint64_t u64(const std::string& v) const {
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) bad(v, "a non-negative integer");
        return out;
    }

    std::size_t count(const std::string& v) const {
        // Accept 1e6-style counts as long as they are exact integers.
        if (v.find_first_of("eE.") != std::string::npos) {
            const double d = real(v);
            if (d < 0.0 || d != std::floor(d) || d > 9.0e15) bad(v, "a non-negative integer");
            return static_cast<std::size_t>(d);
        }
        return static_cast<std::size_t>(u64(v));
    }

    int integer(const std::string& v) const {
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) bad(v, "an integer");
        return out;
    }

    bool boolean(const std::string& v) const {
        if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "off" || v == "no" || v == "0") return false;
        bad(v, "a boolean");
    }
};

using Setter = std::function<void(ExperimentConfig&, const Parser&, const std::string&)>;

struct LaserInput {
    std::optional<double> linewidth;
    std::optional<double> coherence_time;
    double mean_power;
    double intensity_sigma;
};

std::map<std::string, Setter> detector_keys(const std::string& section,
                                            DetectorParams ExperimentConfig::*member) {
    std::map<std::string, Setter> m;
    m[section + ".transimpedance"] = [member](auto& c, auto& p, auto& v) { (c.*member).transimpedance = p.real(v); };
    m[section + ".responsivity"] = [member](auto& c, auto& p, auto& v) { (c.*member).responsivity = p.real(v); };
    m[section + ".electrical_noise_sigma"] = [member](auto& c, auto& p, auto& v) {
        (c.*member).electrical_noise_sigma = p.real(v);
    };
    m[section + ".response_time"] = [member](auto& c, auto& p, auto& v) { (c.*member).response_time = p.real(v); };
    m[section + ".adc_bits"] = [member](auto& c, auto& p, auto& v) { (c.*member).adc_bits = p.integer(v); };
    m[section + ".adc_fullscale"] = [member](auto& c, auto& p, auto& v) { (c.*member).adc_fullscale = p.real(v); };
    return m;
}

std::map<std::string, Setter> make_setters() {
    std::map<std::string, Setter> s;
    // Laser keys are collected separately (linewidth and coherence_time are exclusive).
    s["interferometer.delay_length"] = [](auto& c, auto& p, auto& v) { c.interferometer.delay_length = p.real(v); };
    s["interferometer.fiber_index"] = [](auto& c, auto& p, auto& v) { c.interferometer.fiber_index = p.real(v); };
    s["interferometer.delay_loss"] = [](auto& c, auto& p, auto& v) { c.interferometer.delay_loss = p.real(v); };
    s["interferometer.bs_transmittance"] = [](auto& c, auto& p, auto& v) {
        c.interferometer.bs_transmittance = p.real(v);
    };
    s["interferometer.static_phase"] = [](auto& c, auto& p, auto& v) {
        c.interferometer.static_phase = wrap_phase(p.real(v));
    };
    s["interferometer.drift_phase"] = [](auto& c, auto& p, auto& v) {
        c.interferometer.drift_phase = wrap_phase(p.real(v));
    };
    s["interferometer.drift_mode"] = [](auto& c, auto& p, auto& v) {
        if (v == "fixed") {
            c.interferometer.drift_mode = DriftMode::fixed;
        } else if (v == "slow_walk") {
            c.interferometer.drift_mode = DriftMode::slow_walk;
        } else {
            p.bad(v, "one of fixed, slow_walk");
        }
    };
    s["interferometer.drift_step"] = [](auto& c, auto& p, auto& v) { c.interferometer.drift_step = p.real(v); };
    s["interferometer.signal_power_sigma"] = [](auto& c, auto& p, auto& v) {
        c.interferometer.signal_power_sigma = p.real(v);
    };
    s["interferometer.lo_power_sigma"] = [](auto& c, auto& p, auto& v) {
        c.interferometer.lo_power_sigma = p.real(v);
    };
    s.merge(detector_keys("detector_i", &ExperimentConfig::detector_i));
    s.merge(detector_keys("detector_q", &ExperimentConfig::detector_q));

    s["simulation.sample_count"] = [](auto& c, auto& p, auto& v) { c.simulation.sample_count = p.count(v); };
    s["simulation.sample_rate"] = [](auto& c, auto& p, auto& v) { c.simulation.sample_rate = p.real(v); };
    s["simulation.seed"] = [](auto& c, auto& p, auto& v) { c.simulation.seed = p.u64(v); };
    s["simulation.intensity_noise"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.intensity = p.boolean(v); };
    s["simulation.electrical_noise"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.electrical = p.boolean(v); };
    s["simulation.drift"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.drift = p.boolean(v); };
    s["simulation.mismatch"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.mismatch = p.boolean(v); };
    s["simulation.bandwidth"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.bandwidth = p.boolean(v); };
    s["simulation.adc"] = [](auto& c, auto& p, auto& v) { c.simulation.noise.adc = p.boolean(v); };

    s["analysis.phase_bits"] = [](auto& c, auto& p, auto& v) { c.analysis.phase_bits = p.integer(v); };
    s["analysis.phase_bins"] = [](auto& c, auto& p, auto& v) { c.analysis.phase_bins = p.count(v); };
    s["analysis.voltage_bins"] = [](auto& c, auto& p, auto& v) { c.analysis.voltage_bins = p.count(v); };
    s["analysis.max_lag"] = [](auto& c, auto& p, auto& v) { c.analysis.max_lag = p.count(v); };
    s["analysis.normalization"] = [](auto& c, auto& p, auto& v) {
        if (v == "percentile" || v == "arcsine_fit" || v == "fixed") {
            c.analysis.normalization = parse_normalization(v);
        } else {
            p.bad(v, "one of percentile, arcsine_fit, fixed");
        }
    };
    s["analysis.amplitude_i"] = [](auto& c, auto& p, auto& v) { c.analysis.amplitude_i = p.real(v); };
    s["analysis.amplitude_q"] = [](auto& c, auto& p, auto& v) { c.analysis.amplitude_q = p.real(v); };

    s["extraction.n"] = [](auto& c, auto& p, auto& v) { c.extraction.n = p.count(v); };
    s["extraction.m"] = [](auto& c, auto& p, auto& v) { c.extraction.m = p.count(v); };
    s["extraction.min_entropy_rate"] = [](auto& c, auto& p, auto& v) { c.extraction.min_entropy_rate = p.real(v); };
    s["extraction.epsilon"] = [](auto& c, auto& p, auto& v) { c.extraction.epsilon = p.real(v); };
    s["extraction.mode"] = [](auto& c, auto& p, auto& v) {
        if (v == "lemma") {
            c.extraction.mode = ExtractionMode::lemma;
        } else if (v == "rate_only") {
            c.extraction.mode = ExtractionMode::rate_only;
        } else {
            p.bad(v, "one of lemma, rate_only");
        }
    };
    s["extraction.seed_file"] = [](auto& c, auto&, auto& v) { c.extraction.seed_file = v; };
    s["extraction.seed"] = [](auto& c, auto& p, auto& v) { c.extraction.seed = p.u64(v); };

    s["tests.sequence_bits"] = [](auto& c, auto& p, auto& v) { c.tests.sequence_bits = p.count(v); };
    s["tests.sequence_count"] = [](auto& c, auto& p, auto& v) { c.tests.sequence_count = p.count(v); };
    s["tests.alpha"] = [](auto& c, auto& p, auto& v) { c.tests.alpha = p.real(v); };
    s["tests.proportion_rule"] = [](auto& c, auto& p, auto& v) {
        if (v == "band") {
            c.tests.proportion_rule = ProportionRule::confidence_band;
        } else if (v == "fixed") {
            c.tests.proportion_rule = ProportionRule::fixed;
        } else {
            p.bad(v, "one of band, fixed");
        }
    };
    s["tests.fixed_threshold"] = [](auto& c, auto& p, auto& v) { c.tests.fixed_threshold = p.real(v); };
    s["tests.uniformity_threshold"] = [](auto& c, auto& p, auto& v) { c.tests.uniformity_threshold = p.real(v); };
    s["tests.block_frequency_m"] = [](auto& c, auto& p, auto& v) { c.tests.params.block_frequency_m = p.count(v); };
    s["tests.serial_m"] = [](auto& c, auto& p, auto& v) {
        c.tests.params.serial_m = static_cast<unsigned>(p.integer(v));
    };
    s["tests.approximate_entropy_m"] = [](auto& c, auto& p, auto& v) {
        c.tests.params.approximate_entropy_m = static_cast<unsigned>(p.integer(v));
    };
    s["tests.enabled"] = [](auto& c, auto&, auto& v) {
        c.tests.enabled.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) c.tests.enabled.push_back(item);
        }
    };
    return s;
}

const std::map<std::string, Setter>& setters() {
    static const auto s = make_setters();
    return s;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg = ExperimentConfig::reference_setup();
    LaserInput laser{std::nullopt, std::nullopt, cfg.laser.mean_power, cfg.laser.intensity_sigma};
    bool laser_touched = false;
    std::string section;
    std::map<std::string, int> seen;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = "config line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw FormatError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            static const std::vector<std::string> known = {"laser",      "interferometer", "detector_i",
                                                           "detector_q", "simulation",     "analysis",
                                                           "extraction", "tests"};
            if (std::find(known.begin(), known.end(), section) == known.end()) {
                throw ParameterError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError(where + ": expected 'key = value'");
        if (section.empty()) throw FormatError(where + ": key outside of any section");
        const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
        std::string_view rest = std::string_view(line).substr(eq + 1);
        // Trailing comment: '#' or ';' after whitespace.
        for (std::size_t k = 1; k < rest.size(); ++k) {
            if ((rest[k] == '#' || rest[k] == ';') && (rest[k - 1] == ' ' || rest[k - 1] == '\t')) {
                rest = rest.substr(0, k);
                break;
            }
        }
        const std::string value = trim(rest);
        if (value.empty()) throw FormatError(where + ": empty value for '" + key + "'");
        if (seen[key]++) throw ParameterError(where + ": duplicate key '" + key + "'");
        Parser p{key};

        if (section == "laser") {
            laser_touched = true;
            if (key == "laser.linewidth") {
                laser.linewidth = p.real(value);
            } else if (key == "laser.coherence_time") {
                laser.coherence_time = p.real(value);
            } else if (key == "laser.mean_power") {
                laser.mean_power = p.real(value);
            } else if (key == "laser.intensity_sigma") {
                laser.intensity_sigma = p.real(value);
            } else {
                throw ParameterError(where + ": unknown key '" + key + "'");
            }
            continue;
        }
        const auto it = setters().find(key);
        if (it == setters().end()) throw ParameterError(where + ": unknown key '" + key + "'");
        it->second(cfg, p, value);
    }

    if (laser_touched) {
        if (laser.linewidth && laser.coherence_time) {
            throw ParameterError("laser: give linewidth or coherence_time, not both");
        }
        if (laser.linewidth) {
            cfg.laser = LaserParams::from_linewidth(*laser.linewidth, laser.mean_power, laser.intensity_sigma);
        } else {
            cfg.laser = LaserParams::from_coherence_time(laser.coherence_time.value_or(cfg.laser.coherence_time),
                                                         laser.mean_power, laser.intensity_sigma);
        }
    }
    if (cfg.extraction.seed_file && cfg.extraction.seed_file->is_relative() && !base_dir.empty()) {
        cfg.extraction.seed_file = base_dir / *cfg.extraction.seed_file;
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream o;
    auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
    auto d = [&](const char* k, double v) { kv(k, fmt_double(v)); };

    o << "[laser]\n";
    d("coherence_time", laser.coherence_time);
    d("mean_power", laser.mean_power);
    d("intensity_sigma", laser.intensity_sigma);

    o << "[interferometer]\n";
    d("delay_length", interferometer.delay_length);
    d("fiber_index", interferometer.fiber_index);
    d("delay_loss", interferometer.delay_loss);
    d("bs_transmittance", interferometer.bs_transmittance);
    d("static_phase", interferometer.static_phase);
    d("drift_phase", interferometer.drift_phase);
    kv("drift_mode", interferometer.drift_mode == DriftMode::fixed ? "fixed" : "slow_walk");
    d("drift_step", interferometer.drift_step);
    if (interferometer.signal_power_sigma) d("signal_power_sigma", *interferometer.signal_power_sigma);
    if (interferometer.lo_power_sigma) d("lo_power_sigma", *interferometer.lo_power_sigma);

    for (const auto& [name, det] : {std::pair{"detector_i", &detector_i}, std::pair{"detector_q", &detector_q}}) {
        o << '[' << name << "]\n";
        d("transimpedance", det->transimpedance);
        d("responsivity", det->responsivity);
        d("electrical_noise_sigma", det->electrical_noise_sigma);
        d("response_time", det->response_time);
        kv("adc_bits", std::to_string(det->adc_bits));
        d("adc_fullscale", det->adc_fullscale);
    }

    o << "[simulation]\n";
    kv("sample_count", std::to_string(simulation.sample_count));
    d("sample_rate", simulation.sample_rate);
    kv("seed", std::to_string(simulation.seed));
    kv("intensity_noise", fmt_bool(simulation.noise.intensity));
    kv("electrical_noise", fmt_bool(simulation.noise.electrical));
    kv("drift", fmt_bool(simulation.noise.drift));
    kv("mismatch", fmt_bool(simulation.noise.mismatch));
    kv("bandwidth", fmt_bool(simulation.noise.bandwidth));
    kv("adc", fmt_bool(simulation.noise.adc));

    o << "[analysis]\n";
    kv("phase_bits", std::to_string(analysis.phase_bits));
    kv("phase_bins", std::to_string(analysis.phase_bins));
    kv("voltage_bins", std::to_string(analysis.voltage_bins));
    kv("max_lag", std::to_string(analysis.max_lag));
    kv("normalization", std::string(to_string(analysis.normalization)));
    if (analysis.amplitude_i) d("amplitude_i", *analysis.amplitude_i);
    if (analysis.amplitude_q) d("amplitude_q", *analysis.amplitude_q);

    o << "[extraction]\n";
    kv("n", std::to_string(extraction.n));
    if (extraction.m) kv("m", std::to_string(*extraction.m));
    if (extraction.min_entropy_rate) d("min_entropy_rate", *extraction.min_entropy_rate);
    d("epsilon", extraction.epsilon);
    kv("mode", extraction.mode == ExtractionMode::lemma ? "lemma" : "rate_only");
    if (extraction.seed_file) kv("seed_file", extraction.seed_file->string());
    if (extraction.seed) kv("seed", std::to_string(*extraction.seed));

    o << "[tests]\n";
    kv("sequence_bits", std::to_string(tests.sequence_bits));
    kv("sequence_count", std::to_string(tests.sequence_count));
    d("alpha", tests.alpha);
    kv("proportion_rule", tests.proportion_rule == ProportionRule::fixed ? "fixed" : "band");
    d("fixed_threshold", tests.fixed_threshold);
    d("uniformity_threshold", tests.uniformity_threshold);
    kv("block_frequency_m", std::to_string(tests.params.block_frequency_m));
    kv("serial_m", std::to_string(tests.params.serial_m));
    kv("approximate_entropy_m", std::to_string(tests.params.approximate_entropy_m));
    if (!tests.enabled.empty()) {
        std::string list;
        for (const auto& name : tests.enabled) list += (list.empty() ? "" : ",") + name;
        kv("enabled", list);
    }
    return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t ExperimentConfig::digest() const { return fnv1a64(canonical_text()); }

std::string format_digest(std::uint64_t digest) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

}  // namespace qrng
