#include "franson/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "franson/error.hpp"
#include "franson/interferometer.hpp"
#include "franson/rng.hpp"

namespace franson {

namespace {

using KeyType = ExperimentConfig::KeyType;

double parse_f64(std::string_view key, std::string_view value) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end)
        throw_invalid("config key '" + std::string(key) + "': expected a number, got '" +
                      std::string(value) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw_invalid("config key '" + std::string(key) + "': expected an unsigned integer, got '" +
                      std::string(value) + "'");
    return out;
}

std::int64_t parse_i64(std::string_view key, std::string_view value) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw_invalid("config key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(value) + "'");
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

// Accessor table: every key reads/writes one field. Kept in one place so the
// key list, JSON codec, canonical string and CLI flags can never drift apart.
namespace {

struct Accessor {
    ExperimentConfig::KeySpec spec;
    std::string (*get)(const ExperimentConfig&);
    void (*set)(ExperimentConfig&, std::string_view);
};

#define F64_KEY(name, expr, hashed, doc)                                                     \
    Accessor{{name, KeyType::f64, hashed, doc},                                              \
             [](const ExperimentConfig& c) { return format_double(c.expr); },                \
             [](ExperimentConfig& c, std::string_view v) { c.expr = parse_f64(name, v); }}

#define U64_KEY(name, expr, hashed, doc)                                                     \
    Accessor{{name, KeyType::u64, hashed, doc},                                              \
             [](const ExperimentConfig& c) { return std::to_string(c.expr); },               \
             [](ExperimentConfig& c, std::string_view v) { c.expr = parse_u64(name, v); }}

#define I64_KEY(name, expr, hashed, doc)                                                     \
    Accessor{{name, KeyType::i64, hashed, doc},                                              \
             [](const ExperimentConfig& c) { return std::to_string(c.expr); },               \
             [](ExperimentConfig& c, std::string_view v) { c.expr = parse_i64(name, v); }}

#define STR_KEY(name, expr, hashed, doc)                                                     \
    Accessor{{name, KeyType::str, hashed, doc},                                              \
             [](const ExperimentConfig& c) { return c.expr; },                               \
             [](ExperimentConfig& c, std::string_view v) { c.expr = std::string(v); }}

const std::vector<Accessor>& accessors() {
    static const std::vector<Accessor> table = {
        F64_KEY("f0_thz", source.f0_thz, true, "optical center frequency (THz)"),
        F64_KEY("delta_f_thz", source.delta_f_thz, true, "pair ensemble FWHM bandwidth (THz)"),
        F64_KEY("pump_linewidth_ghz", source.pump_linewidth_ghz, true,
                "pump FWHM linewidth (GHz)"),
        F64_KEY("delta_l_mm", delta_l_mm, true, "interferometer path imbalance L - S (mm)"),
        F64_KEY("phi_a_rad", phi_a_rad, true, "Alice phase plate (rad)"),
        F64_KEY("phi_b_rad", phi_b_rad, true, "Bob phase plate (rad)"),
        F64_KEY("efficiency", detector.efficiency, true, "detector efficiency in [0,1]"),
        F64_KEY("jitter_sigma_ps", detector.jitter_sigma_ps, true,
                "detector Gaussian timing jitter sigma (ps)"),
        F64_KEY("dark_rate_hz", detector.dark_rate_hz, true, "dark count rate per channel (1/s)"),
        U64_KEY("n_pairs", n_pairs, true, "emitted pairs per run / per scan point"),
        F64_KEY("mean_rate_hz", mean_rate_hz, true, "mean pair emission rate (1/s)"),
        U64_KEY("seed", seed, true, "master seed; all substreams derive from it"),
        F64_KEY("min_factor", min_factor, true, "margin factor for the regime inequalities"),
        I64_KEY("window_half_width_ps", window_half_width_ps, true,
                "coincidence window half width (ps)"),
        I64_KEY("hist_bin_width_ps", hist_bin_width_ps, true, "delay histogram bin width (ps)"),
        I64_KEY("hist_range_ps", hist_range_ps, true, "delay histogram half range (ps)"),
        STR_KEY("scan_variable", scan_variable, true, "phi_a | phi_b | joint | locked"),
        F64_KEY("scan_start_rad", scan_start_rad, true, "scan start (rad)"),
        F64_KEY("scan_stop_rad", scan_stop_rad, true, "scan stop, exclusive (rad)"),
        U64_KEY("scan_steps", scan_steps, true, "number of scan points"),
        STR_KEY("scan_mode", scan_mode, true, "analytic | event | both"),
        F64_KEY("chsh_a_rad", chsh.a_rad, true, "CHSH setting a (rad)"),
        F64_KEY("chsh_a_prime_rad", chsh.a_prime_rad, true, "CHSH setting a' (rad)"),
        F64_KEY("chsh_b_rad", chsh.b_rad, true, "CHSH setting b (rad)"),
        F64_KEY("chsh_b_prime_rad", chsh.b_prime_rad, true, "CHSH setting b' (rad)"),
        STR_KEY("tag_format", tag_format, false, "time-tag file format: csv | bin"),
        STR_KEY("out_dir", out_dir, false, "default output directory"),
    };
    return table;
}

#undef F64_KEY
#undef U64_KEY
#undef I64_KEY
#undef STR_KEY

const Accessor& find_accessor(std::string_view key) {
    for (const Accessor& a : accessors())
        if (a.spec.name == key) return a;
    throw_invalid("unknown config key '" + std::string(key) + "'");
}

} // namespace

const std::vector<ExperimentConfig::KeySpec>& ExperimentConfig::keys() {
    static const std::vector<KeySpec> specs = [] {
        std::vector<KeySpec> out;
        for (const Accessor& a : accessors()) out.push_back(a.spec);
        return out;
    }();
    return specs;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
    find_accessor(key).set(*this, value);
}

std::string ExperimentConfig::get(std::string_view key) const {
    return find_accessor(key).get(*this);
}

std::string ExperimentConfig::canonical_string() const {
    std::vector<std::pair<std::string_view, std::string>> entries;
    for (const Accessor& a : accessors())
        if (a.spec.hashed) entries.emplace_back(a.spec.name, a.get(*this));
    std::sort(entries.begin(), entries.end());
    std::string out;
    for (const auto& [k, v] : entries) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string ExperimentConfig::hash() const {
    const std::uint64_t h = rng::fnv1a64(canonical_string());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

std::string ExperimentConfig::to_json_string() const {
    nlohmann::ordered_json j;
    for (const Accessor& a : accessors()) {
        switch (a.spec.type) {
            case KeyType::f64:
                j[std::string(a.spec.name)] = parse_f64(a.spec.name, a.get(*this));
                break;
            case KeyType::u64:
                j[std::string(a.spec.name)] = parse_u64(a.spec.name, a.get(*this));
                break;
            case KeyType::i64:
                j[std::string(a.spec.name)] = parse_i64(a.spec.name, a.get(*this));
                break;
            case KeyType::str:
                j[std::string(a.spec.name)] = a.get(*this);
                break;
        }
    }
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_invalid(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw_invalid("config must be a flat JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        std::string text_value;
        if (value.is_string())
            text_value = value.get<std::string>();
        else if (value.is_number_unsigned())
            text_value = std::to_string(value.get<std::uint64_t>());
        else if (value.is_number_integer())
            text_value = std::to_string(value.get<std::int64_t>());
        else if (value.is_number_float())
            text_value = format_double(value.get<double>());
        else
            throw_invalid("config key '" + key + "' has an unsupported JSON type");
        cfg.set(key, text_value);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

void ExperimentConfig::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot write config file '" + path + "'");
    out << to_json_string();
    if (!out) throw_io("failed while writing config file '" + path + "'");
}

void ExperimentConfig::validate() const {
    source.validate();
    detector.validate();
    if (!(delta_l_mm > 0.0)) throw_invalid("delta_l_mm must be > 0");
    if (n_pairs < 1) throw_invalid("n_pairs must be >= 1");
    if (!(mean_rate_hz > 0.0)) throw_invalid("mean_rate_hz must be > 0");
    if (!(min_factor > 0.0)) throw_invalid("min_factor must be > 0");
    if (window_half_width_ps <= 0) throw_invalid("window_half_width_ps must be > 0");
    if (hist_bin_width_ps <= 0) throw_invalid("hist_bin_width_ps must be > 0");
    if (hist_range_ps <= 0) throw_invalid("hist_range_ps must be > 0");
    if (scan_variable != "phi_a" && scan_variable != "phi_b" && scan_variable != "joint" &&
        scan_variable != "locked")
        throw_invalid("scan_variable must be phi_a, phi_b, joint or locked");
    if (scan_mode != "analytic" && scan_mode != "event" && scan_mode != "both")
        throw_invalid("scan_mode must be analytic, event or both");
    if (tag_format != "csv" && tag_format != "bin") throw_invalid("tag_format must be csv or bin");
    if (!(scan_stop_rad > scan_start_rad)) throw_invalid("scan_stop_rad must exceed scan_start_rad");
}

NmziConfig ExperimentConfig::alice_nmzi() const {
    return nmzi(Party::alice, delta_l_mm, phi_a_rad);
}

NmziConfig ExperimentConfig::bob_nmzi() const {
    return nmzi(Party::bob, delta_l_mm, phi_b_rad);
}

} // namespace franson
