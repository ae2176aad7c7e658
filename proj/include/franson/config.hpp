#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "franson/analysis.hpp"
#include "franson/event_sim.hpp"
#include "franson/spectral.hpp"

namespace franson {

// Flat, typed key-value experiment description. Every key is addressable by
// name (the CLI mirrors them as flags) and carries its unit in the name.
// The canonical content hash covers every key that can influence results;
// out_dir and tag_format only steer where/how bytes land and are excluded,
// so re-running an experiment into a different directory keeps its identity.
struct ExperimentConfig {
    SpectralModel source;
    double delta_l_mm = 30.0;
    double phi_a_rad = 0.0;
    double phi_b_rad = 0.0;
    DetectorModel detector;
    std::uint64_t n_pairs = 1000000;
    double mean_rate_hz = 1.0e6;
    std::uint64_t seed = 1;
    double min_factor = 10.0;
    std::int64_t window_half_width_ps = 25;
    std::int64_t hist_bin_width_ps = 2;
    std::int64_t hist_range_ps = 200;
    std::string scan_variable = "phi_a"; // phi_a | phi_b | joint | locked
    double scan_start_rad = 0.0;
    double scan_stop_rad = two_pi;
    std::uint64_t scan_steps = 16;
    std::string scan_mode = "both"; // analytic | event | both
    ChshSettings chsh;
    std::string tag_format = "csv"; // csv | bin
    std::string out_dir = "franson_out";

    enum class KeyType { f64, u64, i64, str };
    struct KeySpec {
        std::string_view name;
        KeyType type;
        bool hashed;
        std::string_view doc;
    };
    static const std::vector<KeySpec>& keys();

    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    // "key=value" lines for hashed keys, sorted by key; doubles in shortest
    // round-trip form so the hash is format-stable.
    std::string canonical_string() const;
    std::string hash() const; // 16 lowercase hex digits

    std::string to_json_string() const; // flat JSON object, all keys
    static ExperimentConfig from_json_string(const std::string& text);
    static ExperimentConfig load_file(const std::string& path);
    void save_file(const std::string& path) const;

    void validate() const;

    NmziConfig alice_nmzi() const;
    NmziConfig bob_nmzi() const;
};

// Shortest round-trip decimal form of a double (also used by CSV emitters).
std::string format_double(double value);

} // namespace franson
