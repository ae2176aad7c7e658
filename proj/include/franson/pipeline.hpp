#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "franson/analysis.hpp"
#include "franson/coincidence.hpp"
#include "franson/config.hpp"
#include "franson/spectral.hpp"

namespace franson::pipeline {

// ---- validate -------------------------------------------------------------

RegimeReport run_validate(const ExperimentConfig& cfg);
std::string regime_json(const RegimeReport& report, const ExperimentConfig& cfg);

// ---- simulate -------------------------------------------------------------

struct Simulation {
    std::array<TimeTagStream, 4> streams;
    double tau_ps = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    double phi_a_rad = 0.0;
    double phi_b_rad = 0.0;
};

Simulation simulate(const ExperimentConfig& cfg);
// Same run with the dials and seed overridden (per-setting CHSH runs, scans).
Simulation simulate_at(const ExperimentConfig& cfg, double phi_a_rad, double phi_b_rad,
                       std::uint64_t seed);

// Writes tags_ch1..tags_ch4 in the configured format; returns the paths.
std::array<std::string, 4> write_tag_files(const Simulation& sim, const std::string& out_dir,
                                           const std::string& format);
std::string simulate_json(const Simulation& sim, const std::array<std::string, 4>& paths,
                          const std::string& format);

// ---- coincide -------------------------------------------------------------

struct CoincideResult {
    std::string config_hash; // active configuration
    std::string input_hash;  // hash carried by the tag streams
    std::uint64_t input_seed = 0;
    double phi_a_rad = 0.0;
    double phi_b_rad = 0.0;
    double tau_ps = 0.0;
    std::int64_t window_half_width_ps = 0;
    DelayHistogram histogram;                        // merged Alice vs merged Bob
    std::array<std::uint64_t, 4> singles{};          // per channel
    std::array<std::uint64_t, 4> central_counts{};   // port pairs (1,3),(1,4),(2,3),(2,4)
    std::array<std::uint64_t, 4> sl_counts{};        // window at -tau, same order
    std::array<std::uint64_t, 4> ls_counts{};        // window at +tau

    PortPairCounts central_port_pair_counts() const;
};

CoincideResult coincide(const ExperimentConfig& cfg, const std::array<TimeTagStream, 4>& streams);
CoincideResult coincide_files(const ExperimentConfig& cfg,
                              const std::array<std::string, 4>& tag_paths);
void write_histogram_csv(const std::string& path, const DelayHistogram& histogram,
                         const std::string& config_hash);
std::string coincide_json(const CoincideResult& result);

// ---- scan -----------------------------------------------------------------

struct ScanResult {
    FringeScan scan; // phase grid is the swept variable x
    std::string config_hash;
    std::uint64_t seed = 0;
};

// Sweeps scan_steps points over [scan_start, scan_stop). Analytic columns are
// closed-form per-pair probabilities; event columns are counts from a fresh
// deterministic simulation per point (substream "scan-point", i).
ScanResult run_scan(const ExperimentConfig& cfg);
void write_scan_csv(const std::string& path, const ScanResult& result);
ScanResult read_scan_csv(const std::string& path);
std::string scan_json(const ScanResult& result);

// ---- chsh -----------------------------------------------------------------

struct ChshRun {
    ChshResult result;
    std::array<std::uint64_t, 4> setting_seeds{};
    std::array<std::string, 4> setting_hashes{};
    std::string config_hash;
};

// Full pipeline: per setting, simulate -> central-window match -> E; then S.
// Setting k uses the derived seed ("chsh-setting", k), and its streams carry
// the per-setting config hash, so each leg can be reproduced standalone with
// `simulate`.
ChshRun run_chsh(const ExperimentConfig& cfg);
// Same result from four saved coincide JSON documents (term order
// (a,b), (a,b'), (a',b), (a',b')); refuses inputs whose config hashes do not
// match the expected per-setting configurations.
ChshRun chsh_from_coincide_files(const ExperimentConfig& cfg,
                                 const std::array<std::string, 4>& json_paths);
std::string chsh_json(const ChshRun& run);

// ---- compare --------------------------------------------------------------

CompareReport run_compare(const ExperimentConfig& cfg);
// Uses a previously written event-mode scan CSV as the Monte Carlo side,
// pooling counts across scan points; refuses a file with a different hash.
CompareReport compare_with_scan_file(const ExperimentConfig& cfg, const std::string& scan_csv);
std::string compare_json(const CompareReport& report);

} // namespace franson::pipeline
