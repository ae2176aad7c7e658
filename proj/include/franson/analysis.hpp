#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "franson/units.hpp"

namespace franson {

// One swept observable set: phase grid plus named columns, in emission order.
struct FringeScan {
    std::string variable; // "phi_a", "phi_b", "joint" (sum) or "locked" (phi_a == phi_b)
    std::vector<double> phase_rad;
    std::vector<std::pair<std::string, std::vector<double>>> columns;

    const std::vector<double>& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    void add_column(std::string name, std::vector<double> values);
    // >= 8 points spanning >= 2*pi of the scanned variable, columns rectangular.
    void validate() const;
};

// Least-squares fit of r(x) = mean * (1 + V cos(x + offset)). Visibility is
// reported in [0, 1] with the sign folded into the offset.
struct FringeFit {
    double visibility = 0.0;
    double phase_offset_rad = 0.0;
    double mean_level = 0.0;
    double rms_residual = 0.0; // RMS misfit relative to mean_level
    bool phase_identifiable = true;
};

FringeFit fit_fringe(std::span<const double> phase_rad, std::span<const double> rate);
FringeFit fit_fringe(const FringeScan& scan, const std::string& observable);

// Best-fit modulation frequency k of r(x) = m (1 + V cos(k x + c)): coarse
// grid over [k_min, k_max] with parabolic refinement of the residual minimum.
double fit_fringe_frequency(std::span<const double> phase_rad, std::span<const double> rate,
                            double k_min = 0.25, double k_max = 4.0);

// Gated coincidence counts for the four port pairs.
struct PortPairCounts {
    double n13 = 0.0;
    double n14 = 0.0;
    double n23 = 0.0;
    double n24 = 0.0;

    double total() const { return n13 + n14 + n23 + n24; }
};

// E = (N13 + N24 - N14 - N23) / total; analytic expectation V_p cos(phi_A + phi_B).
double correlation_E(const PortPairCounts& counts);
double correlation_E_stderr(const PortPairCounts& counts);

// Dial settings for the four CHSH terms. The defaults realize |S| = 2 sqrt(2)
// for E = cos(phi_A + phi_B) under the standard combination
// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
struct ChshSettings {
    double a_rad = 0.0;
    double a_prime_rad = pi / 2.0;
    double b_rad = 3.0 * pi / 4.0;
    double b_prime_rad = pi / 4.0;

    // Phase pairs in term order (a,b), (a,b'), (a',b), (a',b').
    std::array<std::pair<double, double>, 4> setting_pairs() const;
};

struct ChshResult {
    ChshSettings settings;
    std::array<PortPairCounts, 4> counts{};
    std::array<double, 4> e{};
    std::array<double, 4> e_stderr{};
    double s = 0.0;
    double s_stderr = 0.0;

    bool violates_classical_bound() const { return s > 2.0; }
};

// S from four correlation values, term order as above.
double chsh_s_value(const std::array<double, 4>& e);

ChshResult chsh_S(const ChshSettings& settings, const std::array<PortPairCounts, 4>& counts);

// Analytic-vs-Monte-Carlo comparison rows. Informational rows document known
// model gaps and are excluded from the flag summary.
struct CompareRow {
    std::string name;
    double analytic = 0.0;
    double mc = 0.0;
    double mc_stderr = 0.0;
    double z = 0.0;
    bool flagged = false;
    bool informational = false;
    std::string note;
};

struct CompareReport {
    std::string config_hash;
    std::vector<CompareRow> rows;
    bool any_flagged = false;
    double max_abs_z = 0.0;
};

CompareRow compare_row(std::string name, double analytic, double mc, double mc_stderr);
CompareRow info_row(std::string name, double analytic, double mc, std::string note);

// Assemble and flag; refuses rows built from different configurations.
CompareReport build_compare_report(const std::string& analytic_config_hash,
                                   const std::string& mc_config_hash,
                                   std::vector<CompareRow> rows);

} // namespace franson
