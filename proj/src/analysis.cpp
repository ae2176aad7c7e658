#include "franson/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "franson/error.hpp"

namespace franson {

namespace {

constexpr double kUnidentifiable = 1e-12;

struct HarmonicFit {
    double mean = 0.0;
    double a_cos = 0.0;
    double b_sin = 0.0;
    double sse = 0.0;
};

// Least squares for y ~ m + A cos(k x) + B sin(k x) via 3x3 normal equations.
HarmonicFit fit_harmonic(std::span<const double> x, std::span<const double> y, double k) {
    const std::size_t n = x.size();
    double sc = 0, ss = 0, scc = 0, sss = 0, scs = 0, sy = 0, syc = 0, sys = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(k * x[i]);
        const double s = std::sin(k * x[i]);
        sc += c;
        ss += s;
        scc += c * c;
        sss += s * s;
        scs += c * s;
        sy += y[i];
        syc += y[i] * c;
        sys += y[i] * s;
    }
    double m[3][4] = {{static_cast<double>(n), sc, ss, sy},
                      {sc, scc, scs, syc},
                      {ss, scs, sss, sys}};
    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        if (std::abs(m[col][col]) < 1e-300) throw_invalid("fit_fringe: singular design matrix");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    HarmonicFit fit;
    fit.mean = m[0][3] / m[0][0];
    fit.a_cos = m[1][3] / m[1][1];
    fit.b_sin = m[2][3] / m[2][2];
    for (std::size_t i = 0; i < n; ++i) {
        const double pred =
            fit.mean + fit.a_cos * std::cos(k * x[i]) + fit.b_sin * std::sin(k * x[i]);
        const double r = y[i] - pred;
        fit.sse += r * r;
    }
    return fit;
}

} // namespace

const std::vector<double>& FringeScan::column(const std::string& name) const {
    for (const auto& [n, v] : columns)
        if (n == name) return v;
    throw_invalid("scan has no column named '" + name + "'");
}

bool FringeScan::has_column(const std::string& name) const {
    for (const auto& [n, v] : columns)
        if (n == name) return true;
    return false;
}

void FringeScan::add_column(std::string name, std::vector<double> values) {
    if (values.size() != phase_rad.size())
        throw_invalid("scan column '" + name + "' length does not match the phase grid");
    columns.emplace_back(std::move(name), std::move(values));
}

void FringeScan::validate() const {
    if (phase_rad.size() < 8) throw_invalid("scan needs at least 8 phase points");
    const auto [lo, hi] = std::minmax_element(phase_rad.begin(), phase_rad.end());
    const std::size_t n = phase_rad.size();
    // Uniform endpoint-exclusive grids span a full period once the implied
    // step is counted.
    const double span = (*hi - *lo) * static_cast<double>(n) / static_cast<double>(n - 1);
    if (span < two_pi * (1.0 - 1e-9)) throw_invalid("scan must span at least 2*pi");
    for (const auto& [name, v] : columns)
        if (v.size() != n) throw_invalid("scan column '" + name + "' is ragged");
}

FringeFit fit_fringe(std::span<const double> phase_rad, std::span<const double> rate) {
    if (phase_rad.size() != rate.size()) throw_invalid("fit_fringe: length mismatch");
    if (phase_rad.size() < 4) throw_invalid("fit_fringe: need at least 4 points");

    const HarmonicFit h = fit_harmonic(phase_rad, rate, 1.0);
    FringeFit fit;
    fit.mean_level = h.mean;
    const double amp = std::hypot(h.a_cos, h.b_sin);
    if (std::abs(h.mean) < 1e-300 || amp / std::abs(h.mean) < kUnidentifiable) {
        fit.visibility = 0.0;
        fit.phase_offset_rad = 0.0;
        fit.phase_identifiable = false;
    } else {
        fit.visibility = std::min(amp / std::abs(h.mean), 1.0);
        fit.phase_offset_rad = wrap_phase(std::atan2(-h.b_sin, h.a_cos));
    }
    fit.rms_residual = std::abs(h.mean) > 0.0
                           ? std::sqrt(h.sse / static_cast<double>(rate.size())) / std::abs(h.mean)
                           : 0.0;
    return fit;
}

FringeFit fit_fringe(const FringeScan& scan, const std::string& observable) {
    scan.validate();
    return fit_fringe(scan.phase_rad, scan.column(observable));
}

double fit_fringe_frequency(std::span<const double> phase_rad, std::span<const double> rate,
                            double k_min, double k_max) {
    if (phase_rad.size() != rate.size()) throw_invalid("fit_fringe_frequency: length mismatch");
    if (phase_rad.size() < 8) throw_invalid("fit_fringe_frequency: need at least 8 points");
    if (!(k_min > 0.0 && k_max > k_min)) throw_invalid("fit_fringe_frequency: bad k range");

    const double step = 0.005;
    double best_k = k_min;
    double best_sse = std::numeric_limits<double>::infinity();
    for (double k = k_min; k <= k_max + 1e-12; k += step) {
        const double sse = fit_harmonic(phase_rad, rate, k).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_k = k;
        }
    }
    // Parabolic refinement around the grid minimum.
    const double k0 = std::max(k_min, best_k - step);
    const double k2 = std::min(k_max, best_k + step);
    const double f0 = fit_harmonic(phase_rad, rate, k0).sse;
    const double f1 = best_sse;
    const double f2 = fit_harmonic(phase_rad, rate, k2).sse;
    const double denom = f0 - 2.0 * f1 + f2;
    if (k0 < best_k && best_k < k2 && denom > 0.0) {
        const double shift = 0.5 * (f0 - f2) / denom;
        return best_k + shift * step;
    }
    return best_k;
}

double correlation_E(const PortPairCounts& counts) {
    const double total = counts.total();
    if (!(total > 0.0)) throw_invalid("correlation_E: total counts must be > 0");
    return (counts.n13 + counts.n24 - counts.n14 - counts.n23) / total;
}

double correlation_E_stderr(const PortPairCounts& counts) {
    const double total = counts.total();
    if (!(total > 0.0)) throw_invalid("correlation_E_stderr: total counts must be > 0");
    const double e = correlation_E(counts);
    return std::sqrt(std::max(0.0, 1.0 - e * e) / total);
}

std::array<std::pair<double, double>, 4> ChshSettings::setting_pairs() const {
    return {{{a_rad, b_rad}, {a_rad, b_prime_rad}, {a_prime_rad, b_rad},
             {a_prime_rad, b_prime_rad}}};
}

double chsh_s_value(const std::array<double, 4>& e) {
    return std::abs(e[0] - e[1] + e[2] + e[3]);
}

ChshResult chsh_S(const ChshSettings& settings, const std::array<PortPairCounts, 4>& counts) {
    ChshResult r;
    r.settings = settings;
    r.counts = counts;
    double var = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        if (!(counts[k].total() > 0.0))
            throw_invalid("chsh_S: setting " + std::to_string(k) + " has no counts");
        r.e[k] = correlation_E(counts[k]);
        r.e_stderr[k] = correlation_E_stderr(counts[k]);
        var += r.e_stderr[k] * r.e_stderr[k];
    }
    r.s = chsh_s_value(r.e);
    r.s_stderr = std::sqrt(var);
    return r;
}

CompareRow compare_row(std::string name, double analytic, double mc, double mc_stderr) {
    CompareRow row;
    row.name = std::move(name);
    row.analytic = analytic;
    row.mc = mc;
    row.mc_stderr = mc_stderr;
    row.z = mc_stderr > 0.0 ? (mc - analytic) / mc_stderr : (mc == analytic ? 0.0 : std::numeric_limits<double>::infinity());
    row.flagged = std::abs(row.z) > 4.0;
    return row;
}

CompareRow info_row(std::string name, double analytic, double mc, std::string note) {
    CompareRow row;
    row.name = std::move(name);
    row.analytic = analytic;
    row.mc = mc;
    row.informational = true;
    row.note = std::move(note);
    return row;
}

CompareReport build_compare_report(const std::string& analytic_config_hash,
                                   const std::string& mc_config_hash,
                                   std::vector<CompareRow> rows) {
    if (analytic_config_hash != mc_config_hash)
        throw_invalid("compare: config hash mismatch (" + analytic_config_hash + " vs " +
                      mc_config_hash + ")");
    CompareReport report;
    report.config_hash = analytic_config_hash;
    report.rows = std::move(rows);
    for (const CompareRow& row : report.rows) {
        if (row.informational) continue;
        report.any_flagged = report.any_flagged || row.flagged;
        report.max_abs_z = std::max(report.max_abs_z, std::abs(row.z));
    }
    return report;
}

} // namespace franson
