#include "franson/spectral.hpp"

#include <limits>
#include <string>

#include "franson/error.hpp"
#include "franson/rng.hpp"

namespace franson {

namespace {

// Chunk size for substream derivation. Chunks are seeded independently, so
// batch generation can run chunk-parallel without changing the output; only
// the emission-time prefix sum is sequential.
constexpr std::uint64_t kChunkSize = 1u << 16;

// The ">>" / "<<" comparisons carry a small relative slack. The stock
// operating point (pump 1 GHz, delta_L 30 mm) sits right on the coherence
// boundary: l_c = 299.792458 mm against min_factor * delta_L = 300 mm.
constexpr double kRegimeSlack = 0.01;

} // namespace

double SpectralModel::coherence_length_mm() const {
    if (pump_linewidth_ghz == 0.0) return std::numeric_limits<double>::infinity();
    return speed_of_light_mm_per_ps / (pump_linewidth_ghz * ghz_to_thz);
}

void SpectralModel::validate() const {
    if (!(f0_thz > 0.0)) throw_invalid("f0_thz must be > 0");
    if (!(delta_f_thz > 0.0)) throw_invalid("delta_f_thz must be > 0");
    if (!(pump_linewidth_ghz >= 0.0)) throw_invalid("pump_linewidth_ghz must be >= 0");
}

std::vector<PairSample> sample_pairs(const SpectralModel& model, std::uint64_t n,
                                     double mean_rate_hz, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw_invalid("sample_pairs: n must be >= 1");
    if (!(mean_rate_hz > 0.0)) throw_invalid("sample_pairs: mean_rate_hz must be > 0");

    const double mean_gap_ps = 1.0e12 / mean_rate_hz;
    const double sigma_d = model.detuning_sigma_thz();
    const double sigma_p_ghz = model.pump_linewidth_ghz * fwhm_to_sigma;

    std::vector<PairSample> out(n);
    std::uint64_t i = 0;
    for (std::uint64_t chunk = 0; i < n; ++chunk) {
        rng::Stream s(rng::derive_seed(seed, "pairs", chunk));
        for (std::uint64_t k = 0; k < kChunkSize && i < n; ++k, ++i) {
            PairSample& p = out[i];
            p.id = i;
            p.t_emit_ps = s.exponential(mean_gap_ps); // inter-arrival gap for now
            p.detuning_thz = s.normal(0.0, sigma_d);
            p.pump_jitter_ghz = s.normal(0.0, sigma_p_ghz);
        }
    }

    double t = 0.0;
    for (PairSample& p : out) {
        t += p.t_emit_ps;
        p.t_emit_ps = t;
    }
    return out;
}

RegimeReport validate_regime(const SpectralModel& model, double delta_l_mm,
                             double min_factor, double jitter_sigma_ps) {
    model.validate();
    if (!(delta_l_mm > 0.0)) throw_invalid("validate_regime: delta_l_mm must be > 0");
    if (!(min_factor > 0.0)) throw_invalid("validate_regime: min_factor must be > 0");
    if (!(jitter_sigma_ps >= 0.0)) throw_invalid("validate_regime: jitter_sigma_ps must be >= 0");

    RegimeReport r;
    r.delta_l_mm = delta_l_mm;
    r.tau_ps = delta_l_mm / speed_of_light_mm_per_ps;
    r.min_factor = min_factor;
    r.jitter_sigma_ps = jitter_sigma_ps;
    r.ratio_decoherence = model.delta_f_thz * r.tau_ps;
    r.coherence_length_mm = model.coherence_length_mm();
    r.ratio_coherence = delta_l_mm / r.coherence_length_mm; // 0 for a monochromatic pump
    r.slot_time_ps = model.slot_time_ps();

    r.decoherence_ok = r.ratio_decoherence >= min_factor * pi * (1.0 - kRegimeSlack);
    r.coherence_ok = r.ratio_coherence * min_factor <= 1.0 + kRegimeSlack;
    const double slot_separation = min_factor * (r.slot_time_ps + jitter_sigma_ps);
    r.event_mode_allowed =
        r.decoherence_ok && r.coherence_ok && r.tau_ps >= slot_separation * (1.0 - kRegimeSlack);
    return r;
}

} // namespace franson
