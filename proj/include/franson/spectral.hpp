#pragma once

#include <cstdint>
#include <vector>

#include "franson/units.hpp"

namespace franson {

// Gaussian ensemble description of the SPDC pair source. Signal and idler sit
// symmetrically about f0; their sum frequency tracks the pump, whose linewidth
// sets the two-photon coherence length.
struct SpectralModel {
    double f0_thz = 193.4;            // optical center frequency
    double delta_f_thz = 1.0;         // FWHM of the signal/idler detuning spread
    double pump_linewidth_ghz = 1.0;  // FWHM of the pump (sum-frequency) jitter

    double detuning_sigma_thz() const { return delta_f_thz * fwhm_to_sigma; }
    double pump_sigma_thz() const { return pump_linewidth_ghz * ghz_to_thz * fwhm_to_sigma; }

    // Two-photon coherence length c / pump linewidth (1 GHz -> ~300 mm).
    // Infinite for a monochromatic pump.
    double coherence_length_mm() const;

    // Single-photon time-slot width 1 / delta_f.
    double slot_time_ps() const { return 1.0 / delta_f_thz; }

    void validate() const;
};

// One emitted pair. Signal frequency f0 + detuning + jitter/2, idler
// f0 - detuning + jitter/2, so the sum is 2*f0 + jitter exactly.
struct PairSample {
    std::uint64_t id = 0;
    double t_emit_ps = 0.0;
    double detuning_thz = 0.0;    // signed signal detuning
    double pump_jitter_ghz = 0.0; // signed sum-frequency jitter

    double pump_jitter_thz() const { return pump_jitter_ghz * ghz_to_thz; }
    double signal_frequency_thz(const SpectralModel& m) const {
        return m.f0_thz + detuning_thz + 0.5 * pump_jitter_thz();
    }
    double idler_frequency_thz(const SpectralModel& m) const {
        return m.f0_thz - detuning_thz + 0.5 * pump_jitter_thz();
    }
};

// Operating-regime verdicts for one interferometer imbalance delta_L.
// Condition A (decoherence): delta_f * tau clears min_factor * pi, so local
// fringes wash out. Condition B (pair coherence): the two-photon coherence
// length covers min_factor interferometer imbalances. Event mode additionally
// needs the three arrival slots separable against slot width and jitter.
struct RegimeReport {
    double delta_l_mm = 0.0;
    double tau_ps = 0.0; // delta_L / c
    double min_factor = 10.0;
    double jitter_sigma_ps = 0.0;
    double ratio_decoherence = 0.0; // delta_f * tau
    double ratio_coherence = 0.0;   // delta_L / l_c
    double coherence_length_mm = 0.0;
    double slot_time_ps = 0.0;
    bool decoherence_ok = false;
    bool coherence_ok = false;
    bool event_mode_allowed = false;
};

// Draw n pairs: Gaussian detuning (FWHM delta_f), Gaussian pump jitter
// (FWHM pump_linewidth), homogeneous Poisson emission times at mean_rate_hz.
// Bit-identical output for identical (model, n, mean_rate_hz, seed).
std::vector<PairSample> sample_pairs(const SpectralModel& model, std::uint64_t n,
                                     double mean_rate_hz, std::uint64_t seed);

RegimeReport validate_regime(const SpectralModel& model, double delta_l_mm,
                             double min_factor = 10.0, double jitter_sigma_ps = 0.0);

} // namespace franson
