#pragma once

#include <array>
#include <complex>
#include <cstddef>

#include "franson/spectral.hpp"

namespace franson {

enum class Party { alice, bob };

// One unbalanced Mach-Zehnder interferometer: path imbalance delta_L = L - S
// plus an experimenter-controlled phase plate on the long arm. The static
// 2*pi*f0*tau term is absorbed into the phase plate; only per-pair detuning
// and pump jitter contribute phase spread.
struct NmziConfig {
    double delta_l_mm = 30.0;
    double phase_plate_rad = 0.0; // canonical range [0, 2*pi)
    Party label = Party::alice;

    double tau_ps() const { return delta_l_mm / speed_of_light_mm_per_ps; }
    void validate() const;
};

// Factory that canonicalizes the phase into [0, 2*pi).
NmziConfig nmzi(Party label, double delta_l_mm, double phase_plate_rad);

// Complex coefficients on the |S> and |L> path states for one output port.
struct PathAmplitudes {
    std::complex<double> s;
    std::complex<double> l;

    double norm() const { return std::norm(s) + std::norm(l); }
};

// Both output ports of one NMZI. Port ids are global: Alice owns 1 and 2,
// Bob owns 3 and 4; the odd port of each party carries the relative minus.
struct PortAmplitudes {
    PathAmplitudes minus_port; // detector 1 (Alice) or 3 (Bob)
    PathAmplitudes plus_port;  // detector 2 (Alice) or 4 (Bob)
    int minus_port_id = 1;
    int plus_port_id = 2;

    const PathAmplitudes& port(int port_id) const;
};

// Arrival-time slots of the joint detection, labelled by tau_AB = t_A - t_B:
// sl = Alice short / Bob long (-tau), ls = the mirror (+tau), central = the
// coherent S-S / L-L class at tau_AB = 0.
enum class TimeSlot { sl = 0, central = 1, ls = 2 };

// One of the 12 joint detection classes (2 Alice ports x 2 Bob ports x 3
// slots). `long_long` disambiguates the absolute delay of a CENTRAL outcome
// (S-S vs L-L) and is meaningful only there.
struct JointOutcome {
    int port_a = 1; // 1 or 2
    int port_b = 3; // 3 or 4
    TimeSlot slot = TimeSlot::central;
    bool long_long = false;
};

// Per-pair joint distribution over (port_a, port_b, slot). Side slots are
// flat at 1/16; the central slot interferes in the joint phase only, so the
// port marginals stay at 1/2 regardless of every dial.
struct ProbabilityTable {
    double phi_a_rad = 0.0;
    double phi_b_rad = 0.0;
    double phi_j = 0.0;       // Alice per-pair phase
    double psi_j = 0.0;       // Bob per-pair phase
    double joint_phase = 0.0; // phi_j + psi_j; detuning cancels exactly
    std::array<double, 12> p{};

    static std::size_t index(int port_a, int port_b, TimeSlot slot);
    static JointOutcome outcome_at(std::size_t index);

    double probability(int port_a, int port_b, TimeSlot slot) const {
        return p[index(port_a, port_b, slot)];
    }
    double probability(const JointOutcome& o) const {
        return probability(o.port_a, o.port_b, o.slot);
    }
    double sum() const;
    double slot_marginal(TimeSlot slot) const;
    double port_marginal(int port_id) const;
};

// -1 for the odd ports (1, 3), +1 for the even ports (2, 4).
int port_sign(int port);

// Output amplitudes of one NMZI at a given long-arm phase. global_phase_rad
// is the overall phase picked up in the interferometer; it cancels in every
// modulus and is exposed only so that cancellation can be tested.
PortAmplitudes port_amplitudes(const NmziConfig& cfg, double phase_rad,
                               double global_phase_rad = 0.0);

// Single-pair detection probability (units of I0 = 1) at one port when the
// photon coherence covers both paths: (1 -+ cos phase) / 2.
double local_intensity(int port, double phase_rad);

// Ensemble-mean local intensity (1 -+ V_loc cos base_phase) / 2 with
// V_loc = exp(-2 pi^2 sigma_d^2 tau^2): flat in the wideband regime, a full
// fringe as delta_f -> 0.
double local_mean_intensity(int port, double base_phase_rad, const SpectralModel& model,
                            double delta_l_mm);

// Fringe degradation factors.
double local_visibility(const SpectralModel& model, double delta_l_mm); // detuning spread
double pump_visibility(const SpectralModel& model, double delta_l_mm);  // pump jitter

// Per-pair phases. The detuning enters Alice and Bob with opposite signs and
// the pump jitter splits evenly, so the joint phase depends on the jitter
// alone; it is computed directly from the jitter to keep that cancellation
// exact.
struct PairPhases {
    double phi_j;
    double psi_j;
    double joint;
};
PairPhases pair_phases(const NmziConfig& alice, const NmziConfig& bob, const PairSample& pair);

ProbabilityTable joint_probability_table(const NmziConfig& alice, const NmziConfig& bob,
                                         const PairSample& pair);

// Ensemble-mean coincidence rate in the central slot for one port pair:
// (1 +- V_p cos(phi_A + phi_B)) / 8, minus sign for pairs (1,4) and (2,3).
double gated_correlation_mean(double phi_a_rad, double phi_b_rad, const SpectralModel& model,
                              double delta_l_mm, int port_a, int port_b);

// Without coincidence selection the intensity product is separable.
// `factorized` multiplies the two uniform local means (flat at 1/4 in the
// wideband regime); `paired` averages the per-pair product exactly, which
// retains a half-visibility fringe in the sum phase. The gap between the two
// estimators is reported, not hidden.
enum class UngatedEstimator { factorized, paired };

double ungated_correlation_mean(double phi_a_rad, double phi_b_rad, const SpectralModel& model,
                                double delta_l_mm, int port_a, int port_b,
                                UngatedEstimator estimator);

} // namespace franson
