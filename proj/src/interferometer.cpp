#include "franson/interferometer.hpp"

#include <cmath>
#include <string>

#include "franson/error.hpp"

namespace franson {

namespace {

void require_port_pair(int port_a, int port_b) {
    if (port_a != 1 && port_a != 2) throw_invalid("port_a must be 1 or 2");
    if (port_b != 3 && port_b != 4) throw_invalid("port_b must be 3 or 4");
}

void require_matched(const NmziConfig& alice, const NmziConfig& bob) {
    if (alice.label != Party::alice || bob.label != Party::bob)
        throw_invalid("expected an (alice, bob) interferometer pair");
    if (alice.delta_l_mm != bob.delta_l_mm)
        throw_invalid("matched interferometers required: delta_L differs between parties");
}

} // namespace

void NmziConfig::validate() const {
    if (!(delta_l_mm > 0.0)) throw_invalid("delta_l_mm must be > 0");
    if (!(phase_plate_rad >= 0.0 && phase_plate_rad < two_pi))
        throw_invalid("phase_plate_rad must lie in [0, 2*pi); use nmzi() to canonicalize");
}

NmziConfig nmzi(Party label, double delta_l_mm, double phase_plate_rad) {
    NmziConfig cfg{delta_l_mm, wrap_phase(phase_plate_rad), label};
    cfg.validate();
    return cfg;
}

int port_sign(int port) {
    switch (port) {
        case 1:
        case 3:
            return -1;
        case 2:
        case 4:
            return +1;
    }
    throw_invalid("port id must be in 1..4, got " + std::to_string(port));
}

const PathAmplitudes& PortAmplitudes::port(int port_id) const {
    if (port_id == minus_port_id) return minus_port;
    if (port_id == plus_port_id) return plus_port;
    throw_invalid("port id " + std::to_string(port_id) + " does not belong to this NMZI");
}

PortAmplitudes port_amplitudes(const NmziConfig& cfg, double phase_rad,
                               double global_phase_rad) {
    if (!(cfg.delta_l_mm > 0.0)) throw_invalid("delta_l_mm must be > 0");
    const std::complex<double> eta = std::polar(1.0, global_phase_rad);
    const std::complex<double> arm = std::polar(1.0, phase_rad);
    const std::complex<double> i(0.0, 1.0);

    PortAmplitudes out;
    out.minus_port = {0.5 * eta, -0.5 * eta * arm};
    out.plus_port = {0.5 * i * eta, 0.5 * i * eta * arm};
    if (cfg.label == Party::bob) {
        out.minus_port_id = 3;
        out.plus_port_id = 4;
    }
    return out;
}

double local_intensity(int port, double phase_rad) {
    return 0.5 * (1.0 + port_sign(port) * std::cos(phase_rad));
}

double local_visibility(const SpectralModel& model, double delta_l_mm) {
    if (!(delta_l_mm > 0.0)) throw_invalid("delta_l_mm must be > 0");
    const double tau = delta_l_mm / speed_of_light_mm_per_ps;
    const double spread = two_pi * model.detuning_sigma_thz() * tau;
    return std::exp(-0.5 * spread * spread);
}

double pump_visibility(const SpectralModel& model, double delta_l_mm) {
    if (!(delta_l_mm > 0.0)) throw_invalid("delta_l_mm must be > 0");
    const double tau = delta_l_mm / speed_of_light_mm_per_ps;
    const double spread = two_pi * model.pump_sigma_thz() * tau;
    return std::exp(-0.5 * spread * spread);
}

double local_mean_intensity(int port, double base_phase_rad, const SpectralModel& model,
                            double delta_l_mm) {
    model.validate();
    const double v = local_visibility(model, delta_l_mm);
    return 0.5 * (1.0 + port_sign(port) * v * std::cos(base_phase_rad));
}

PairPhases pair_phases(const NmziConfig& alice, const NmziConfig& bob, const PairSample& pair) {
    const double tau = alice.tau_ps();
    const double eps = pair.pump_jitter_thz();
    PairPhases ph{};
    ph.phi_j = alice.phase_plate_rad + two_pi * tau * (pair.detuning_thz + 0.5 * eps);
    ph.psi_j = bob.phase_plate_rad + two_pi * tau * (-pair.detuning_thz + 0.5 * eps);
    ph.joint = alice.phase_plate_rad + bob.phase_plate_rad + two_pi * tau * eps;
    return ph;
}

std::size_t ProbabilityTable::index(int port_a, int port_b, TimeSlot slot) {
    require_port_pair(port_a, port_b);
    return static_cast<std::size_t>(((port_a - 1) * 2 + (port_b - 3)) * 3) +
           static_cast<std::size_t>(slot);
}

JointOutcome ProbabilityTable::outcome_at(std::size_t index) {
    if (index >= 12) throw_invalid("outcome index out of range");
    JointOutcome o;
    o.slot = static_cast<TimeSlot>(index % 3);
    const std::size_t pp = index / 3;
    o.port_a = static_cast<int>(pp / 2) + 1;
    o.port_b = static_cast<int>(pp % 2) + 3;
    return o;
}

double ProbabilityTable::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

double ProbabilityTable::slot_marginal(TimeSlot slot) const {
    double s = 0.0;
    for (int pa : {1, 2})
        for (int pb : {3, 4}) s += probability(pa, pb, slot);
    return s;
}

double ProbabilityTable::port_marginal(int port_id) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const JointOutcome o = outcome_at(i);
        if (o.port_a == port_id || o.port_b == port_id) s += p[i];
    }
    return s;
}

ProbabilityTable joint_probability_table(const NmziConfig& alice, const NmziConfig& bob,
                                         const PairSample& pair) {
    alice.validate();
    bob.validate();
    require_matched(alice, bob);

    const PairPhases ph = pair_phases(alice, bob, pair);
    ProbabilityTable t;
    t.phi_a_rad = alice.phase_plate_rad;
    t.phi_b_rad = bob.phase_plate_rad;
    t.phi_j = ph.phi_j;
    t.psi_j = ph.psi_j;
    t.joint_phase = ph.joint;

    // Side slots come from a single path product each, |1/2 * 1/2|^2 = 1/16.
    // The central slot is the coherent S-S + L-L sum: |1 +- e^{i Phi}|^2 / 16.
    const double q = 0.125 * std::cos(ph.joint);
    for (int pa : {1, 2}) {
        for (int pb : {3, 4}) {
            t.p[ProbabilityTable::index(pa, pb, TimeSlot::sl)] = 1.0 / 16.0;
            t.p[ProbabilityTable::index(pa, pb, TimeSlot::ls)] = 1.0 / 16.0;
            const double sign = port_sign(pa) * port_sign(pb);
            t.p[ProbabilityTable::index(pa, pb, TimeSlot::central)] = 0.125 + sign * q;
        }
    }
    return t;
}

double gated_correlation_mean(double phi_a_rad, double phi_b_rad, const SpectralModel& model,
                              double delta_l_mm, int port_a, int port_b) {
    require_port_pair(port_a, port_b);
    model.validate();
    const double sign = port_sign(port_a) * port_sign(port_b);
    const double v = pump_visibility(model, delta_l_mm);
    return 0.125 * (1.0 + sign * v * std::cos(phi_a_rad + phi_b_rad));
}

double ungated_correlation_mean(double phi_a_rad, double phi_b_rad, const SpectralModel& model,
                                double delta_l_mm, int port_a, int port_b,
                                UngatedEstimator estimator) {
    require_port_pair(port_a, port_b);
    model.validate();

    if (estimator == UngatedEstimator::factorized) {
        return local_mean_intensity(port_a, phi_a_rad, model, delta_l_mm) *
               local_mean_intensity(port_b, phi_b_rad, model, delta_l_mm);
    }

    // Exact Gaussian average of (1 + sa cos phi_j)(1 + sb cos psi_j) / 4.
    // The single-party terms and the difference-phase term die off with the
    // detuning spread; the sum-phase term survives at half weight with the
    // pump visibility, which is what separates this estimator from the
    // factorized one.
    const double tau = delta_l_mm / speed_of_light_mm_per_ps;
    const double sa = port_sign(port_a);
    const double sb = port_sign(port_b);
    const double sd = model.detuning_sigma_thz();
    const double sp = model.pump_sigma_thz();

    const double spread_local = two_pi * tau * std::sqrt(sd * sd + 0.25 * sp * sp);
    const double v_local = std::exp(-0.5 * spread_local * spread_local);
    const double v_sum = pump_visibility(model, delta_l_mm);
    const double spread_diff = 2.0 * two_pi * tau * sd;
    const double v_diff = std::exp(-0.5 * spread_diff * spread_diff);

    return 0.25 * (1.0 + sa * v_local * std::cos(phi_a_rad) + sb * v_local * std::cos(phi_b_rad) +
                   sa * sb * 0.5 *
                       (v_sum * std::cos(phi_a_rad + phi_b_rad) +
                        v_diff * std::cos(phi_a_rad - phi_b_rad)));
}

} // namespace franson
