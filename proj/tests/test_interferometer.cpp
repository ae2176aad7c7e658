#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "franson/error.hpp"
#include "franson/interferometer.hpp"
#include "franson/rng.hpp"
#include "oracles.hpp"

using namespace franson;

namespace {

SpectralModel stock_model() { return SpectralModel{193.4, 1.0, 1.0}; }

PairSample pair_with(double detuning_thz, double jitter_ghz) {
    PairSample p;
    p.detuning_thz = detuning_thz;
    p.pump_jitter_ghz = jitter_ghz;
    return p;
}

} // namespace

TEST_CASE("port amplitudes at phase 0 have the textbook sign structure") {
    const NmziConfig cfg = nmzi(Party::alice, 30.0, 0.0);
    const PortAmplitudes amps = port_amplitudes(cfg, 0.0);
    CHECK(amps.minus_port_id == 1);
    CHECK(amps.plus_port_id == 2);
    CHECK(std::abs(amps.minus_port.s - std::complex<double>(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(amps.minus_port.l - std::complex<double>(-0.5, 0.0)) < 1e-15);
    CHECK(std::abs(amps.plus_port.s - std::complex<double>(0.0, 0.5)) < 1e-15);
    CHECK(std::abs(amps.plus_port.l - std::complex<double>(0.0, 0.5)) < 1e-15);

    const PortAmplitudes bob = port_amplitudes(nmzi(Party::bob, 30.0, 0.0), 0.0);
    CHECK(bob.minus_port_id == 3);
    CHECK(bob.plus_port_id == 4);
}

TEST_CASE("each port carries half the intensity for any phase") {
    rng::Stream s(2);
    const NmziConfig cfg = nmzi(Party::alice, 30.0, 0.0);
    for (int k = 0; k < 200; ++k) {
        const double phase = (s.uniform() - 0.5) * 30.0;
        const double eta = (s.uniform() - 0.5) * 30.0;
        const PortAmplitudes amps = port_amplitudes(cfg, phase, eta);
        CHECK(amps.minus_port.norm() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(amps.plus_port.norm() == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("phase pi flips the minus port into |S> + |L> up to global phase") {
    const PortAmplitudes amps = port_amplitudes(nmzi(Party::alice, 30.0, 0.0), pi);
    // ratio l/s should be +1
    const std::complex<double> ratio = amps.minus_port.l / amps.minus_port.s;
    CHECK(std::abs(ratio - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("local intensity closed form") {
    CHECK(local_intensity(1, 0.0) == doctest::Approx(0.0));
    CHECK(local_intensity(2, 0.0) == doctest::Approx(1.0));
    CHECK(local_intensity(1, pi / 2.0) == doctest::Approx(0.5));
    CHECK(local_intensity(3, pi) == doctest::Approx(1.0));
    CHECK_THROWS_AS(local_intensity(5, 0.0), Error);
    CHECK_THROWS_AS(local_intensity(0, 0.0), Error);
}

TEST_CASE("wideband ensemble washes the local fringe out") {
    for (double phase : {0.0, 0.7, pi, 4.4}) {
        CHECK(local_mean_intensity(1, phase, stock_model(), 30.0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(local_mean_intensity(4, phase, stock_model(), 30.0) == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("vanishing bandwidth restores the full per-pair fringe") {
    SpectralModel m = stock_model();
    m.delta_f_thz = 1e-12;
    for (double phase : {0.0, 1.0, 2.5}) {
        CHECK(local_mean_intensity(1, phase, m, 30.0) ==
              doctest::Approx(0.5 * (1.0 - std::cos(phase))).epsilon(1e-12));
    }
}

TEST_CASE("narrowband local visibility against Monte Carlo") {
    SpectralModel m = stock_model();
    m.delta_f_thz = 0.001;
    const double v = local_visibility(m, 30.0);
    CHECK(v == doctest::Approx(0.9649).epsilon(2e-4));

    // Average of the per-pair fringe over sampled detunings must land on the
    // closed form within Monte Carlo error. The closed form averages over the
    // detuning alone, so the pump is pinned here; at delta_f comparable to
    // the pump linewidth the sum-frequency jitter adds its own (separate)
    // visibility factor.
    m.pump_linewidth_ghz = 0.0;
    const double base = 0.8;
    const auto pairs = sample_pairs(m, 200000, 1e6, 21);
    std::vector<double> samples;
    samples.reserve(pairs.size());
    const NmziConfig alice = nmzi(Party::alice, 30.0, base);
    const NmziConfig bob = nmzi(Party::bob, 30.0, 0.0);
    for (const auto& p : pairs)
        samples.push_back(local_intensity(1, pair_phases(alice, bob, p).phi_j));
    const auto stats = oracles::moments(samples);
    const double analytic = local_mean_intensity(1, base, m, 30.0);
    CHECK(std::abs(stats.mean - analytic) < 3.0 * stats.stderr_mean);
}

TEST_CASE("joint table matches the amplitude-product construction, eta and all") {
    rng::Stream s(8);
    for (int trial = 0; trial < 500; ++trial) {
        const double phi_a = s.uniform() * two_pi;
        const double phi_b = s.uniform() * two_pi;
        const NmziConfig alice = nmzi(Party::alice, 30.0, phi_a);
        const NmziConfig bob = nmzi(Party::bob, 30.0, phi_b);
        const PairSample p = pair_with(s.normal(0.0, 0.4), s.normal(0.0, 1.0));
        const ProbabilityTable t = joint_probability_table(alice, bob, p);
        const PairPhases ph = pair_phases(alice, bob, p);
        const auto reference = oracles::amplitude_product_table(
            ph.phi_j, ph.psi_j, s.uniform() * two_pi, s.uniform() * two_pi);
        for (std::size_t k = 0; k < 12; ++k) CHECK(std::abs(t.p[k] - reference[k]) < 1e-12);
    }
}

TEST_CASE("joint table examples") {
    const NmziConfig bob0 = nmzi(Party::bob, 30.0, 0.0);

    // joint phase pi: ports (1,3) central entry vanishes
    const NmziConfig alice_pi = nmzi(Party::alice, 30.0, pi);
    const ProbabilityTable t_pi = joint_probability_table(alice_pi, bob0, pair_with(0.2, 0.0));
    CHECK(t_pi.probability(1, 3, TimeSlot::central) == doctest::Approx(0.0).epsilon(1e-15));

    // joint phase 0: ports (1,4) central entry vanishes
    const NmziConfig alice_0 = nmzi(Party::alice, 30.0, 0.0);
    const ProbabilityTable t_0 = joint_probability_table(alice_0, bob0, pair_with(-0.3, 0.0));
    CHECK(t_0.probability(1, 4, TimeSlot::central) == doctest::Approx(0.0).epsilon(1e-15));

    // slot marginals by brute-force sum at joint phase pi/3
    const NmziConfig alice_p3 = nmzi(Party::alice, 30.0, pi / 3.0);
    const ProbabilityTable t = joint_probability_table(alice_p3, bob0, pair_with(0.11, 0.0));
    double sl = 0.0, central = 0.0, ls = 0.0;
    for (int pa : {1, 2})
        for (int pb : {3, 4}) {
            sl += t.probability(pa, pb, TimeSlot::sl);
            central += t.probability(pa, pb, TimeSlot::central);
            ls += t.probability(pa, pb, TimeSlot::ls);
        }
    CHECK(sl == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(central == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ls == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("joint table invariants over random draws") {
    rng::Stream s(12);
    for (int trial = 0; trial < 10000; ++trial) {
        const NmziConfig alice = nmzi(Party::alice, 30.0, s.uniform() * two_pi);
        const NmziConfig bob = nmzi(Party::bob, 30.0, s.uniform() * two_pi);
        const PairSample p = pair_with(s.normal(0.0, 0.42), s.normal(0.0, 0.42));
        const ProbabilityTable t = joint_probability_table(alice, bob, p);

        CHECK(std::abs(t.sum() - 1.0) <= 1e-12);
        for (double v : t.p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(std::abs(t.slot_marginal(TimeSlot::sl) - 0.25) <= 1e-12);
        CHECK(std::abs(t.slot_marginal(TimeSlot::central) - 0.5) <= 1e-12);
        CHECK(std::abs(t.slot_marginal(TimeSlot::ls) - 0.25) <= 1e-12);
        for (int port = 1; port <= 4; ++port)
            CHECK(std::abs(t.port_marginal(port) - 0.5) <= 1e-12);

        // complementarity of the two central fringes on a shared Alice port
        const double c14 = t.probability(1, 4, TimeSlot::central);
        const double c13 = t.probability(1, 3, TimeSlot::central);
        CHECK(std::abs(c14 + c13 - 0.25) <= 1e-14);
    }
}

TEST_CASE("central entries do not depend on the detuning at all") {
    const NmziConfig alice = nmzi(Party::alice, 30.0, 1.1);
    const NmziConfig bob = nmzi(Party::bob, 30.0, 0.4);
    const PairSample base = pair_with(0.2, 0.7);
    const ProbabilityTable t0 = joint_probability_table(alice, bob, base);
    for (double shift : {1e-6, 0.5, 3.0, 100.0, 12345.0}) {
        PairSample moved = base;
        moved.detuning_thz += shift;
        const ProbabilityTable t1 = joint_probability_table(alice, bob, moved);
        for (int pa : {1, 2})
            for (int pb : {3, 4})
                CHECK(t1.probability(pa, pb, TimeSlot::central) ==
                      t0.probability(pa, pb, TimeSlot::central));
    }
}

TEST_CASE("mismatched imbalances are rejected") {
    const NmziConfig alice = nmzi(Party::alice, 30.0, 0.0);
    const NmziConfig bob = nmzi(Party::bob, 31.0, 0.0);
    CHECK_THROWS_AS(joint_probability_table(alice, bob, pair_with(0.0, 0.0)), Error);
    CHECK_THROWS_AS(joint_probability_table(alice, alice, pair_with(0.0, 0.0)), Error);
}

TEST_CASE("gated correlation closed form") {
    SpectralModel m = stock_model();
    m.pump_linewidth_ghz = 0.0;
    CHECK(gated_correlation_mean(0.0, 0.0, m, 30.0, 1, 4) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(gated_correlation_mean(pi / 2.0, pi / 2.0, m, 30.0, 1, 4) ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(gated_correlation_mean(0.0, 0.0, m, 30.0, 1, 3) == doctest::Approx(0.25).epsilon(1e-12));

    const double v = pump_visibility(stock_model(), 30.0);
    CHECK(v == doctest::Approx(0.965).epsilon(2e-3));
    CHECK(v == doctest::Approx(oracles::pump_visibility_value(1.0, 30.0)).epsilon(1e-12));
}

TEST_CASE("gated correlation against Monte Carlo over the pump jitter") {
    const SpectralModel m = stock_model();
    const double phi_a = 0.9, phi_b = 0.5;
    const NmziConfig alice = nmzi(Party::alice, 30.0, phi_a);
    const NmziConfig bob = nmzi(Party::bob, 30.0, phi_b);
    const auto pairs = sample_pairs(m, 200000, 1e6, 33);
    std::vector<double> samples;
    samples.reserve(pairs.size());
    for (const auto& p : pairs)
        samples.push_back(joint_probability_table(alice, bob, p).probability(1, 4, TimeSlot::central));
    const auto stats = oracles::moments(samples);
    const double analytic = gated_correlation_mean(phi_a, phi_b, m, 30.0, 1, 4);
    CHECK(std::abs(stats.mean - analytic) < 3.0 * stats.stderr_mean);
}

TEST_CASE("ungated estimators") {
    const SpectralModel m = stock_model();
    // factorized: flat product of uniform means in the wideband regime
    for (double phase : {0.0, 0.3, 2.0})
        CHECK(ungated_correlation_mean(phase, -phase, m, 30.0, 1, 4,
                                       UngatedEstimator::factorized) ==
              doctest::Approx(0.25).epsilon(1e-15));

    // paired keeps the half-visibility sum-phase fringe
    SpectralModel pump0 = m;
    pump0.pump_linewidth_ghz = 0.0;
    CHECK(ungated_correlation_mean(0.4, -0.4, pump0, 30.0, 1, 4, UngatedEstimator::paired) ==
          doctest::Approx(0.125).epsilon(1e-12));

    // no averaging left when both spreads vanish
    SpectralModel narrow = pump0;
    narrow.delta_f_thz = 1e-12;
    const double phi_a = 1.2, phi_b = 0.7;
    const double expected = 0.25 * (1.0 - std::cos(phi_a)) * (1.0 + std::cos(phi_b));
    CHECK(ungated_correlation_mean(phi_a, phi_b, narrow, 30.0, 1, 4, UngatedEstimator::paired) ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("paired ungated mean against a brute-force pair average") {
    SpectralModel m = stock_model();
    m.pump_linewidth_ghz = 0.0;
    const double phi_a = 0.4, phi_b = -0.4 + two_pi;
    const NmziConfig alice = nmzi(Party::alice, 30.0, phi_a);
    const NmziConfig bob = nmzi(Party::bob, 30.0, phi_b);
    const auto pairs = sample_pairs(m, 1000000, 1e6, 77);
    std::vector<double> products;
    products.reserve(pairs.size());
    for (const auto& p : pairs) {
        const PairPhases ph = pair_phases(alice, bob, p);
        products.push_back(local_intensity(1, ph.phi_j) * local_intensity(4, ph.psi_j));
    }
    const auto stats = oracles::moments(products);
    const double analytic =
        ungated_correlation_mean(phi_a, phi_b, m, 30.0, 1, 4, UngatedEstimator::paired);
    CHECK(analytic == doctest::Approx(0.125).epsilon(1e-9)); // sum phase is 2*pi
    CHECK(std::abs(stats.mean - analytic) < 3.0 * stats.stderr_mean);
}

TEST_CASE("gated fringe has half the period of the local fringe") {
    const SpectralModel m = stock_model();
    for (double phi = 0.0; phi < two_pi; phi += 0.37) {
        const double g0 = gated_correlation_mean(phi, phi, m, 30.0, 1, 4);
        const double g1 = gated_correlation_mean(phi + pi, phi + pi, m, 30.0, 1, 4);
        CHECK(g0 == doctest::Approx(g1).epsilon(1e-12)); // period pi in the common dial
    }
    // while the single-pair local fringe only repeats after 2*pi
    CHECK(std::abs(local_intensity(1, 0.5) - local_intensity(1, 0.5 + pi)) > 0.5);
    CHECK(local_intensity(1, 0.5) == doctest::Approx(local_intensity(1, 0.5 + two_pi)).epsilon(1e-12));
}

TEST_CASE("global phase and beam-splitter i factors cancel in every probability") {
    rng::Stream s(19);
    for (int trial = 0; trial < 200; ++trial) {
        const double phi_j = s.uniform() * 20.0 - 10.0;
        const double psi_j = s.uniform() * 20.0 - 10.0;
        const auto with_eta = oracles::amplitude_product_table(phi_j, psi_j, s.uniform() * two_pi,
                                                               s.uniform() * two_pi);
        const auto without = oracles::amplitude_product_table(phi_j, psi_j, 0.0, 0.0);
        for (std::size_t k = 0; k < 12; ++k)
            CHECK(with_eta[k] == doctest::Approx(without[k]).epsilon(1e-12));
    }
}
