#include "franson/event_sim.hpp"

#include <algorithm>
#include <cmath>

#include "franson/error.hpp"

namespace franson {

namespace {

constexpr std::uint64_t kChunkSize = 1u << 16;
constexpr double kTableTolerance = 1e-9;

// Sort, clamp to t >= 0 and break exact ties by bumping 1 ps. Collisions are
// rare (order 0.1 per 10^6 pairs at the stock rate) and a tagger cannot emit
// two identical stamps on one channel anyway.
void finalize(std::vector<std::int64_t>& tags) {
    std::sort(tags.begin(), tags.end());
    for (auto& t : tags)
        if (t < 0) t = 0;
    for (std::size_t i = 1; i < tags.size(); ++i)
        if (tags[i] <= tags[i - 1]) tags[i] = tags[i - 1] + 1;
}

} // namespace

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw_invalid("efficiency must be in [0, 1]");
    if (!(jitter_sigma_ps >= 0.0)) throw_invalid("jitter_sigma_ps must be >= 0");
    if (!(dark_rate_hz >= 0.0)) throw_invalid("dark_rate_hz must be >= 0");
}

bool TimeTagStream::strictly_sorted() const {
    for (std::size_t i = 1; i < tags_ps.size(); ++i)
        if (tags_ps[i] <= tags_ps[i - 1]) return false;
    return true;
}

JointOutcome sample_outcome(const ProbabilityTable& table, rng::Stream& stream) {
    const double total = table.sum();
    if (std::abs(total - 1.0) > kTableTolerance)
        throw_invalid("sample_outcome: probability table is not normalized");

    const double u = stream.uniform() * total;
    double acc = 0.0;
    std::size_t chosen = table.p.size() - 1; // u == total falls into the last class
    for (std::size_t i = 0; i < table.p.size(); ++i) {
        acc += table.p[i];
        if (u < acc) {
            chosen = i;
            break;
        }
    }
    JointOutcome o = ProbabilityTable::outcome_at(chosen);
    if (o.slot == TimeSlot::central) o.long_long = stream.uniform() < 0.5;
    return o;
}

ArrivalOffsets arrival_offsets(const JointOutcome& outcome, double tau_ps) {
    switch (outcome.slot) {
        case TimeSlot::sl:
            return {0.0, tau_ps}; // Bob delayed, tau_AB = -tau
        case TimeSlot::ls:
            return {tau_ps, 0.0}; // Alice delayed, tau_AB = +tau
        case TimeSlot::central:
            return outcome.long_long ? ArrivalOffsets{tau_ps, tau_ps} : ArrivalOffsets{0.0, 0.0};
    }
    throw_invalid("arrival_offsets: bad time slot");
}

std::array<TimeTagStream, 4> simulate_streams(const NmziConfig& alice, const NmziConfig& bob,
                                              const SpectralModel& model,
                                              std::span<const PairSample> pairs,
                                              const DetectorModel& det, std::uint64_t seed,
                                              double min_factor) {
    alice.validate();
    bob.validate();
    det.validate();
    if (pairs.empty()) throw_invalid("simulate_streams: empty pair list");

    const RegimeReport regime =
        validate_regime(model, alice.delta_l_mm, min_factor, det.jitter_sigma_ps);
    if (!regime.event_mode_allowed)
        throw_regime("simulate_streams: event mode not permitted (arrival-time slots are not "
                     "separable for delta_f_thz/delta_l_mm/jitter as configured)");

    const double tau = alice.tau_ps();
    std::array<TimeTagStream, 4> out;
    for (int c = 0; c < 4; ++c) {
        out[c].channel = c + 1;
        out[c].origin.seed = seed;
        out[c].tags_ps.reserve(pairs.size() / 2 + 16);
    }

    const bool drop_tags = det.efficiency < 1.0;
    const bool jittered = det.jitter_sigma_ps > 0.0;

    for (std::size_t start = 0, chunk = 0; start < pairs.size(); start += kChunkSize, ++chunk) {
        rng::Stream outcomes(rng::derive_seed(seed, "outcomes", chunk));
        rng::Stream jitter(rng::derive_seed(seed, "jitter", chunk));
        const std::size_t stop = std::min(pairs.size(), start + kChunkSize);
        for (std::size_t i = start; i < stop; ++i) {
            const PairSample& pair = pairs[i];
            const ProbabilityTable table = joint_probability_table(alice, bob, pair);
            const JointOutcome o = sample_outcome(table, outcomes);
            const ArrivalOffsets off = arrival_offsets(o, tau);

            const bool keep_a = !drop_tags || outcomes.uniform() < det.efficiency;
            const bool keep_b = !drop_tags || outcomes.uniform() < det.efficiency;
            if (keep_a) {
                double t = pair.t_emit_ps + off.alice_ps;
                if (jittered) t += jitter.normal(0.0, det.jitter_sigma_ps);
                out[o.port_a - 1].tags_ps.push_back(std::llround(t));
            }
            if (keep_b) {
                double t = pair.t_emit_ps + off.bob_ps;
                if (jittered) t += jitter.normal(0.0, det.jitter_sigma_ps);
                out[o.port_b - 1].tags_ps.push_back(std::llround(t));
            }
        }
    }

    if (det.dark_rate_hz > 0.0) {
        const double span_ps = pairs.back().t_emit_ps + tau + 1000.0;
        const double mean_gap_ps = 1.0e12 / det.dark_rate_hz;
        for (int c = 0; c < 4; ++c) {
            rng::Stream darks(rng::derive_seed(seed, "darks", static_cast<std::uint64_t>(c)));
            for (double t = darks.exponential(mean_gap_ps); t < span_ps;
                 t += darks.exponential(mean_gap_ps))
                out[c].tags_ps.push_back(std::llround(t));
        }
    }

    for (auto& stream : out) finalize(stream.tags_ps);
    return out;
}

TimeTagStream merge_streams(const TimeTagStream& x, const TimeTagStream& y) {
    TimeTagStream merged;
    merged.channel = 0;
    merged.origin = x.origin;
    merged.tags_ps.resize(x.tags_ps.size() + y.tags_ps.size());
    std::merge(x.tags_ps.begin(), x.tags_ps.end(), y.tags_ps.begin(), y.tags_ps.end(),
               merged.tags_ps.begin());
    return merged;
}

} // namespace franson
