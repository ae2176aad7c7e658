#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "franson/interferometer.hpp"
#include "franson/rng.hpp"

namespace franson {

struct DetectorModel {
    double efficiency = 1.0;      // per-tag detection probability
    double jitter_sigma_ps = 5.0; // Gaussian timing jitter of each tag
    double dark_rate_hz = 0.0;    // independent Poisson background per channel

    void validate() const;
};

struct StreamOrigin {
    std::uint64_t seed = 0;
    std::string config_hash; // filled by the pipeline layer
};

// Sorted detection timestamps for one detector channel, integer picoseconds.
struct TimeTagStream {
    int channel = 0; // 1..4; 0 for merged streams
    std::vector<std::int64_t> tags_ps;
    StreamOrigin origin;

    bool strictly_sorted() const;
};

// Inverse-CDF draw over the 12 outcome classes; for a CENTRAL outcome the
// absolute delay (S-S vs L-L) is an unobservable fair coin.
JointOutcome sample_outcome(const ProbabilityTable& table, rng::Stream& stream);

// Path delay (0 or tau) each party's photon picks up for a given outcome.
struct ArrivalOffsets {
    double alice_ps;
    double bob_ps;
};
ArrivalOffsets arrival_offsets(const JointOutcome& outcome, double tau_ps);

// Turn an emitted pair ensemble into four detector streams. Requires the
// event-mode regime (slots separable); refuses to run otherwise. Output is
// bit-identical for identical inputs: randomness flows through named
// substreams (outcomes, jitter, darks) derived from `seed` per fixed-size
// chunk, so generation order cannot leak into the result.
std::array<TimeTagStream, 4> simulate_streams(const NmziConfig& alice, const NmziConfig& bob,
                                              const SpectralModel& model,
                                              std::span<const PairSample> pairs,
                                              const DetectorModel& det, std::uint64_t seed,
                                              double min_factor = 10.0);

// Stable time-ordered merge of two channels (for delay histograms over a
// whole party). The merged stream keeps channel id 0.
TimeTagStream merge_streams(const TimeTagStream& x, const TimeTagStream& y);

} // namespace franson
