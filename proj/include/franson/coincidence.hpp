#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "franson/event_sim.hpp"

namespace franson {

// Acceptance window around a target delay: a tag pair (t_a, t_b) falls in the
// window iff |t_a - t_b - offset| <= half_width. Delays follow the
// tau_AB = t_A - t_B convention, so the Alice-short/Bob-long slot sits at
// offset -tau. For slot-resolved counting keep half_width < tau/2 so the
// windows at -tau, 0, +tau stay disjoint.
struct CoincidenceWindow {
    std::int64_t offset_ps = 0;
    std::int64_t half_width_ps = 25;

    bool contains(std::int64_t delay_ps) const {
        const std::int64_t d = delay_ps - offset_ps;
        return d >= -half_width_ps && d <= half_width_ps;
    }
    void validate() const;
};

// Histogram of all pairwise delays t_a - t_b with |delay| <= range. Bins are
// half-open of width bin_width covering [-range, +range]; the top edge closes
// the last bin so the total equals the number of in-range pairs.
struct DelayHistogram {
    std::int64_t bin_width_ps = 0;
    std::int64_t range_ps = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
    std::size_t bin_of(std::int64_t delay_ps) const;
    double bin_center_ps(std::size_t bin) const;
    // Sum of bins whose centers fall inside [center - half_width, center + half_width].
    std::uint64_t window_area(std::int64_t center_ps, std::int64_t half_width_ps) const;
};

// All-pairs delay histogram via a sliding lower bound on the sorted b stream;
// linear in tags plus in-range pairs, never quadratic.
DelayHistogram delay_histogram(const TimeTagStream& a, const TimeTagStream& b,
                               std::int64_t bin_width_ps, std::int64_t range_ps);

struct MatchResult {
    std::uint64_t count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (index in a, index in b)
};

// Greedy one-to-one in-order matching: two cursors advance through the sorted
// streams, each tag is used at most once, and among multiple candidates the
// earliest unmatched tag wins. Linear time in the total tag count.
MatchResult match_coincidences(const TimeTagStream& a, const TimeTagStream& b,
                               const CoincidenceWindow& win);

// Windows centered on the three arrival-time slots -tau, 0, +tau.
std::array<CoincidenceWindow, 3> slot_windows(double tau_ps, std::int64_t half_width_ps);

} // namespace franson
