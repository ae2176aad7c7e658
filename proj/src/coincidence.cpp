#include "franson/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "franson/error.hpp"

namespace franson {

namespace {

void require_sorted(const TimeTagStream& s, const char* name) {
    if (!std::is_sorted(s.tags_ps.begin(), s.tags_ps.end()))
        throw_invalid(std::string("stream ") + name + " is not sorted by time");
}

} // namespace

void CoincidenceWindow::validate() const {
    if (half_width_ps <= 0) throw_invalid("coincidence window half_width_ps must be > 0");
}

std::uint64_t DelayHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::size_t DelayHistogram::bin_of(std::int64_t delay_ps) const {
    // delay in [-range, +range]; the inclusive top edge folds into the last bin
    auto bin = static_cast<std::size_t>((delay_ps + range_ps) / bin_width_ps);
    if (bin == counts.size()) --bin;
    return bin;
}

double DelayHistogram::bin_center_ps(std::size_t bin) const {
    return static_cast<double>(-range_ps) +
           (static_cast<double>(bin) + 0.5) * static_cast<double>(bin_width_ps);
}

std::uint64_t DelayHistogram::window_area(std::int64_t center_ps,
                                          std::int64_t half_width_ps) const {
    std::uint64_t area = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double c = bin_center_ps(i);
        if (c >= static_cast<double>(center_ps - half_width_ps) &&
            c <= static_cast<double>(center_ps + half_width_ps))
            area += counts[i];
    }
    return area;
}

DelayHistogram delay_histogram(const TimeTagStream& a, const TimeTagStream& b,
                               std::int64_t bin_width_ps, std::int64_t range_ps) {
    if (bin_width_ps <= 0) throw_invalid("delay_histogram: bin_width_ps must be > 0");
    if (range_ps <= 0) throw_invalid("delay_histogram: range_ps must be > 0");
    if ((2 * range_ps) % bin_width_ps != 0)
        throw_invalid("delay_histogram: 2*range_ps must be a whole number of bins");
    require_sorted(a, "a");
    require_sorted(b, "b");

    DelayHistogram h;
    h.bin_width_ps = bin_width_ps;
    h.range_ps = range_ps;
    h.counts.assign(static_cast<std::size_t>(2 * range_ps / bin_width_ps), 0);

    const auto& ta = a.tags_ps;
    const auto& tb = b.tags_ps;
    std::size_t lo = 0;
    for (const std::int64_t t : ta) {
        while (lo < tb.size() && tb[lo] < t - range_ps) ++lo;
        for (std::size_t j = lo; j < tb.size() && tb[j] <= t + range_ps; ++j)
            ++h.counts[h.bin_of(t - tb[j])];
    }
    return h;
}

MatchResult match_coincidences(const TimeTagStream& a, const TimeTagStream& b,
                               const CoincidenceWindow& win) {
    win.validate();
    require_sorted(a, "a");
    require_sorted(b, "b");

    MatchResult r;
    const auto& ta = a.tags_ps;
    const auto& tb = b.tags_ps;
    std::size_t i = 0, j = 0;
    while (i < ta.size() && j < tb.size()) {
        const std::int64_t d = ta[i] - tb[j] - win.offset_ps;
        if (d < -win.half_width_ps) {
            ++i; // a[i] is too early for every remaining b
        } else if (d > win.half_width_ps) {
            ++j; // b[j] is too early for every remaining a
        } else {
            r.pairs.emplace_back(i, j);
            ++i;
            ++j;
        }
    }
    r.count = r.pairs.size();
    return r;
}

std::array<CoincidenceWindow, 3> slot_windows(double tau_ps, std::int64_t half_width_ps) {
    const auto tau = static_cast<std::int64_t>(std::llround(tau_ps));
    return {CoincidenceWindow{-tau, half_width_ps}, CoincidenceWindow{0, half_width_ps},
            CoincidenceWindow{tau, half_width_ps}};
}

} // namespace franson
