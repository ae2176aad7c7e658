#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "franson/coincidence.hpp"
#include "franson/error.hpp"
#include "franson/event_sim.hpp"
#include "franson/rng.hpp"
#include "oracles.hpp"

using namespace franson;

namespace {

TimeTagStream stream_of(std::vector<std::int64_t> tags, int channel = 1) {
    TimeTagStream s;
    s.channel = channel;
    s.tags_ps = std::move(tags);
    return s;
}

// Uniformly random sorted stream over [0, span].
std::vector<std::int64_t> random_stream(rng::Stream& s, std::size_t n, std::int64_t span) {
    std::vector<std::int64_t> tags(n);
    for (auto& t : tags) t = static_cast<std::int64_t>(s.uniform() * static_cast<double>(span));
    std::sort(tags.begin(), tags.end());
    return tags;
}

// Bursts spaced right around the window edge, the matcher's hard case.
std::vector<std::int64_t> clustered_stream(rng::Stream& s, std::size_t n, std::int64_t hw) {
    std::vector<std::int64_t> tags;
    std::int64_t t = 0;
    while (tags.size() < n) {
        t += static_cast<std::int64_t>(s.uniform() * 3.0 * static_cast<double>(hw)) + 1;
        const int burst = 1 + static_cast<int>(s.uniform() * 4.0);
        for (int k = 0; k < burst && tags.size() < n; ++k) {
            tags.push_back(t);
            const double u = s.uniform();
            // step sizes hugging the edges: hw-1, hw, hw+1 or tiny
            if (u < 0.25) t += hw - 1;
            else if (u < 0.5) t += hw;
            else if (u < 0.75) t += hw + 1;
            else t += 1 + static_cast<std::int64_t>(s.uniform() * 3.0);
        }
    }
    std::sort(tags.begin(), tags.end());
    return tags;
}

} // namespace

TEST_CASE("histogram of a single tag pair") {
    const auto h = delay_histogram(stream_of({0}), stream_of({100}, 2), 10, 200);
    CHECK(h.total() == 1);
    CHECK(h.counts[h.bin_of(-100)] == 1);
    CHECK(h.bin_center_ps(h.bin_of(-100)) == doctest::Approx(-95.0));
}

TEST_CASE("histogram of empty streams is empty") {
    const auto h = delay_histogram(stream_of({}), stream_of({}, 2), 10, 200);
    CHECK(h.total() == 0);
    CHECK(h.counts.size() == 40);
}

TEST_CASE("histogram input validation") {
    CHECK_THROWS_AS(delay_histogram(stream_of({3, 1}), stream_of({}, 2), 10, 200), Error);
    CHECK_THROWS_AS(delay_histogram(stream_of({}), stream_of({3, 1}, 2), 10, 200), Error);
    CHECK_THROWS_AS(delay_histogram(stream_of({}), stream_of({}, 2), 0, 200), Error);
    CHECK_THROWS_AS(delay_histogram(stream_of({}), stream_of({}, 2), 10, 0), Error);
    CHECK_THROWS_AS(delay_histogram(stream_of({}), stream_of({}, 2), 7, 200), Error);
}

TEST_CASE("histogram counts all in-range pairs, boundaries inclusive") {
    // delays: -200 (edge), -100, 0, 100, 200 (edge), 250 (outside)
    const auto a = stream_of({0});
    const auto b = stream_of({-250, -200, -100, 0, 100, 200}, 2);
    const auto h = delay_histogram(a, b, 10, 200);
    CHECK(h.total() == 5);
    CHECK(h.counts[h.bin_of(200)] == 1);
    CHECK(h.counts[h.bin_of(-200)] == 1);
}

TEST_CASE("matching basics and the delay sign convention") {
    const CoincidenceWindow tight{0, 1};
    CHECK(match_coincidences(stream_of({100}), stream_of({100}, 2), tight).count == 1);
    CHECK(match_coincidences(stream_of({100}), stream_of({200}, 2), tight).count == 0);
    // tau_AB = t_A - t_B = -100, so the match sits at offset -100, not +100
    CHECK(match_coincidences(stream_of({100}), stream_of({200}, 2), {100, 1}).count == 0);
    CHECK(match_coincidences(stream_of({100}), stream_of({200}, 2), {-100, 1}).count == 1);
}

TEST_CASE("window validation and unsorted inputs") {
    CHECK_THROWS_AS(match_coincidences(stream_of({1}), stream_of({1}, 2), {0, 0}), Error);
    CHECK_THROWS_AS(match_coincidences(stream_of({2, 1}), stream_of({1}, 2), {0, 5}), Error);
    CHECK_THROWS_AS(match_coincidences(stream_of({1}), stream_of({2, 1}, 2), {0, 5}), Error);
}

TEST_CASE("greedy matcher equals the all-pairs oracle, edges included") {
    rng::Stream s(71);
    for (int trial = 0; trial < 60; ++trial) {
        const std::int64_t hw = 1 + static_cast<std::int64_t>(s.uniform() * 40.0);
        const std::int64_t offset = static_cast<std::int64_t>((s.uniform() - 0.5) * 200.0);
        const std::size_t na = 50 + static_cast<std::size_t>(s.uniform() * 2950.0);
        const std::size_t nb = 50 + static_cast<std::size_t>(s.uniform() * 2950.0);
        const bool dense = trial % 2 == 0;
        const auto ta = dense ? clustered_stream(s, na, hw) : random_stream(s, na, 40000);
        const auto tb = dense ? clustered_stream(s, nb, hw) : random_stream(s, nb, 40000);

        const MatchResult got =
            match_coincidences(stream_of(ta), stream_of(tb, 2), {offset, hw});
        const auto expected = oracles::brute_force_match(ta, tb, offset, hw);
        REQUIRE(got.count == expected.size());
        CHECK(got.pairs == expected);
    }
}

TEST_CASE("count symmetry under swapping the parties") {
    rng::Stream s(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ta = random_stream(s, 800, 20000);
        const auto tb = random_stream(s, 700, 20000);
        for (std::int64_t offset : {-120L, -3L, 0L, 7L, 64L}) {
            const auto ab = match_coincidences(stream_of(ta), stream_of(tb, 2), {offset, 9});
            const auto ba = match_coincidences(stream_of(tb, 2), stream_of(ta), {-offset, 9});
            CHECK(ab.count == ba.count);
        }
    }
}

TEST_CASE("count grows monotonically with the window width") {
    rng::Stream s(6);
    const auto ta = random_stream(s, 1500, 30000);
    const auto tb = random_stream(s, 1500, 30000);
    std::uint64_t previous = 0;
    for (std::int64_t hw = 1; hw <= 512; hw *= 2) {
        const auto r = match_coincidences(stream_of(ta), stream_of(tb, 2), {0, hw});
        CHECK(r.count >= previous);
        previous = r.count;
    }
}

TEST_CASE("disjoint slot windows partition the matches") {
    const SpectralModel model{193.4, 1.0, 1.0};
    const auto pairs = sample_pairs(model, 50000, 1e6, 13);
    const auto streams =
        simulate_streams(nmzi(Party::alice, 30.0, 0.9), nmzi(Party::bob, 30.0, 0.4), model, pairs,
                         DetectorModel{1.0, 5.0, 0.0}, 77);
    const auto windows = slot_windows(30.0 / 0.299792458, 25);

    const TimeTagStream& a = streams[0];
    const TimeTagStream& b = streams[3];
    std::set<std::size_t> a_used;
    std::uint64_t total = 0;
    for (const auto& win : windows) {
        const MatchResult r = match_coincidences(a, b, win);
        total += r.count;
        for (const auto& [i, j] : r.pairs) {
            CHECK(a_used.insert(i).second); // no a-tag claimed by two windows
            CHECK(win.contains(a.tags_ps[i] - b.tags_ps[j]));
        }
    }
    CHECK(total <= std::min(a.tags_ps.size(), b.tags_ps.size()));
}
