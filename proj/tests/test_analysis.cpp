#include "doctest.h"

#include "reaper/analysis.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace reaper;
using namespace reaper::analysis;
using trace::ContactRecord;
using trace::ContactTrace;

namespace {

BoolMatrix edges(int n, std::vector<std::pair<int, int>> list) {
    BoolMatrix m(n, 0);
    for (auto [a, b] : list) m(a, b) = m(b, a) = 1;
    return m;
}

// Exhaustive time-respecting path search: hops in strictly increasing windows.
SquareMatrix<int> brute_min_hops(const std::vector<BoolMatrix>& windows) {
    const int n = windows.front().n;
    SquareMatrix<int> best(n, -1);
    std::function<void(int, int, int, int)> dfs = [&](int src, int node, int last, int hops) {
        for (int w = last + 1; w < static_cast<int>(windows.size()); ++w)
            for (int v = 0; v < n; ++v) {
                if (v == src || !windows[static_cast<std::size_t>(w)](node, v)) continue;
                if (best(src, v) < 0 || hops + 1 < best(src, v)) best(src, v) = hops + 1;
                dfs(src, v, w, hops + 1);
            }
    };
    for (int s = 0; s < n; ++s) dfs(s, s, -1, 0);
    return best;
}

WeightMatrix brute_reliability(const std::vector<WeightMatrix>& windows) {
    const int n = windows.front().n;
    WeightMatrix best(n, 0.0);
    std::function<void(int, int, int, double)> dfs = [&](int src, int node, int last, double p) {
        for (int w = last + 1; w < static_cast<int>(windows.size()); ++w)
            for (int v = 0; v < n; ++v) {
                double link = windows[static_cast<std::size_t>(w)](node, v);
                if (v == src || !(link > 0.0)) continue;
                best(src, v) = std::max(best(src, v), p * link);
                dfs(src, v, w, p * link);
            }
    };
    for (int s = 0; s < n; ++s) dfs(s, s, -1, 1.0);
    return best;
}

}  // namespace

TEST_CASE("binary window adjacency") {
    auto t = ContactTrace::from_records({{1, 2, 1, 2}, {2, 3, 25, 26}});
    auto a = window_adjacency(t, 10, 0, LinkProbMode::Binary, 0.0);
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 0) == 1.0);
    double total = 0;
    for (double v : a.cells) total += v;
    CHECK(total == 2.0);

    auto empty = window_adjacency(t, 10, 1, LinkProbMode::Binary, 0.0);
    for (double v : empty.cells) CHECK(v == 0.0);

    CHECK_THROWS_AS(window_adjacency(t, 10, 3, LinkProbMode::Binary, 0.0), Error);
    CHECK_THROWS_AS(window_adjacency(t, 0, 0, LinkProbMode::Binary, 0.0), Error);
}

TEST_CASE("empirical link probability counts windows with a meeting") {
    auto t = ContactTrace::from_records(
        {{1, 2, 1, 2}, {1, 2, 11, 12}, {1, 2, 31, 32}, {1, 3, 39, 40}});
    auto a = window_adjacency(t, 10, 3, LinkProbMode::Empirical, 0.0);
    CHECK(a(0, 1) == doctest::Approx(0.75));
    CHECK(a(0, 2) == doctest::Approx(0.25));
}

TEST_CASE("temporal reach respects window order") {
    auto r = temporal_reach({edges(3, {{0, 1}}), edges(3, {{1, 2}})});
    CHECK(r.reach(0, 2));
    CHECK(r.min_hops(0, 2) == 2);
    CHECK_FALSE(r.reach(2, 0));
    CHECK(r.hop_bound == 2);
    CHECK(r.diameter_hops == 2);

    auto single = temporal_reach({edges(3, {{0, 1}, {1, 2}})});
    CHECK_FALSE(single.reach(0, 2));

    auto lone = temporal_reach({edges(3, {{0, 1}}), edges(3, {})});
    CHECK(lone.reach(0, 1));
    CHECK(lone.reach(1, 0));
    int count = 0;
    for (auto v : lone.reach.cells) count += v;
    CHECK(count == 2);
    CHECK(lone.hop_bound == 1);
}

TEST_CASE("order sensitivity: reversing windows changes reachability") {
    std::vector<BoolMatrix> w{edges(3, {{0, 1}}), edges(3, {{1, 2}})};
    std::vector<BoolMatrix> rev{w[1], w[0]};
    CHECK(temporal_reach(w).reach != temporal_reach(rev).reach);
}

TEST_CASE("property: temporal reach equals exhaustive path search") {
    std::mt19937 rng(21);
    for (int round = 0; round < 300; ++round) {
        int n = 2 + static_cast<int>(rng() % 5);
        int nw = 1 + static_cast<int>(rng() % 5);
        std::vector<BoolMatrix> windows;
        for (int w = 0; w < nw; ++w) {
            BoolMatrix m(n, 0);
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (rng() % 4 == 0) m(a, b) = m(b, a) = 1;
            windows.push_back(m);
        }
        auto r = temporal_reach(windows);
        REQUIRE(r.min_hops == brute_min_hops(windows));
        for (std::size_t i = 1; i < r.path_counts.size(); ++i)
            CHECK(r.path_counts[i] >= r.path_counts[i - 1]);
    }
}

TEST_CASE("most reliable paths") {
    WeightMatrix w1(3, 0.0), w2(3, 0.0);
    w1(0, 1) = w1(1, 0) = 1.0;
    w1(0, 2) = w1(2, 0) = 0.9;
    w2(1, 2) = w2(2, 1) = 1.0;
    auto best = most_reliable_paths({w1, w2});
    CHECK(best(0, 2) == doctest::Approx(1.0));

    WeightMatrix only(2, 0.0);
    only(0, 1) = only(1, 0) = 0.5;
    CHECK(most_reliable_paths({only})(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("property: most reliable paths match brute force and ignore zero links") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int round = 0; round < 200; ++round) {
        const int n = 5;
        int nw = 1 + static_cast<int>(rng() % 4);
        std::vector<WeightMatrix> windows;
        for (int w = 0; w < nw; ++w) {
            WeightMatrix m(n, 0.0);
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (rng() % 3 == 0) m(a, b) = m(b, a) = u(rng);
            windows.push_back(m);
        }
        auto best = most_reliable_paths(windows);
        auto oracle = brute_reliability(windows);
        for (std::size_t c = 0; c < best.cells.size(); ++c)
            REQUIRE(best.cells[c] == doctest::Approx(oracle.cells[c]).epsilon(1e-9));

        // Extra window of zero-probability links changes nothing.
        windows.push_back(WeightMatrix(n, 0.0));
        CHECK(most_reliable_paths(windows) == best);
    }
}

namespace {

// Ring of n nodes meeting neighbours once per period at a random offset,
// plus a few chords; some pairs skip alternate periods.
ContactTrace planted_trace(int n, double period, int periods, unsigned seed,
                           int flaky_every = 0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> off(0.0, period - 60.0);
    std::vector<std::pair<int, int>> links;
    for (int i = 0; i < n; ++i) links.push_back({i, (i + 1) % n});
    for (int i = 0; i < n; i += 3) links.push_back({i, (i + n / 2) % n});
    std::vector<ContactRecord> raw;
    for (std::size_t l = 0; l < links.size(); ++l)
        for (int k = 0; k < periods; ++k) {
            if (flaky_every && l % static_cast<std::size_t>(flaky_every) != 0 && k % 2 == 1) continue;
            double s = k * period + off(rng);
            raw.push_back({links[l].first, links[l].second, s, s + 60.0});
        }
    return ContactTrace::from_records(raw);
}

}  // namespace

TEST_CASE("average link probability grows with nested window lengths") {
    auto t = planted_trace(8, 3600.0, 16, 4);
    double prev = 0.0;
    for (double d : {450.0, 900.0, 1800.0, 3600.0, 7200.0}) {
        auto m = window_metrics(t, d, 0.0, 0.0);
        CHECK(m.avg_link_prob + 1e-12 >= prev);
        CHECK(m.avg_link_prob <= 1.0);
        CHECK(m.connected_link_fraction <= 1.0);
        CHECK(m.avg_path_prob <= 1.0);
        CHECK(m.diameter_hops <= 7);
        prev = m.avg_link_prob;
    }
}

TEST_CASE("characteristic frame picks the planted period") {
    const double period = 3600.0;
    auto t = planted_trace(10, period, 24, 17);
    std::vector<double> sweep{600, 900, 1200, 1800, 2400, 3600, 5400, 7200};
    auto choice = characteristic_frame(t, sweep);
    REQUIRE(choice.frame_len);
    CHECK(*choice.frame_len >= 2400);
    CHECK(*choice.frame_len <= 5400);
    CHECK(choice.table.size() == sweep.size());

    FrameCriteria strict;
    strict.min_path_prob = 1.01;
    CHECK_FALSE(characteristic_frame(t, sweep, strict).frame_len);
    CHECK_THROWS_AS(characteristic_frame(t, {}), Error);
}

TEST_CASE("threshold study trades connectivity for reliability") {
    // Links with index divisible by 3 meet every period, the rest every other one.
    auto t = planted_trace(10, 3600.0, 20, 5, 3);
    auto rows = threshold_study(t, 3600.0, {0.0, 0.5, 0.95, 1.0});
    auto unfiltered = window_metrics(t, 3600.0);
    CHECK(rows[0].avg_link_prob == unfiltered.avg_link_prob);
    CHECK(rows[0].connected_link_fraction == unfiltered.connected_link_fraction);
    CHECK(rows[0].avg_path_prob == unfiltered.avg_path_prob);
    CHECK(rows[2].connected_link_fraction < rows[0].connected_link_fraction);
    CHECK(rows[2].avg_link_prob == doctest::Approx(1.0));
    CHECK(rows[3].connected_link_fraction == rows[2].connected_link_fraction);

    auto flaky_only = planted_trace(6, 3600.0, 10, 2, 1000);
    auto none = threshold_study(flaky_only, 3600.0, {1.0});
    // Only link 0 meets every period.
    CHECK(none[0].connected_link_fraction < window_metrics(flaky_only, 3600.0).connected_link_fraction);
}

TEST_CASE("threshold study keeps exactly the deterministic share of links") {
    // 20 links, 7 of them meet every frame, the rest every other frame.
    std::vector<ContactRecord> raw;
    const double frame = 1000.0;
    int link = 0;
    for (int a = 0; a < 8 && link < 20; ++a)
        for (int b = a + 1; b < 8 && link < 20; ++b, ++link)
            for (int k = 0; k < 10; ++k) {
                if (link >= 7 && k % 2 == 1) continue;
                double s = k * frame + 10.0 * link;
                raw.push_back({a, b, s, s + 5.0});
            }
    raw.push_back({0, 7, 9999, 10000});  // pair (0,7) is already a deterministic link
    auto t = ContactTrace::from_records(raw);
    auto rows = threshold_study(t, frame, {0.0, 0.95});
    CHECK(rows[1].connected_link_fraction / rows[0].connected_link_fraction ==
          doctest::Approx(7.0 / 20.0));
}

TEST_CASE("duration and sweep parsing") {
    CHECK(parse_duration("90") == 90);
    CHECK(parse_duration("2m") == 120);
    CHECK(parse_duration("1.5h") == 5400);
    CHECK(parse_duration("1d") == 86400);
    CHECK_THROWS_AS(parse_duration("x"), Error);
    CHECK_THROWS_AS(parse_duration("-1h"), Error);
    CHECK(parse_delta_sweep("1h:4h") == std::vector<double>{3600, 7200, 14400});
    CHECK(parse_delta_sweep("1h:5h") == std::vector<double>{3600, 7200, 14400, 18000});
    CHECK(parse_delta_sweep("1h:3h:1h") == std::vector<double>{3600, 7200, 10800});
    CHECK(parse_delta_sweep("30m,1h") == std::vector<double>{1800, 3600});
}
