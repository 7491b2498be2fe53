#include "doctest.h"

#include "reaper/mobility.hpp"
#include "reaper/sim.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace reaper;
using namespace reaper::sim;

namespace {

trace::ContactTrace always_connected(double days) {
    return trace::ContactTrace::from_records({{0, 1, 0, days * 86400}});
}

// Random pairs meeting in the same slots every day.
trace::ContactTrace periodic(std::uint64_t seed, int days) {
    std::mt19937_64 rng(seed);
    const int n = 6 + static_cast<int>(rng() % 6);
    std::vector<trace::ContactRecord> recs;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (std::uniform_real_distribution<>(0, 1)(rng) > 0.4) continue;
            const int k = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < k; ++i) {
                const double s = static_cast<double>(rng() % 144) * 600;
                for (int d = 0; d < days; ++d) recs.push_back({a, b, d * 86400 + s, d * 86400 + s + 600});
            }
        }
    return trace::ContactTrace::from_records(recs);
}

trace::ContactTrace campus(int days) { return mobility::generate_trace(mobility::TvcmConfig::campus(), days); }

Workload short_load(double rate) {
    Workload w;
    w.rate_bps = rate;
    w.duration = 4 * 3600;
    return w;
}

}  // namespace

TEST_CASE("protocol names parse") {
    CHECK(ProtocolSpec::parse("REAPER_24").kind == ProtocolKind::Reaper);
    CHECK(ProtocolSpec::parse("reaper_24").deadline_seconds == 24 * 3600.0);
    CHECK(ProtocolSpec::parse("PROPHET").kind == ProtocolKind::Prophet);
    CHECK(ProtocolSpec::parse("MEED-DVR").kind == ProtocolKind::Meed);
    CHECK(ProtocolSpec::parse("meed").kind == ProtocolKind::Meed);
    CHECK(ProtocolSpec::reaper(96).name() == "REAPER_96");
    CHECK(ProtocolSpec::meed().name() == "MEED-DVR");
    CHECK_THROWS_AS(ProtocolSpec::parse("REAPER_"), Error);
    CHECK_THROWS_AS(ProtocolSpec::parse("REAPER_-3"), Error);
    CHECK_THROWS_AS(ProtocolSpec::parse("epidemic"), Error);
}

TEST_CASE("event order is time, kind, then ids") {
    const SimEvent a{10, EventKind::SlotTick, 0, 0};
    const SimEvent b{10, EventKind::ContactStart, 3, 4};
    const SimEvent c{9, EventKind::SlotTick, 0, 0};
    const SimEvent d{10, EventKind::ContactStart, 3, 5};
    CHECK(c < b);
    CHECK(b < a);
    CHECK(b < d);
    CHECK_FALSE(a < a);
}

TEST_CASE("no workload still costs control traffic") {
    const auto t = campus(7);
    for (const auto& p : {ProtocolSpec::reaper(96), ProtocolSpec::prophet(), ProtocolSpec::meed()}) {
        const auto r = run(t, SimConfig{}, p, short_load(0));
        CHECK(r.generated == 0);
        CHECK(r.throughput_bps == 0);
        CHECK(r.control_bytes > 0);
        CHECK(r.contacts > 0);
    }
}

TEST_CASE("a source always in contact with the destination delivers everything at the offered rate") {
    const auto t = always_connected(7);
    for (const auto& p : {ProtocolSpec::reaper(96), ProtocolSpec::reaper(24), ProtocolSpec::prophet(),
                          ProtocolSpec::meed()}) {
        Workload w;
        w.rate_bps = 96;
        const auto r = run(t, SimConfig{}, p, w);
        CAPTURE(p.name());
        CHECK(r.delivery_prob == 1.0);
        CHECK(r.throughput_bps == doctest::Approx(96).epsilon(0.01));
        CHECK(r.avg_path_hops == 1.0);
        CHECK(r.cycle_revisits == 0);
    }
}

TEST_CASE("packets are conserved and held by one node at a time") {
    const auto t = campus(7);
    for (const auto& p : {ProtocolSpec::reaper(24), ProtocolSpec::prophet(), ProtocolSpec::meed()}) {
        Simulator s(t, SimConfig{}, p, short_load(400));
        long long checks = 0;
        bool ok = true;
        s.set_observer([&](const Simulator& sim, const SimEvent&) {
            if (sim.generated() != sim.delivered() + sim.buffered() + sim.dropped()) ok = false;
            if (++checks % 97) return;
            std::map<NodeId, std::vector<std::pair<std::uint32_t, std::uint32_t>>> per_source;
            long long held = 0;
            for (const auto& h : sim.holdings()) {
                per_source[h.source].push_back({h.first_seq, h.first_seq + h.count});
                held += h.count;
            }
            if (held != sim.buffered()) ok = false;
            for (auto& [src, spans] : per_source) {
                std::sort(spans.begin(), spans.end());
                for (std::size_t i = 1; i < spans.size(); ++i)
                    if (spans[i].first < spans[i - 1].second) ok = false;
            }
        });
        const auto r = s.run();
        CAPTURE(p.name());
        CHECK(ok);
        CHECK(r.generated == r.delivered + r.dropped_deadline + r.in_flight);
        CHECK(r.generated > 0);
    }
}

TEST_CASE("reaper never delivers after the deadline") {
    const auto t = campus(7);
    Simulator s(t, SimConfig{}, ProtocolSpec::reaper(6), short_load(96));
    std::ostringstream log;
    s.set_packet_log(&log);
    const auto r = s.run();
    std::istringstream in(log.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "source,seq,created,fate,time,hops,path");
    long long delivered = 0;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string src, seq, created, fate, when;
        std::getline(row, src, ',');
        std::getline(row, seq, ',');
        std::getline(row, created, ',');
        std::getline(row, fate, ',');
        std::getline(row, when, ',');
        if (fate != "delivered") continue;
        ++delivered;
        CHECK(std::stod(when) - std::stod(created) <= 6 * 3600 + 1e-6);
    }
    CHECK(delivered == r.delivered);
}

TEST_CASE("reaper on exactly periodic traces forwards without revisiting a node") {
    long long delivered = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto r = run(periodic(seed, 10), SimConfig{}, ProtocolSpec::reaper(96), short_load(96));
        CHECK(r.cycle_revisits == 0);
        delivered += r.delivered;
    }
    CHECK(delivered > 0);
}

TEST_CASE("runs and sweeps are deterministic and ordered") {
    SweepSpec spec;
    spec.rates = {96, 960};
    spec.protocols = {ProtocolSpec::meed(), ProtocolSpec::prophet()};
    spec.seeds = {1, 2};
    spec.workload = short_load(0);
    spec.make_trace = [](std::uint64_t seed) {
        auto c = mobility::TvcmConfig::campus();
        c.seed = seed;
        return mobility::generate_trace(c, 7);
    };
    spec.threads = 3;
    const auto a = sweep(spec);
    spec.threads = 1;
    const auto b = sweep(spec);
    REQUIRE(a.size() == 8);
    REQUIRE(b.size() == 8);
    std::ostringstream sa, sb;
    for (const auto& row : a) write_metrics_row(sa, row.report, row.seed);
    for (const auto& row : b) write_metrics_row(sb, row.report, row.seed);
    CHECK(sa.str() == sb.str());
    std::size_t i = 0;
    for (std::uint64_t seed : spec.seeds)
        for (const auto& p : spec.protocols)
            for (double rate : spec.rates) {
                CHECK(a[i].seed == seed);
                CHECK(a[i].report.protocol == p.name());
                CHECK(a[i].report.offered_rate_bps == rate);
                ++i;
            }
}

TEST_CASE("metrics csv header matches row width") {
    std::ostringstream h, r;
    write_metrics_header(h);
    write_metrics_row(r, MetricsReport{}, 7);
    auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    CHECK(commas(h.str()) == commas(r.str()));
    CHECK(h.str().rfind("seed,", 0) == 0);
}
