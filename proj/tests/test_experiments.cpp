#include "doctest.h"

#include "reaper/experiments.hpp"

#include <set>

using namespace reaper;
using namespace reaper::experiments;

TEST_CASE("random topologies respect their bounds and repeat per seed") {
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 50; ++i) {
        const auto t = random_topology(a);
        const auto u = random_topology(b);
        CHECK(t.links.size() == u.links.size());
        CHECK(t.config.nodes.size() >= 3);
        CHECK(t.config.nodes.size() <= 6);
        CHECK(t.config.frame_len <= 12);
        CHECK(t.config.max_hops <= 3);
        CHECK_NOTHROW(t.validate());
        for (const auto& [pair, beta] : t.links) CHECK_FALSE(beta.betas.empty());
    }
}

TEST_CASE("small world keeps the lattice edge count") {
    const auto t = small_world_topology(32, 3);
    CHECK(t.config.nodes.size() == 32);
    CHECK(t.links.size() == 64);
    CHECK(t.config.max_hops == routing::default_max_hops(32));
    CHECK_NOTHROW(t.validate());
    CHECK_THROWS_AS(small_world_topology(2, 1), Error);
}

TEST_CASE("converged tables agree with the oracle on a fixed instance") {
    std::mt19937_64 rng(11);
    const auto t = random_topology(rng);
    const auto r = check_optimality(t);
    CHECK(r.converged);
    CHECK(r.cells == static_cast<long long>(t.config.nodes.size()) * t.config.max_hops * t.config.frame_len);
    CHECK(r.queries > 0);
    CHECK(r.forward_mismatches == 0);
}

TEST_CASE("a corrupted network returns to the legitimate state") {
    std::mt19937_64 rng(2);
    int reached = 0;
    for (int i = 0; i < 20; ++i) {
        const auto t = random_topology(rng);
        const auto faults = random_faults(t, rng, 4);
        CHECK(faults.size() == 4);
        const auto rep = run_stabilization(t, faults, 3 * (t.config.max_hops + 1) + 3, i % 2 ? 20 : 0);
        REQUIRE(rep.frames.size() == static_cast<std::size_t>(3 * (t.config.max_hops + 1) + 3));
        reached += rep.reached.has_value();
        if (rep.reached) CHECK(rep.frames.back().level == t.config.max_hops + 1);
    }
    CHECK(reached >= 18);
}

TEST_CASE("topology from a trace links every pair with a beta frame") {
    const auto tr = trace::ContactTrace::from_records({{0, 1, 100, 200}, {1, 2, 700, 800}, {0, 1, 86500, 86600},
                                                      {1, 2, 87100, 87200}});
    trace::SlotGrid g;
    const auto t = topology_from_trace(tr, g, 0);
    CHECK(t.links.size() == 2);
    CHECK(t.config.nodes == std::vector<NodeId>{0, 1, 2});
    CHECK_THROWS_AS(topology_from_trace(tr, g, 9), Error);
}
