#include "reaper/experiments.hpp"

#include "reaper/path_oracle.hpp"
#include "reaper/predict.hpp"
#include "reaper/routing.hpp"

#include <algorithm>
#include <set>

namespace reaper::experiments {

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

predict::BetaFrame make_beta(NodePair pair, int frame_len, std::vector<int> slots) {
    predict::BetaFrame b;
    b.pair = pair;
    b.frame_len = frame_len;
    b.slot_len = 1.0;
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    b.betas = std::move(slots);
    return b;
}

// Frames the variants count as in flight right after a step.
std::vector<const protocol::SFrame*> in_flight(const protocol::StepRecord& r) {
    using protocol::Action;
    if (r.pending && (r.action == Action::Send || r.action == Action::Reset || r.action == Action::ResetNextHop ||
                      r.action == Action::ResetDestination))
        return {r.pending};
    return {};
}

}  // namespace

protocol::Topology random_topology(std::mt19937_64& rng, const RandomTopologyOptions& opt) {
    protocol::Topology t;
    const int n = uniform(rng, opt.min_nodes, opt.max_nodes);
    const int f = uniform(rng, opt.min_frame, opt.max_frame);
    t.config.destination = 0;
    t.config.frame_len = f;
    t.config.max_hops = uniform(rng, opt.min_hops, opt.max_hops);
    for (int i = 0; i < n; ++i) t.config.nodes.push_back(i);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (!chance(rng, opt.link_prob)) continue;
            std::vector<int> slots;
            for (int r = 1; r <= f; ++r)
                if (chance(rng, opt.slot_prob)) slots.push_back(r);
            if (slots.empty()) slots.push_back(uniform(rng, 1, f));
            t.links[{a, b}] = make_beta({a, b}, f, slots);
        }
    return t;
}

protocol::Topology small_world_topology(int nodes, std::uint64_t seed, int frame_len, int degree, double rewire,
                                        int meetings, int max_hops) {
    if (nodes < 3) throw Error("small world needs at least 3 nodes");
    std::mt19937_64 rng(seed);
    protocol::Topology t;
    t.config.destination = 0;
    t.config.frame_len = frame_len;
    t.config.max_hops = max_hops > 0 ? max_hops : routing::default_max_hops(nodes);
    for (int i = 0; i < nodes; ++i) t.config.nodes.push_back(i);
    std::set<NodePair> edges;
    for (int i = 0; i < nodes; ++i)
        for (int k = 1; k <= degree; ++k) {
            int j = (i + k) % nodes;
            if (chance(rng, rewire)) {
                do j = uniform(rng, 0, nodes - 1);
                while (j == i || edges.count(NodePair(i, j)));
            }
            edges.insert(NodePair(i, j));
        }
    for (const auto& e : edges) {
        std::vector<int> slots;
        for (int m = 0; m < meetings; ++m) slots.push_back(uniform(rng, 1, frame_len));
        t.links[e] = make_beta(e, frame_len, slots);
    }
    return t;
}

protocol::Topology topology_from_trace(const trace::ContactTrace& trace, const trace::SlotGrid& grid,
                                       NodeId destination, int max_hops) {
    protocol::Topology t;
    t.config.destination = destination;
    t.config.frame_len = grid.frame_len;
    t.config.nodes = trace.nodes();
    if (std::find(t.config.nodes.begin(), t.config.nodes.end(), destination) == t.config.nodes.end())
        throw Error("destination " + std::to_string(destination) + " is not in the trace");
    t.config.max_hops = max_hops > 0 ? max_hops : routing::default_max_hops(static_cast<int>(t.config.nodes.size()));
    for (const auto& pair : trace.pairs())
        if (auto b = predict::beta_frame_for_pair(trace, grid, pair)) t.links[pair] = *b;
    return t;
}

std::vector<protocol::Fault> random_faults(const protocol::Topology& topo, std::mt19937_64& rng, int count) {
    const auto& ids = topo.config.nodes;
    const int n = static_cast<int>(ids.size());
    const int k = topo.config.max_hops, f = topo.config.frame_len;
    std::vector<protocol::Fault> out;
    for (int i = 0; i < count; ++i) {
        protocol::Fault fault;
        fault.node = ids[static_cast<std::size_t>(uniform(rng, 0, n - 1))];
        if (chance(rng, 0.2)) {
            fault.reset_history = true;
            fault.neighbor = ids[static_cast<std::size_t>(uniform(rng, 0, n - 1))];
        } else {
            fault.q = uniform(rng, 0, k);
            fault.p = uniform(rng, 1, f);
            fault.entry.delay = chance(rng, 1.0 / 3) ? routing::kInfiniteDelay : uniform(rng, 0, f * (k + 1) - 1);
            // -1 leaves the hop empty.
            const int h = uniform(rng, -1, n - 1);
            fault.entry.next_hop = h < 0 ? kNoHop : ids[static_cast<std::size_t>(h)];
        }
        out.push_back(fault);
    }
    return out;
}

StabilizationReport run_stabilization(const protocol::Topology& topo, const std::vector<protocol::Fault>& faults,
                                      int frames, int preconverge) {
    const auto paths = oracle::advertised_paths(topo);
    const auto goal = oracle::expected_tables(topo, paths);
    const auto sets = oracle::hop_sets(topo, paths);
    const int k = topo.config.max_hops;

    StabilizationReport rep;
    rep.max_hops = k;
    protocol::Network net(topo);
    if (preconverge > 0) net.converge(preconverge);
    for (const auto& f : faults) net.apply(f);

    auto first = protocol::variant_values(net, {}, goal);
    std::array<int, 4> last_counts = first.counts;
    const int unset = -1;
    std::vector<int> last_v(static_cast<std::size_t>(k + 1), unset);
    bool legit = protocol::check_ladder(net, {}, sets).level() == k + 1;
    if (legit) rep.reached = 0;
    int actions = 0;
    int frame = 0;

    net.set_hook([&](const protocol::Network& n, const protocol::StepRecord& r) {
        ++actions;
        const auto fl = in_flight(r);
        const auto v = protocol::variant_values(n, fl, goal);
        if (v.counts > last_counts) rep.counts_monotone = false;
        last_counts = v.counts;
        const auto ladder = protocol::check_ladder(n, fl, sets);
        for (int q = 1; q <= k; ++q) {
            const auto qi = static_cast<std::size_t>(q);
            if (!ladder.holds[qi]) {
                last_v[qi] = unset;
                continue;
            }
            if (last_v[qi] != unset && v.v[qi] > last_v[qi]) rep.v_monotone = false;
            last_v[qi] = v.v[qi];
        }
        const bool now = ladder.level() == k + 1;
        if (!now && rep.reached) rep.left_legitimate = true;
        legit = now;
    });

    for (frame = 1; frame <= frames; ++frame) {
        actions = 0;
        net.run_frame();
        if (legit && !rep.reached) rep.reached = frame;
        const auto v = protocol::variant_values(net, {}, goal);
        rep.frames.push_back({frame, protocol::check_ladder(net, {}, sets).level(), v.counts, v.v, actions});
    }
    net.set_hook(nullptr);
    rep.matches_oracle = net.tables() == goal;
    return rep;
}

OptimalityReport check_optimality(const protocol::Topology& topo, int max_frames) {
    OptimalityReport rep;
    protocol::Network net(topo);
    rep.converged = net.converge(max_frames).has_value();
    const auto expected = oracle::expected_tables(topo, oracle::advertised_paths(topo));
    const auto got = net.tables();
    const int k = topo.config.max_hops, f = topo.config.frame_len;
    for (std::size_t i = 0; i < got.size(); ++i)
        for (int q = 1; q <= k; ++q)
            for (int p = 1; p <= f; ++p) {
                ++rep.cells;
                if (got[i].at(q, p).delay != expected[i].at(q, p).delay) ++rep.cell_mismatches;
            }
    trace::SlotGrid grid;
    grid.slot_len = 1;
    grid.frame_len = f;
    for (NodeId n : topo.config.nodes) {
        if (n == topo.config.destination) continue;
        const auto best = oracle::optimal_routes(topo, n);
        for (int x = 1; x <= f; ++x) {
            const routing::ForwardPlan plan(net.node(n).table(), x - 0.5, grid);
            for (int d = 0; d <= f * (k + 1); ++d) {
                ++rep.queries;
                const auto a = plan.select(routing::Deadline{static_cast<double>(d)});
                const auto b = best.select(x, d);
                const bool same = (!a && !b) || (a && b && a->hops == b->hops &&
                                                  static_cast<std::int64_t>(a->delay_seconds) == b->delay);
                if (!same) ++rep.forward_mismatches;
            }
        }
    }
    return rep;
}

}  // namespace reaper::experiments
