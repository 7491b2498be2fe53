#include "reaper/path_oracle.hpp"

#include <algorithm>
#include <functional>

namespace reaper::oracle {

namespace {

struct Edge {
    NodeId to;
    const std::vector<int>* slots;
};

using Adjacency = std::map<NodeId, std::vector<Edge>>;

Adjacency adjacency(const protocol::Topology& topo) {
    Adjacency adj;
    for (NodeId n : topo.config.nodes) adj[n];
    for (const auto& [pair, beta] : topo.links) {
        adj[pair.first].push_back({pair.second, &beta.betas});
        adj[pair.second].push_back({pair.first, &beta.betas});
    }
    for (auto& [n, edges] : adj)
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
    return adj;
}

// Slots strictly after `from` up to and including `to`, wrapping: 1..F.
int forward_gap(int from, int to, int f) { return ((to - from - 1) % f + f) % f + 1; }

int next_meeting_gap(const std::vector<int>& slots, int t, int f) {
    int best = f;
    for (int s : slots) best = std::min(best, forward_gap(t, s, f));
    return best;
}

}  // namespace

std::int64_t PathTable::within(int q, int p) const {
    std::int64_t best = kUnreachable;
    for (int r = 1; r <= q; ++r) best = std::min(best, at(r, p));
    return best;
}

std::int64_t PathTable::kept(int q, int p) const {
    const std::int64_t here = at(q, p);
    return here < within(q - 1, p) ? here : kUnreachable;
}

std::map<NodeId, PathTable> advertised_paths(const protocol::Topology& topo) {
    const auto& cfg = topo.config;
    const int K = cfg.max_hops, F = cfg.frame_len;
    const auto adj = adjacency(topo);
    std::map<NodeId, PathTable> out;

    for (NodeId src : cfg.nodes) {
        PathTable table;
        table.node = src;
        table.max_hops = K;
        table.frame_len = F;
        table.exact.assign(static_cast<std::size_t>((K + 1) * F), kUnreachable);
        table.first_hop.assign(table.exact.size(), kNoHop);
        if (src == cfg.destination) {
            out[src] = std::move(table);
            continue;
        }
        int start = 0;
        NodeId first = kNoHop;
        // At node v, having arrived from u over a meeting in slot t.
        std::function<void(NodeId, NodeId, const std::vector<int>&, int, int, std::int64_t)> walk =
            [&](NodeId v, NodeId u, const std::vector<int>& via, int t, int hops, std::int64_t delay) {
                if (v == cfg.destination) {
                    auto idx = static_cast<std::size_t>(hops * F + start - 1);
                    if (delay < table.exact[idx] || (delay == table.exact[idx] && first < table.first_hop[idx])) {
                        table.exact[idx] = delay;
                        table.first_hop[idx] = first;
                    }
                    return;
                }
                if (hops == K) return;
                const int span = next_meeting_gap(via, t, F);
                for (const auto& e : adj.at(v)) {
                    if (e.to == u) continue;
                    for (int s : *e.slots) {
                        const int g = forward_gap(t, s, F);
                        if (g <= span) walk(e.to, v, *e.slots, s, hops + 1, delay + g);
                    }
                }
            };
        for (const auto& e : adj.at(src))
            for (int s : *e.slots) {
                start = s;
                first = e.to;
                walk(e.to, src, *e.slots, s, 1, 0);
            }
        out[src] = std::move(table);
    }
    return out;
}

std::vector<routing::TFrame> expected_tables(const protocol::Topology& topo,
                                             const std::map<NodeId, PathTable>& paths) {
    const auto& cfg = topo.config;
    std::vector<routing::TFrame> out;
    for (NodeId n : cfg.nodes) {
        routing::TFrame t(n, cfg.max_hops, cfg.frame_len, n == cfg.destination);
        const auto& pt = paths.at(n);
        if (n != cfg.destination)
            for (int q = 1; q <= cfg.max_hops; ++q)
                for (int p = 1; p <= cfg.frame_len; ++p) {
                    const std::int64_t d = pt.kept(q, p);
                    if (d == kUnreachable) continue;
                    t.at(q, p) = {static_cast<routing::SlotDelay>(d),
                                  pt.first_hop[static_cast<std::size_t>(q * cfg.frame_len + p - 1)]};
                }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::set<NodeId>> hop_sets(const protocol::Topology& topo,
                                       const std::map<NodeId, PathTable>& paths) {
    const auto& cfg = topo.config;
    std::vector<std::set<NodeId>> sets(static_cast<std::size_t>(cfg.max_hops + 1));
    sets[0] = {cfg.destination};
    for (const auto& [n, pt] : paths) {
        if (n == cfg.destination) continue;
        for (int r = 1; r <= cfg.max_hops; ++r)
            for (int p = 1; p <= cfg.frame_len; ++p)
                if (pt.within(r, p) != kUnreachable) sets[static_cast<std::size_t>(r)].insert(n);
    }
    return sets;
}

std::optional<Route> RouteTable::select(int x, std::int64_t deadline_slots) const {
    for (int q = 1; q <= max_hops; ++q) {
        const std::int64_t d = best[static_cast<std::size_t>(q)][static_cast<std::size_t>(x - 1)];
        if (d <= deadline_slots) return Route{q, d};
    }
    return std::nullopt;
}

RouteTable optimal_routes(const protocol::Topology& topo, NodeId source) {
    const auto& cfg = topo.config;
    const int K = cfg.max_hops, F = cfg.frame_len;
    const auto adj = adjacency(topo);
    // from_slot[q][t-1]: least delay of a q-hop path whose first hop is in slot t.
    std::vector<std::vector<std::int64_t>> from_slot(static_cast<std::size_t>(K + 1),
                                                     std::vector<std::int64_t>(static_cast<std::size_t>(F), kUnreachable));
    int start = 0;
    std::function<void(NodeId, int, int, std::int64_t)> walk = [&](NodeId v, int t, int hops, std::int64_t delay) {
        if (v == cfg.destination) {
            auto& cell = from_slot[static_cast<std::size_t>(hops)][static_cast<std::size_t>(start - 1)];
            cell = std::min(cell, delay);
            return;
        }
        if (hops == K) return;
        for (const auto& e : adj.at(v))
            for (int s : *e.slots) walk(e.to, s, hops + 1, delay + forward_gap(t, s, F));
    };
    if (source != cfg.destination)
        for (const auto& e : adj.at(source))
            for (int s : *e.slots) {
                start = s;
                walk(e.to, s, 1, 0);
            }

    RouteTable rt;
    rt.max_hops = K;
    rt.frame_len = F;
    rt.best.assign(static_cast<std::size_t>(K + 1), std::vector<std::int64_t>(static_cast<std::size_t>(F), kUnreachable));
    for (int q = 1; q <= K; ++q)
        for (int x = 1; x <= F; ++x)
            for (int t = 1; t <= F; ++t) {
                const std::int64_t d = from_slot[static_cast<std::size_t>(q)][static_cast<std::size_t>(t - 1)];
                if (d == kUnreachable) continue;
                const std::int64_t wait = ((t - x) % F + F) % F;
                auto& cell = rt.best[static_cast<std::size_t>(q)][static_cast<std::size_t>(x - 1)];
                cell = std::min(cell, wait + d);
            }
    return rt;
}

}  // namespace reaper::oracle
