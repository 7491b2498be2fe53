#pragma once

#include "reaper/protocol.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

// Exhaustive path enumeration over a static meeting topology. Used to check
// converged routing tables and forwarding choices on small networks.
namespace reaper::oracle {

inline constexpr std::int64_t kUnreachable = INT64_MAX;

/// Best delay per (hops, start slot) for one node: exactly-q-hop values.
struct PathTable {
    NodeId node = kNoHop;
    int max_hops = 0;
    int frame_len = 0;
    std::vector<std::int64_t> exact;
    std::vector<NodeId> first_hop;

    std::int64_t at(int q, int p) const {
        return exact[static_cast<std::size_t>(q) * static_cast<std::size_t>(frame_len) +
                     static_cast<std::size_t>(p - 1)];
    }
    /// Best over 1..q hops.
    std::int64_t within(int q, int p) const;
    /// Delay a converged table keeps at (q, p): finite only when strictly
    /// better than every fewer-hop path at that slot.
    std::int64_t kept(int q, int p) const;
};

/// Paths as the table exchange can represent them: each hop after the first
/// happens after the previous meeting and no later than that pair's next
/// meeting, and never returns straight to the node it came from.
std::map<NodeId, PathTable> advertised_paths(const protocol::Topology& topo);

/// Tables holding the kept delays; next hop is the lowest-id first hop among
/// best paths.
std::vector<routing::TFrame> expected_tables(const protocol::Topology& topo,
                                             const std::map<NodeId, PathTable>& paths);

/// I_0 = {D}; I_r = relays with some path of at most r hops.
std::vector<std::set<NodeId>> hop_sets(const protocol::Topology& topo,
                                       const std::map<NodeId, PathTable>& paths);

struct Route {
    int hops = 0;
    std::int64_t delay = 0;
    friend bool operator==(const Route&, const Route&) = default;
};

/// Unrestricted time-respecting paths (revisits allowed, any wait up to a
/// frame between hops). best[q][x-1] = least delay from normalized slot x with
/// exactly q hops; the first hop may leave in slot x itself.
struct RouteTable {
    int max_hops = 0;
    int frame_len = 0;
    std::vector<std::vector<std::int64_t>> best;

    /// Fewest hops meeting the deadline, then least delay.
    std::optional<Route> select(int x, std::int64_t deadline_slots) const;
};

RouteTable optimal_routes(const protocol::Topology& topo, NodeId source);

}  // namespace reaper::oracle
