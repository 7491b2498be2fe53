#pragma once

#include "reaper/types.hpp"

#include <cstddef>
#include <map>
#include <optional>

// Single-copy comparison protocols: PROPHET and MEED-DVR.
namespace reaper::baselines {

struct ProphetParams {
    double p_init = 0.75;
    double beta = 0.25;
    double gamma = 0.98;
    /// Seconds per aging step; the slot length of the grid in use.
    double time_unit = 600.0;
};

/// Delivery predictabilities held by one node.
class ProphetState {
public:
    explicit ProphetState(NodeId self = 0, ProphetParams params = {});

    NodeId self() const { return self_; }
    const ProphetParams& params() const { return params_; }

    /// P(self, n); 0 for unknown nodes, 1 for self.
    double pred(NodeId n) const;
    void set_pred(NodeId n, double p);
    const std::map<NodeId, double>& vector() const { return pred_; }

    /// P(self, b) += (1 - P) * p_init.
    void encounter(NodeId b);
    /// Every P *= gamma^k with k = elapsed / time_unit.
    void age(double elapsed_seconds);
    /// Ages up to absolute time `now` from the last aging instant.
    void age_to(double now);
    /// P(self, c) += (1 - P(self, c)) * P(self, b) * P(b, c) * beta for all c
    /// known to b, using b's vector as given.
    void transitive(NodeId b, const ProphetState& peer);

private:
    NodeId self_;
    ProphetParams params_;
    std::map<NodeId, double> pred_;
    double last_aged_ = 0.0;
};

/// Both ends age to `now`, record the encounter, then apply transitivity from
/// a snapshot of the peer taken after its encounter update.
void prophet_contact(ProphetState& a, ProphetState& b, double now);

/// Transfer iff P_b(dest) > P_a(dest).
bool prophet_forward(const ProphetState& a, const ProphetState& b, NodeId dest);

struct DistanceEntry {
    double cost = 0.0;
    NodeId next_hop = kNoHop;
};

/// Mean inter-contact edge costs plus a distance vector.
class MeedState {
public:
    /// `observe_from`: the instant observation began; the wait from it to a
    /// pair's first contact counts as that pair's first inter-contact sample.
    explicit MeedState(NodeId self = 0, double observe_from = 0.0);

    NodeId self() const { return self_; }

    void contact_start(NodeId peer, double t);
    void contact_end(NodeId peer, double t);

    /// Mean observed inter-contact seconds; nullopt before any sample.
    std::optional<double> edge_cost(NodeId peer) const;
    /// Overrides the measured cost (frozen-cost experiments).
    void set_edge_cost(NodeId peer, double cost);

    std::optional<DistanceEntry> route(NodeId dest) const;
    const std::map<NodeId, DistanceEntry>& vector() const { return dv_; }

    /// Bellman-Ford relaxation with the peer's vector over the current edge
    /// cost; an entry already routed through the peer follows its new value.
    void relax_with(const MeedState& peer);

    /// Next hop toward dest, kNoHop when unknown.
    NodeId next_hop(NodeId dest) const;

private:
    struct EdgeStats {
        double sum = 0.0;
        std::size_t samples = 0;
        double last_end = -1.0;
        bool in_contact = false;
        std::optional<double> fixed;
    };

    NodeId self_;
    double observe_from_;
    std::map<NodeId, EdgeStats> edges_;
    std::map<NodeId, DistanceEntry> dv_;
};

/// Exchanges vectors both ways from snapshots taken before either update.
void meed_exchange(MeedState& a, MeedState& b);

}  // namespace reaper::baselines
