#include "reaper/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace reaper::baselines {

ProphetState::ProphetState(NodeId self, ProphetParams params) : self_(self), params_(params) {}

double ProphetState::pred(NodeId n) const {
    if (n == self_) return 1.0;
    auto it = pred_.find(n);
    return it == pred_.end() ? 0.0 : it->second;
}

void ProphetState::set_pred(NodeId n, double p) {
    if (n == self_) return;
    pred_[n] = std::clamp(p, 0.0, 1.0);
}

void ProphetState::encounter(NodeId b) {
    const double p = pred(b);
    set_pred(b, p + (1.0 - p) * params_.p_init);
}

void ProphetState::age(double elapsed_seconds) {
    if (elapsed_seconds <= 0.0) return;
    const double factor = std::pow(params_.gamma, elapsed_seconds / params_.time_unit);
    for (auto& [n, p] : pred_) p *= factor;
}

void ProphetState::age_to(double now) {
    age(now - last_aged_);
    last_aged_ = std::max(last_aged_, now);
}

void ProphetState::transitive(NodeId b, const ProphetState& peer) {
    const double pab = pred(b);
    for (const auto& [c, pbc] : peer.vector()) {
        if (c == self_ || c == b) continue;
        const double pac = pred(c);
        set_pred(c, pac + (1.0 - pac) * pab * pbc * params_.beta);
    }
}

void prophet_contact(ProphetState& a, ProphetState& b, double now) {
    a.age_to(now);
    b.age_to(now);
    a.encounter(b.self());
    b.encounter(a.self());
    const ProphetState snap_a = a, snap_b = b;
    a.transitive(b.self(), snap_b);
    b.transitive(a.self(), snap_a);
}

bool prophet_forward(const ProphetState& a, const ProphetState& b, NodeId dest) {
    return b.pred(dest) > a.pred(dest);
}

MeedState::MeedState(NodeId self, double observe_from) : self_(self), observe_from_(observe_from) {
    dv_[self] = {0.0, self};
}

void MeedState::contact_start(NodeId peer, double t) {
    auto& e = edges_[peer];
    if (e.in_contact) return;
    const double since = e.last_end < 0.0 ? observe_from_ : e.last_end;
    // Contacts in the same instant as the previous end are one contact.
    if (t > since) {
        e.sum += t - since;
        ++e.samples;
    }
    e.in_contact = true;
}

void MeedState::contact_end(NodeId peer, double t) {
    auto& e = edges_[peer];
    e.in_contact = false;
    e.last_end = t;
}

std::optional<double> MeedState::edge_cost(NodeId peer) const {
    auto it = edges_.find(peer);
    if (it == edges_.end()) return std::nullopt;
    if (it->second.fixed) return it->second.fixed;
    if (it->second.samples == 0) return std::nullopt;
    return it->second.sum / static_cast<double>(it->second.samples);
}

void MeedState::set_edge_cost(NodeId peer, double cost) {
    if (!(cost > 0.0)) throw Error("edge cost must be positive");
    edges_[peer].fixed = cost;
}

std::optional<DistanceEntry> MeedState::route(NodeId dest) const {
    auto it = dv_.find(dest);
    if (it == dv_.end()) return std::nullopt;
    return it->second;
}

void MeedState::relax_with(const MeedState& peer) {
    const NodeId b = peer.self();
    // Zero-length contacts carry no sample yet; route as if a tiny cost.
    const double w = edge_cost(b).value_or(1.0);
    for (auto it = dv_.begin(); it != dv_.end();) {
        auto theirs = peer.vector().find(it->first);
        const bool gone = theirs == peer.vector().end() || theirs->second.next_hop == self_;
        if (it->first != self_ && it->second.next_hop == b && gone)
            it = dv_.erase(it);
        else
            ++it;
    }
    for (const auto& [dest, entry] : peer.vector()) {
        if (dest == self_) continue;
        if (entry.next_hop == self_) continue;  // split horizon
        const double cand = w + entry.cost;
        auto it = dv_.find(dest);
        if (it == dv_.end() || it->second.next_hop == b || cand < it->second.cost)
            dv_[dest] = {cand, b};
    }
}

NodeId MeedState::next_hop(NodeId dest) const {
    auto it = dv_.find(dest);
    return it == dv_.end() || dest == self_ ? kNoHop : it->second.next_hop;
}

void meed_exchange(MeedState& a, MeedState& b) {
    const MeedState snap_a = a, snap_b = b;
    a.relax_with(snap_b);
    b.relax_with(snap_a);
}

}  // namespace reaper::baselines
