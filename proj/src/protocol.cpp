#include "reaper/protocol.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

namespace reaper::protocol {

using routing::kInfiniteDelay;
using routing::PathEntry;

const char* action_name(Action a) {
    switch (a) {
        case Action::None: return "none";
        case Action::ResetDestination: return "reset-destination";
        case Action::Reset: return "reset";
        case Action::ResetNextHop: return "reset-next-hop";
        case Action::Send: return "send";
        case Action::Quarantine: return "quarantine";
        case Action::Receive: return "receive";
    }
    return "?";
}

NodeProcess::NodeProcess(NodeId id, const ProtocolConfig& cfg)
    : id_(id), destination_(cfg.destination), nodes_(cfg.nodes),
      t_(id, cfg.max_hops, cfg.frame_len, id == cfg.destination) {
    std::sort(nodes_.begin(), nodes_.end());
}

void NodeProcess::set_beta(NodeId neighbor, predict::BetaFrame beta) {
    beta.validate();
    if (beta.frame_len != t_.frame_len()) throw Error("beta frame length differs from t-frame length");
    betas_[neighbor] = std::move(beta);
}

const predict::BetaFrame* NodeProcess::beta(NodeId neighbor) const {
    auto it = betas_.find(neighbor);
    return it == betas_.end() ? nullptr : &it->second;
}

const SFrame* NodeProcess::last_received(NodeId neighbor) const {
    auto it = history_.find(neighbor);
    return it == history_.end() ? nullptr : &it->second;
}

bool NodeProcess::valid_hop(NodeId hop) const {
    return hop != id_ && std::binary_search(nodes_.begin(), nodes_.end(), hop);
}

std::vector<std::pair<int, int>> NodeProcess::c1_violations() const {
    std::vector<std::pair<int, int>> bad;
    const int K = t_.max_hops(), F = t_.frame_len();
    if (is_destination()) {
        if (t_.at(0, 1) != PathEntry{0, id_}) bad.push_back({0, 1});
        for (int p = 2; p <= F; ++p)
            if (!t_.at(0, p).empty()) bad.push_back({0, p});
        for (int q = 1; q <= K; ++q)
            for (int p = 1; p <= F; ++p)
                if (!t_.at(q, p).empty()) bad.push_back({q, p});
        return bad;
    }
    for (int p = 1; p <= F; ++p)
        if (!t_.at(0, p).empty()) bad.push_back({0, p});
    // Finite cells only: an empty cell carries no hop to check.
    for (int q = 1; q <= K; ++q)
        for (int p = 1; p <= F; ++p) {
            const auto& c = t_.at(q, p);
            if (c.finite() && (c.delay < 0 || !valid_hop(c.next_hop))) bad.push_back({q, p});
        }
    return bad;
}

bool NodeProcess::c1() const { return c1_violations().empty(); }

std::optional<std::pair<int, int>> NodeProcess::first_c2_violation() const {
    if (is_destination()) return std::nullopt;
    const int K = t_.max_hops(), F = t_.frame_len();
    for (int q = 1; q <= K; ++q)
        for (int p = 1; p <= F; ++p) {
            const auto& c = t_.at(q, p);
            if (c.finite() != (c.next_hop != kNoHop)) return std::pair{q, p};
            if (!c.finite()) continue;
            const SFrame* so = last_received(c.next_hop);
            if (!so || so->at_slot(q, p) != c.delay) return std::pair{q, p};
            const auto* b = beta(c.next_hop);
            if (!b || !b->contains(p)) return std::pair{q, p};
            for (int r = 1; r < q; ++r)
                if (t_.at(r, p).finite() && t_.at(r, p).delay <= c.delay) return std::pair{q, p};
        }
    return std::nullopt;
}

bool NodeProcess::c2() const { return !first_c2_violation(); }

std::vector<std::pair<int, int>> NodeProcess::c3_violations(const SFrame& s) const {
    std::vector<std::pair<int, int>> bad;
    // Compared against the offer's best up to row q: a path that moved to a
    // lower row is an improvement, not a worse offer.
    for (int q = 1; q <= t_.max_hops(); ++q)
        for (int p = 1; p <= t_.frame_len(); ++p) {
            const auto& c = t_.at(q, p);
            if (c.next_hop == s.from() && c.delay < s.effective_at_slot(q, p)) bad.push_back({q, p});
        }
    return bad;
}

bool NodeProcess::c3(const SFrame& incoming) const { return c3_violations(incoming).empty(); }

GuardReport NodeProcess::eval_guards(const SFrame* incoming) const {
    GuardReport r;
    r.violating_cells = c1_violations();
    r.c1 = r.violating_cells.empty();
    if (auto v = first_c2_violation()) {
        r.c2 = false;
        r.violating_cells.push_back(*v);
    }
    if (incoming) {
        auto v = c3_violations(*incoming);
        r.c3 = v.empty();
        r.violating_cells.insert(r.violating_cells.end(), v.begin(), v.end());
    }
    return r;
}

bool NodeProcess::enabled(Action a, const SFrame* incoming, NodeId neighbor) const {
    const bool dest = is_destination();
    if (incoming) neighbor = incoming->from();
    const bool linked = neighbor != kNoHop && beta(neighbor) != nullptr;
    switch (a) {
        case Action::ResetDestination: return dest && !c1();
        case Action::Reset: return !dest && !c1();
        case Action::ResetNextHop: return !dest && c1() && !c2();
        case Action::Send: return linked && neighbor != destination_ && c1() && c2();
        case Action::Quarantine:
            return incoming && linked && !dest && c1() && c2() && !c3(*incoming);
        case Action::Receive: return incoming && linked && !dest && c2() && c3(*incoming);
        case Action::None: return false;
    }
    return false;
}

Action NodeProcess::audit() {
    if (is_destination()) {
        if (c1()) return Action::None;
        t_.reset();
        return Action::ResetDestination;
    }
    if (!c1()) {
        t_.reset();
        return Action::Reset;
    }
    if (auto v = first_c2_violation()) {
        NodeId hop = t_.at(v->first, v->second).next_hop;
        t_.reset_next_hop(hop);
        if (hop == kNoHop) t_.at(v->first, v->second).reset();
        return Action::ResetNextHop;
    }
    return Action::None;
}

NodeProcess::SendResult NodeProcess::send(NodeId neighbor) {
    if (Action a = audit(); a != Action::None) return {a, std::nullopt};
    if (!enabled(Action::Send, nullptr, neighbor)) return {};
    return {Action::Send, routing::build_sframe(t_, *beta(neighbor), neighbor)};
}

Action NodeProcess::receive(const SFrame& s) {
    if (s.to() != id_) throw Error("s-frame delivered to the wrong node");
    if (Action a = audit(); a != Action::None) return a;
    if (enabled(Action::Quarantine, &s)) {
        t_.reset_next_hop(s.from());
        return Action::Quarantine;
    }
    if (!enabled(Action::Receive, &s)) return Action::None;
    routing::apply_sframe(t_, s);
    // Entries kept from an older frame of this neighbor follow its new offer.
    const NodeId j = s.from();
    for (int q = 1; q <= t_.max_hops(); ++q)
        for (int p = 1; p <= t_.frame_len(); ++p) {
            auto& c = t_.at(q, p);
            if (c.next_hop == j && c.delay != s.at_slot(q, p)) c.reset();
        }
    history_[j] = s;
    return Action::Receive;
}

void Topology::validate() const {
    const auto& nodes = config.nodes;
    if (std::find(nodes.begin(), nodes.end(), config.destination) == nodes.end())
        throw Error("topology: destination is not a node");
    for (const auto& [pair, beta] : links) {
        if (pair.first == pair.second || std::find(nodes.begin(), nodes.end(), pair.first) == nodes.end() ||
            std::find(nodes.begin(), nodes.end(), pair.second) == nodes.end())
            throw Error("topology: link endpoint is not a node");
        if (beta.frame_len != config.frame_len) throw Error("topology: beta frame length mismatch");
        beta.validate();
    }
}

std::vector<Fault> parse_fault_script(std::istream& in) {
    std::vector<Fault> out;
    std::string line;
    int lineno = 0;
    auto bad = [&](const std::string& why) {
        return Error("fault script line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        Fault f;
        std::size_t i = 0;
        try {
            if (tok[0] != "reset-history") f.time = std::stod(tok[i++]);
            if (i < tok.size() && tok[i] == "reset-history") {
                if (tok.size() != i + 3) throw bad("expected reset-history node neighbor");
                f.reset_history = true;
                f.node = std::stoi(tok[i + 1]);
                f.neighbor = std::stoi(tok[i + 2]);
            } else {
                if (tok.size() != 6) throw bad("expected time node q p delay next_hop");
                f.node = std::stoi(tok[1]);
                f.q = std::stoi(tok[2]);
                f.p = std::stoi(tok[3]);
                f.entry.delay = tok[4] == "inf" ? kInfiniteDelay : std::stoi(tok[4]);
                f.entry.next_hop = tok[5] == "X" ? kNoHop : std::stoi(tok[5]);
            }
        } catch (const std::logic_error&) {
            throw bad("malformed number");
        }
        out.push_back(f);
    }
    return out;
}

Network::Network(Topology topo) : topo_(std::move(topo)) {
    topo_.validate();
    for (NodeId id : topo_.config.nodes) {
        if (index_.count(id)) throw Error("topology: duplicate node");
        index_[id] = nodes_.size();
        nodes_.emplace_back(id, topo_.config);
    }
    for (const auto& [pair, beta] : topo_.links) {
        node(pair.first).set_beta(pair.second, beta);
        node(pair.second).set_beta(pair.first, beta);
    }
}

NodeProcess& Network::node(NodeId id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown node " + std::to_string(id));
    return nodes_[it->second];
}

const NodeProcess& Network::node(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown node " + std::to_string(id));
    return nodes_[it->second];
}

void Network::apply(const Fault& f) {
    auto& n = node(f.node);
    if (f.reset_history) {
        n.reset_history(f.neighbor);
        return;
    }
    if (f.q < 0 || f.q > n.table().max_hops() || f.p < 1 || f.p > n.table().frame_len())
        throw Error("fault cell outside the t-frame");
    n.table().at(f.q, f.p) = f.entry;
}

void Network::fire(NodeId node, Action a, const SFrame* pending) {
    if (hook_) hook_(*this, StepRecord{node, a, pending});
}

int Network::drain_audit(NodeProcess& n) {
    int fired = 0;
    for (Action a; (a = n.audit()) != Action::None; ++fired) fire(n.id(), a, nullptr);
    return fired;
}

int Network::deliver(NodeProcess& to, const SFrame& s) {
    int fired = 0;
    for (;;) {
        Action a = to.receive(s);
        if (a == Action::None) break;
        ++fired;
        fire(to.id(), a, &s);
        if (a == Action::Quarantine || a == Action::Receive) break;
    }
    return fired;
}

int Network::contact(NodeId a, NodeId b) {
    auto& na = node(a);
    auto& nb = node(b);
    int fired = drain_audit(na) + drain_audit(nb);
    for (auto [from, to] : {std::pair{&na, &nb}, std::pair{&nb, &na}}) {
        auto r = from->send(to->id());
        if (!r.frame) continue;
        ++sframes_sent_;
        sframe_cells_sent_ += r.frame->finite_cells();
        ++fired;
        fire(from->id(), Action::Send, &*r.frame);
        fired += deliver(*to, *r.frame);
    }
    return fired;
}

int Network::audit_all() {
    int fired = 0;
    for (auto& n : nodes_) fired += drain_audit(n);
    return fired;
}

int Network::run_frame() {
    int fired = 0;
    for (int p = 1; p <= topo_.config.frame_len; ++p) {
        fired += audit_all();
        for (const auto& [pair, beta] : topo_.links)
            if (beta.contains(p)) fired += contact(pair.first, pair.second);
    }
    return fired;
}

std::optional<int> Network::converge(int max_frames) {
    for (int f = 1; f <= max_frames; ++f) {
        auto before = tables();
        run_frame();
        if (tables() == before) return f;
    }
    return std::nullopt;
}

std::vector<TFrame> Network::tables() const {
    std::vector<TFrame> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.table());
    return out;
}

int StabilizationLadder::level() const {
    int r = 0;
    while (r + 1 < static_cast<int>(holds.size()) && holds[static_cast<std::size_t>(r + 1)]) ++r;
    return r;
}

namespace {

// Frames every node would send to each neighbor now, where the send guard holds.
std::vector<SFrame> potential_frames(const Network& net) {
    std::vector<SFrame> out;
    for (const auto& [pair, beta] : net.topology().links)
        for (auto [from, to] : {std::pair{pair.first, pair.second}, std::pair{pair.second, pair.first}}) {
            const auto& sender = net.node(from);
            if (!sender.enabled(Action::Send, nullptr, to)) continue;
            out.push_back(routing::build_sframe(sender.table(), beta, to));
        }
    return out;
}

std::vector<const SFrame*> offers(const std::vector<SFrame>& potential,
                                  const std::vector<const SFrame*>& in_flight) {
    std::vector<const SFrame*> all = in_flight;
    for (const auto& s : potential) all.push_back(&s);
    return all;
}

}  // namespace

StabilizationLadder check_ladder(const Network& net, const std::vector<const SFrame*>& in_flight,
                                 const std::vector<std::set<NodeId>>& hop_sets) {
    const int K = net.config().max_hops;
    if (static_cast<int>(hop_sets.size()) != K + 1) throw Error("check_ladder: need hop sets I_0..I_K");
    StabilizationLadder ladder;
    ladder.hop_sets = hop_sets;
    ladder.holds.assign(static_cast<std::size_t>(K + 2), false);
    ladder.holds[0] = true;

    bool h1 = true;
    for (const auto& n : net.nodes()) h1 = h1 && n.c1() && n.c2();
    const auto potential = potential_frames(net);
    for (const SFrame* s : offers(potential, in_flight)) h1 = h1 && net.node(s->to()).c3(*s);
    ladder.holds[1] = h1;

    for (int r = 1; r <= K && ladder.holds[static_cast<std::size_t>(r)]; ++r) {
        bool ok = true;
        for (NodeId i : hop_sets[static_cast<std::size_t>(r)]) {
            const auto& ni = net.node(i);
            for (NodeId j : hop_sets[static_cast<std::size_t>(r - 1)]) {
                const auto* beta = ni.beta(j);
                if (i == j || !beta) continue;
                auto s = routing::build_sframe(net.node(j).table(), *beta, i);
                for (int q = 1; q <= r && ok; ++q)
                    for (int m = 0; m < s.columns() && ok; ++m)
                        ok = ni.table().effective_delay(q, s.meeting_slots()[static_cast<std::size_t>(m)]) <=
                             s.at(q, m);
            }
        }
        ladder.holds[static_cast<std::size_t>(r + 1)] = ok;
    }
    return ladder;
}

VariantValues variant_values(const Network& net, const std::vector<const SFrame*>& in_flight,
                             const std::vector<TFrame>& converged) {
    VariantValues out;
    const auto& nodes = net.nodes();
    if (converged.size() != nodes.size()) throw Error("variant_values: one converged table per node");
    const auto potential = potential_frames(net);
    const auto pending = offers(potential, in_flight);
    for (const auto& n : nodes) {
        out.counts[0] += n.enabled(Action::ResetDestination);
        out.counts[1] += n.enabled(Action::Reset);
        out.counts[2] += n.enabled(Action::ResetNextHop);
        bool quarantine = false;
        for (const SFrame* s : pending)
            if (s->to() == n.id()) quarantine = quarantine || n.enabled(Action::Quarantine, s);
        out.counts[3] += quarantine;
    }
    const int K = net.config().max_hops;
    out.v.assign(static_cast<std::size_t>(K + 1), 0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& now = nodes[k].table();
        const auto& goal = converged[k];
        for (int r = 1; r <= K; ++r)
            for (int p = 1; p <= now.frame_len(); ++p) {
                const auto& g = goal.at(r, p);
                if (!g.finite()) continue;
                out.v[static_cast<std::size_t>(r)] += now.at(r, p).delay == g.delay ? 0 : 1;
            }
    }
    return out;
}

}  // namespace reaper::protocol
