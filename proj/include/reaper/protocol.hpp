#pragma once

#include "reaper/predict.hpp"
#include "reaper/routing.hpp"
#include "reaper/types.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reaper::protocol {

using routing::SFrame;
using routing::TFrame;

struct ProtocolConfig {
    NodeId destination = 0;
    /// Every node including the destination.
    std::vector<NodeId> nodes;
    int max_hops = 3;
    int frame_len = 144;
};

enum class Action {
    None = 0,
    ResetDestination = 1,
    Reset = 2,
    ResetNextHop = 3,
    Send = 4,
    Quarantine = 5,
    Receive = 6,
};

const char* action_name(Action a);

struct GuardReport {
    bool c1 = true;
    bool c2 = true;
    /// True when no frame is pending.
    bool c3 = true;
    /// (q, p) of offending cells, row-major.
    std::vector<std::pair<int, int>> violating_cells;
};

/// Guarded-command process of one node. Each event fires at most one action;
/// resets take priority, so a receive that loses to a reset stays pending.
class NodeProcess {
public:
    NodeProcess(NodeId id, const ProtocolConfig& cfg);

    NodeId id() const { return id_; }
    bool is_destination() const { return id_ == destination_; }

    TFrame& table() { return t_; }
    const TFrame& table() const { return t_; }

    void set_beta(NodeId neighbor, predict::BetaFrame beta);
    void clear_beta(NodeId neighbor) { betas_.erase(neighbor); }
    const predict::BetaFrame* beta(NodeId neighbor) const;
    const std::map<NodeId, predict::BetaFrame>& beta_frames() const { return betas_; }

    /// Last s-frame accepted from `neighbor`.
    const SFrame* last_received(NodeId neighbor) const;
    void set_last_received(NodeId neighbor, SFrame s) { history_[neighbor] = std::move(s); }
    void reset_history(NodeId neighbor) { history_.erase(neighbor); }

    bool c1() const;
    bool c2() const;
    bool c3(const SFrame& incoming) const;
    GuardReport eval_guards(const SFrame* incoming = nullptr) const;

    /// Whether the guard of `a` holds. Actions 5 and 6 take the pending
    /// frame; action 4 takes the neighbor.
    bool enabled(Action a, const SFrame* incoming = nullptr, NodeId neighbor = kNoHop) const;

    /// Fires a reset action (1)-(3) if one is enabled.
    Action audit();

    struct SendResult {
        Action action = Action::None;
        std::optional<SFrame> frame;
    };
    /// Reset if enabled, otherwise action (4) when its guard holds.
    SendResult send(NodeId neighbor);

    /// Reset if enabled (the frame stays pending), otherwise (5) or (6).
    Action receive(const SFrame& s);

private:
    bool valid_hop(NodeId hop) const;
    std::optional<std::pair<int, int>> first_c2_violation() const;
    std::vector<std::pair<int, int>> c1_violations() const;
    std::vector<std::pair<int, int>> c3_violations(const SFrame& s) const;

    NodeId id_;
    NodeId destination_;
    std::vector<NodeId> nodes_;
    TFrame t_;
    std::map<NodeId, predict::BetaFrame> betas_;
    std::map<NodeId, SFrame> history_;
};

/// Static meeting topology: one beta frame per linked pair.
struct Topology {
    ProtocolConfig config;
    std::map<NodePair, predict::BetaFrame> links;

    void validate() const;
};

struct StepRecord {
    NodeId node = kNoHop;
    Action action = Action::None;
    /// For a send, the frame just emitted; otherwise the frame pending at
    /// `node` while the step ran, if any.
    const SFrame* pending = nullptr;
};

/// Cell overwrite or history reset applied to a node before the run.
struct Fault {
    double time = 0.0;
    NodeId node = kNoHop;
    bool reset_history = false;
    NodeId neighbor = kNoHop;
    int q = 0;
    int p = 0;
    routing::PathEntry entry;
};

/// Lines `time node q p delay next_hop` (delay may be `inf`, next hop `X`)
/// or `time reset-history node neighbor`; `#` starts a comment.
std::vector<Fault> parse_fault_script(std::istream& in);

class Network {
public:
    explicit Network(Topology topo);

    const Topology& topology() const { return topo_; }
    const ProtocolConfig& config() const { return topo_.config; }

    NodeProcess& node(NodeId id);
    const NodeProcess& node(NodeId id) const;
    const std::vector<NodeProcess>& nodes() const { return nodes_; }

    using Hook = std::function<void(const Network&, const StepRecord&)>;
    /// Called after every fired action.
    void set_hook(Hook hook) { hook_ = std::move(hook); }

    void apply(const Fault& f);

    /// Audits both ends, then exchanges s-frames in both directions.
    /// Returns the number of actions fired.
    int contact(NodeId a, NodeId b);
    /// Audits every node until no reset is enabled.
    int audit_all();
    /// One frame period: each slot audits every node, then every linked pair
    /// meets at each of its beta slots.
    int run_frame();
    /// Runs frames until a frame changes no t-frame. Returns frames run, or
    /// nullopt if still changing after `max_frames`.
    std::optional<int> converge(int max_frames);

    std::vector<TFrame> tables() const;
    /// Finite cells over all s-frames sent so far.
    long long sframe_cells_sent() const { return sframe_cells_sent_; }
    long long sframes_sent() const { return sframes_sent_; }

private:
    int drain_audit(NodeProcess& n);
    int deliver(NodeProcess& to, const SFrame& s);
    void fire(NodeId node, Action a, const SFrame* pending);

    Topology topo_;
    std::vector<NodeProcess> nodes_;
    std::map<NodeId, std::size_t> index_;
    Hook hook_;
    long long sframe_cells_sent_ = 0;
    long long sframes_sent_ = 0;
};

struct StabilizationLadder {
    /// holds[r] is H.r for r = 0..K+1.
    std::vector<bool> holds;
    /// hop_sets[r] is I_r for r = 0..K.
    std::vector<std::set<NodeId>> hop_sets;

    /// Largest r with H.0 .. H.r all true.
    int level() const;
};

/// Evaluates H.0..H.(K+1) on a snapshot. C.3 is checked against `in_flight`
/// frames and against the frame each neighbor would send now; `hop_sets` come
/// from an oracle.
StabilizationLadder check_ladder(const Network& net, const std::vector<const SFrame*>& in_flight,
                                 const std::vector<std::set<NodeId>>& hop_sets);

struct VariantValues {
    /// Nodes with the guard of actions 1, 2, 3 and 5 enabled; for action 5 the
    /// offers are the frames in flight and those neighbors would send now.
    std::array<int, 4> counts{};
    /// v[r] is V_(r+1) = Omega_(r+1) - P_(r+1)(s), for r = 1..K (index 0 unused).
    std::vector<int> v;
};

/// `converged` are the oracle's final tables in node order.
VariantValues variant_values(const Network& net, const std::vector<const SFrame*>& in_flight,
                             const std::vector<TFrame>& converged);

}  // namespace reaper::protocol
