#pragma once

#include "reaper/predict.hpp"
#include "reaper/trace.hpp"
#include "reaper/types.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace reaper::routing {

/// Delay in slots; the sentinel exceeds any finite delay F*(K+1).
using SlotDelay = std::int32_t;
inline constexpr SlotDelay kInfiniteDelay = std::numeric_limits<SlotDelay>::max();

struct PathEntry {
    SlotDelay delay = kInfiniteDelay;
    NodeId next_hop = kNoHop;

    bool finite() const { return delay != kInfiniteDelay; }
    bool empty() const { return delay == kInfiniteDelay && next_hop == kNoHop; }
    void reset() { *this = PathEntry{}; }

    friend bool operator==(const PathEntry&, const PathEntry&) = default;
};

/// Routing table of a node: rows q = 0..K (path cost in hops), columns
/// p = 1..F (start slot of the path's first hop). Cell (q, p) holds the best
/// delay of a q-hop path leaving at slot p and its next hop.
class TFrame {
public:
    TFrame() = default;
    TFrame(NodeId owner, int max_hops, int frame_len, bool destination = false);

    /// Legitimate destination table: only (0, 1) = <0, owner>.
    static TFrame for_destination(NodeId owner, int max_hops, int frame_len);

    NodeId owner() const { return owner_; }
    bool destination() const { return destination_; }
    int max_hops() const { return max_hops_; }
    int frame_len() const { return frame_len_; }

    PathEntry& at(int q, int p) { return cells_[index(q, p)]; }
    const PathEntry& at(int q, int p) const { return cells_[index(q, p)]; }

    /// Every cell to <inf, X>; a destination also regains its 0-hop entry.
    void reset();
    /// Clears every cell whose next hop is `hop`; returns how many were cleared.
    int reset_next_hop(NodeId hop);

    int finite_cells() const;
    /// Prefix minimum of finite delays over rows 1..q of column p.
    SlotDelay effective_delay(int q, int p) const;

    friend bool operator==(const TFrame&, const TFrame&) = default;

private:
    std::size_t index(int q, int p) const {
        return static_cast<std::size_t>(q) * static_cast<std::size_t>(frame_len_) +
               static_cast<std::size_t>(p - 1);
    }

    NodeId owner_ = kNoHop;
    bool destination_ = false;
    int max_hops_ = 0;
    int frame_len_ = 0;
    std::vector<PathEntry> cells_;
};

/// Advertisement from `from` to `to`: rows q = 1..K, one column per meeting
/// slot of the pair's beta frame.
class SFrame {
public:
    SFrame() = default;
    SFrame(NodeId from, NodeId to, int max_hops, int frame_len, std::vector<int> meeting_slots);

    NodeId from() const { return from_; }
    NodeId to() const { return to_; }
    int max_hops() const { return max_hops_; }
    int frame_len() const { return frame_len_; }
    const std::vector<int>& meeting_slots() const { return slots_; }
    int columns() const { return static_cast<int>(slots_.size()); }

    SlotDelay& at(int q, int column) { return cells_[index(q, column)]; }
    SlotDelay at(int q, int column) const { return cells_[index(q, column)]; }

    /// Delay offered at frame slot p; infinite when p is not a meeting slot.
    SlotDelay at_slot(int q, int p) const;
    /// Prefix minimum over rows 1..q at frame slot p.
    SlotDelay effective_at_slot(int q, int p) const;

    int finite_cells() const;

    friend bool operator==(const SFrame&, const SFrame&) = default;

private:
    std::size_t index(int q, int column) const {
        return static_cast<std::size_t>(q - 1) * slots_.size() + static_cast<std::size_t>(column);
    }

    NodeId from_ = kNoHop;
    NodeId to_ = kNoHop;
    int max_hops_ = 0;
    int frame_len_ = 0;
    std::vector<int> slots_;
    std::vector<SlotDelay> cells_;
};

/// Builds the advertisement the owner of `t` sends to `to` at their meeting
/// slots. A destination advertises 0 on row 1 at every meeting slot; a relay
/// fills rows 2..K from its (q-1)-hop paths that start after each meeting and
/// no later than the next one, skipping paths whose next hop is `to`.
SFrame build_sframe(const TFrame& t, const predict::BetaFrame& beta, NodeId to);

/// Merges an advertisement into the receiver's table: a cell takes the
/// offered delay (with the sender as next hop) when empty or strictly worse,
/// or on a tie when the sender id is lower than the stored next hop.
/// Returns the number of cells that changed.
int apply_sframe(TFrame& t, const SFrame& s);

/// Keeps, per column, only entries strictly faster than every lower-cost
/// entry. Returns the number of cells cleared.
int enforce_order(TFrame& t);
int enforce_order(SFrame& s);

bool check_order(const TFrame& t);
bool check_order(const SFrame& s);

struct Deadline {
    double seconds = 0.0;
};

struct ForwardChoice {
    int hops = 0;
    int slot = 0;
    NodeId next_hop = kNoHop;
    /// Wait until the slot plus the stored path delay.
    double delay_seconds = 0.0;

    friend bool operator==(const ForwardChoice&, const ForwardChoice&) = default;
};

/// Per-row best cells for one query instant; answers many deadlines in O(K).
class ForwardPlan {
public:
    ForwardPlan(const TFrame& t, double now, const trace::SlotGrid& grid);

    std::optional<ForwardChoice> select(Deadline deadline) const;
    /// Least total delay over all rows, ignoring any deadline.
    std::optional<ForwardChoice> fastest() const;
    /// Best cell of each row 1..K.
    const std::vector<std::optional<ForwardChoice>>& rows() const { return best_per_row_; }

private:
    std::vector<std::optional<ForwardChoice>> best_per_row_;
};

/// Lowest-cost cell whose total delay from `now` meets the deadline, then
/// lowest delay; nullopt means hold the packet.
std::optional<ForwardChoice> forward(const TFrame& t, double now, const trace::SlotGrid& grid,
                                     Deadline deadline);

/// One line per finite cell: q,p,delay,next_hop.
void dump(std::ostream& out, const TFrame& t);

/// ceil(log2 N) + 1.
int default_max_hops(int node_count);

}  // namespace reaper::routing
