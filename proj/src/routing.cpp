#include "reaper/routing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

namespace reaper::routing {

namespace {

SlotDelay add_delay(SlotDelay base, long long extra) {
    long long sum = static_cast<long long>(base) + extra;
    return sum >= kInfiniteDelay ? kInfiniteDelay : static_cast<SlotDelay>(sum);
}

}  // namespace

TFrame::TFrame(NodeId owner, int max_hops, int frame_len, bool destination)
    : owner_(owner), destination_(destination), max_hops_(max_hops), frame_len_(frame_len) {
    if (max_hops < 1) throw Error("t-frame needs at least one hop row");
    if (frame_len < 1) throw Error("t-frame needs at least one slot");
    cells_.assign(static_cast<std::size_t>(max_hops + 1) * frame_len, PathEntry{});
    if (destination_) at(0, 1) = {0, owner_};
}

TFrame TFrame::for_destination(NodeId owner, int max_hops, int frame_len) {
    return TFrame(owner, max_hops, frame_len, true);
}

void TFrame::reset() {
    std::fill(cells_.begin(), cells_.end(), PathEntry{});
    if (destination_) at(0, 1) = {0, owner_};
}

int TFrame::reset_next_hop(NodeId hop) {
    int cleared = 0;
    for (auto& c : cells_)
        if (c.next_hop == hop && !(destination_ && &c == &at(0, 1))) {
            c.reset();
            ++cleared;
        }
    return cleared;
}

int TFrame::finite_cells() const {
    return static_cast<int>(std::count_if(cells_.begin(), cells_.end(),
                                          [](const PathEntry& c) { return c.finite(); }));
}

SlotDelay TFrame::effective_delay(int q, int p) const {
    SlotDelay best = kInfiniteDelay;
    for (int r = 1; r <= q; ++r) best = std::min(best, at(r, p).delay);
    return best;
}

SFrame::SFrame(NodeId from, NodeId to, int max_hops, int frame_len, std::vector<int> meeting_slots)
    : from_(from), to_(to), max_hops_(max_hops), frame_len_(frame_len),
      slots_(std::move(meeting_slots)) {
    cells_.assign(static_cast<std::size_t>(max_hops) * slots_.size(), kInfiniteDelay);
}

SlotDelay SFrame::at_slot(int q, int p) const {
    auto it = std::lower_bound(slots_.begin(), slots_.end(), p);
    if (it == slots_.end() || *it != p) return kInfiniteDelay;
    return at(q, static_cast<int>(it - slots_.begin()));
}

SlotDelay SFrame::effective_at_slot(int q, int p) const {
    auto it = std::lower_bound(slots_.begin(), slots_.end(), p);
    if (it == slots_.end() || *it != p) return kInfiniteDelay;
    const int col = static_cast<int>(it - slots_.begin());
    SlotDelay best = kInfiniteDelay;
    for (int r = 1; r <= q; ++r) best = std::min(best, at(r, col));
    return best;
}

int SFrame::finite_cells() const {
    return static_cast<int>(
        std::count_if(cells_.begin(), cells_.end(), [](SlotDelay d) { return d != kInfiniteDelay; }));
}

SFrame build_sframe(const TFrame& t, const predict::BetaFrame& beta, NodeId to) {
    beta.validate();
    if (beta.frame_len != t.frame_len())
        throw Error("build_sframe: beta frame length differs from t-frame length");
    const int K = t.max_hops();
    const int F = t.frame_len();
    const auto& betas = beta.betas;
    const int z = beta.z();
    SFrame s(t.owner(), to, K, F, betas);

    if (t.destination()) {
        for (int m = 0; m < z; ++m) s.at(1, m) = 0;
        return s;
    }

    auto candidate = [&](int q, int r, long long wait, SlotDelay& best) {
        const auto& cell = t.at(q - 1, r);
        if (!cell.finite() || cell.next_hop == to) return;
        best = std::min(best, add_delay(cell.delay, wait));
    };

    for (int q = 2; q <= K; ++q) {
        for (int m = 0; m < z; ++m) {
            const int bm = betas[static_cast<std::size_t>(m)];
            SlotDelay best = kInfiniteDelay;
            if (m + 1 < z) {
                const int next = betas[static_cast<std::size_t>(m + 1)];
                for (int r = bm + 1; r <= next; ++r) candidate(q, r, r - bm, best);
            } else {
                for (int r = bm + 1; r <= F; ++r) candidate(q, r, r - bm, best);
                for (int r = 1; r <= betas.front(); ++r) candidate(q, r, r + (F - bm), best);
            }
            s.at(q, m) = best;
        }
    }
    enforce_order(s);
    return s;
}

int apply_sframe(TFrame& t, const SFrame& s) {
    if (s.frame_len() != t.frame_len() || s.max_hops() != t.max_hops())
        throw Error("apply_sframe: s-frame shape differs from t-frame");
    int changed = 0;
    for (int q = 1; q <= t.max_hops(); ++q) {
        for (int m = 0; m < s.columns(); ++m) {
            const SlotDelay offered = s.at(q, m);
            if (offered == kInfiniteDelay) continue;
            auto& cell = t.at(q, s.meeting_slots()[static_cast<std::size_t>(m)]);
            const bool better = !cell.finite() || offered < cell.delay ||
                                (offered == cell.delay && s.from() < cell.next_hop);
            if (better && !(cell.delay == offered && cell.next_hop == s.from())) {
                cell = {offered, s.from()};
                ++changed;
            }
        }
    }
    changed += enforce_order(t);
    return changed;
}

int enforce_order(TFrame& t) {
    int cleared = 0;
    for (int p = 1; p <= t.frame_len(); ++p) {
        SlotDelay floor = kInfiniteDelay;
        for (int q = 1; q <= t.max_hops(); ++q) {
            auto& cell = t.at(q, p);
            if (!cell.finite()) continue;
            if (cell.delay < floor) {
                floor = cell.delay;
            } else {
                cell.reset();
                ++cleared;
            }
        }
    }
    return cleared;
}

int enforce_order(SFrame& s) {
    int cleared = 0;
    for (int m = 0; m < s.columns(); ++m) {
        SlotDelay floor = kInfiniteDelay;
        for (int q = 1; q <= s.max_hops(); ++q) {
            SlotDelay& d = s.at(q, m);
            if (d == kInfiniteDelay) continue;
            if (d < floor) {
                floor = d;
            } else {
                d = kInfiniteDelay;
                ++cleared;
            }
        }
    }
    return cleared;
}

bool check_order(const TFrame& t) {
    for (int p = 1; p <= t.frame_len(); ++p) {
        SlotDelay floor = kInfiniteDelay;
        for (int q = 1; q <= t.max_hops(); ++q) {
            const auto& cell = t.at(q, p);
            if (!cell.finite()) continue;
            if (cell.delay >= floor) return false;
            floor = cell.delay;
        }
    }
    return true;
}

bool check_order(const SFrame& s) {
    for (int m = 0; m < s.columns(); ++m) {
        SlotDelay floor = kInfiniteDelay;
        for (int q = 1; q <= s.max_hops(); ++q) {
            SlotDelay d = s.at(q, m);
            if (d == kInfiniteDelay) continue;
            if (d >= floor) return false;
            floor = d;
        }
    }
    return true;
}

ForwardPlan::ForwardPlan(const TFrame& t, double now, const trace::SlotGrid& grid) {
    if (grid.frame_len != t.frame_len())
        throw Error("forward: grid frame length differs from t-frame length");
    const int F = t.frame_len();
    const int x = predict::normalize_instant(now, grid);
    best_per_row_.assign(static_cast<std::size_t>(t.max_hops()), std::nullopt);
    for (int q = 1; q <= t.max_hops(); ++q) {
        std::tuple<long long, int, NodeId> best_key{0, 0, 0};
        std::optional<ForwardChoice> best;
        for (int p = 1; p <= F; ++p) {
            const auto& cell = t.at(q, p);
            if (!cell.finite()) continue;
            const int wait = ((p - x) % F + F) % F;
            const long long total = static_cast<long long>(wait) + cell.delay;
            std::tuple<long long, int, NodeId> key{total, wait, cell.next_hop};
            if (!best || key < best_key) {
                best_key = key;
                best = ForwardChoice{q, p, cell.next_hop, static_cast<double>(total) * grid.slot_len};
            }
        }
        best_per_row_[static_cast<std::size_t>(q - 1)] = best;
    }
}

std::optional<ForwardChoice> ForwardPlan::select(Deadline deadline) const {
    for (const auto& row : best_per_row_)
        if (row && row->delay_seconds <= deadline.seconds) return row;
    return std::nullopt;
}

std::optional<ForwardChoice> ForwardPlan::fastest() const {
    std::optional<ForwardChoice> best;
    for (const auto& row : best_per_row_)
        if (row && (!best || row->delay_seconds < best->delay_seconds)) best = row;
    return best;
}

std::optional<ForwardChoice> forward(const TFrame& t, double now, const trace::SlotGrid& grid,
                                     Deadline deadline) {
    return ForwardPlan(t, now, grid).select(deadline);
}

void dump(std::ostream& out, const TFrame& t) {
    for (int q = 0; q <= t.max_hops(); ++q)
        for (int p = 1; p <= t.frame_len(); ++p) {
            const auto& c = t.at(q, p);
            if (c.finite()) out << q << ',' << p << ',' << c.delay << ',' << c.next_hop << '\n';
        }
}

int default_max_hops(int node_count) {
    if (node_count <= 1) return 1;
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(node_count)))) + 1;
}

}  // namespace reaper::routing
