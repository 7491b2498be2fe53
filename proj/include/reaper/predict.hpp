#pragma once

#include "reaper/trace.hpp"
#include "reaper/types.hpp"

#include <optional>
#include <vector>

namespace reaper::predict {

class NoContactError : public Error {
public:
    using Error::Error;
};

/// Per-pair meeting-slot upper bounds over a frame of `frame_len` slots.
///
/// `betas` holds strictly increasing 1-based slots; the l-th meeting of a
/// frame is expected no later than the end of slot betas[l-1].
struct BetaFrame {
    NodePair pair;
    int frame_len = 0;
    double slot_len = 0.0;
    std::vector<int> betas;

    int z() const { return static_cast<int>(betas.size()); }
    bool contains(int slot) const;
    /// Throws Error unless betas are non-empty, strictly increasing, in [1, frame_len].
    void validate() const;

    friend bool operator==(const BetaFrame&, const BetaFrame&) = default;
};

struct BetaOptions {
    /// Slot rates below this value are treated as zero before accumulation.
    /// Zero disables the filter.
    double p_thresh = 0.0;
};

/// Two-pass estimate: the l-th slot is the first where the cumulative rate
/// reaches l; the last slot with a non-zero rate is always the final entry.
BetaFrame build_beta_frame(const std::vector<double>& rates, const trace::SlotGrid& grid,
                           NodePair pair, const BetaOptions& options = {});

/// Convenience: slot_history + slot_contact_rate + build_beta_frame.
/// Returns nullopt when the pair never met inside the history window.
std::optional<BetaFrame> beta_frame_for_pair(const trace::ContactTrace& trace,
                                             const trace::SlotGrid& grid, NodePair pair,
                                             const BetaOptions& options = {});

/// Maps an instant (seconds since grid epoch) to its 1-based frame slot.
/// Exact frame boundaries map to the last slot.
int normalize_instant(double x, const trace::SlotGrid& grid);

/// Upper bound, in seconds, on the wait until the next contact of the pair.
double max_delay_to_next_contact(const BetaFrame& beta, double x);

}  // namespace reaper::predict
