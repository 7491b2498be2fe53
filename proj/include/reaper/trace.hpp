#pragma once

#include "reaper/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reaper::trace {

/// A half-open contact interval [start, end) between two nodes.
struct ContactRecord {
    NodeId node_a = 0;
    NodeId node_b = 0;
    double start = 0.0;
    double end = 0.0;

    NodePair pair() const { return {node_a, node_b}; }

    friend bool operator==(const ContactRecord&, const ContactRecord&) = default;
};

class TraceError : public Error {
public:
    TraceError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    /// 1-based line number of the offending input, 0 when not line-related.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Normalized, time-ordered contact history.
///
/// Records are sorted by (start, pair); node_a < node_b in every record and
/// records of the same pair never overlap.
class ContactTrace {
public:
    ContactTrace() = default;

    /// Normalizes raw records: orders endpoints, merges overlapping or
    /// touching intervals per pair, sorts. Throws on invalid records.
    static ContactTrace from_records(std::vector<ContactRecord> records,
                                     std::size_t* merged_count = nullptr);

    const std::vector<ContactRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    /// Sorted distinct node ids appearing in the trace.
    const std::vector<NodeId>& nodes() const { return nodes_; }

    double begin_time() const;
    double end_time() const;

    /// Records of one pair, in time order.
    std::vector<ContactRecord> pair_records(NodePair pair) const;

    /// All pairs that met at least once.
    std::vector<NodePair> pairs() const;

    /// Records overlapping [from, to).
    std::vector<ContactRecord> window(double from, double to) const;

private:
    std::vector<ContactRecord> records_;
    std::vector<NodeId> nodes_;
    std::map<NodePair, std::vector<std::size_t>> by_pair_;
};

enum class TraceFormat { PairwiseCsv, HaggleEvents };

struct IngestOptions {
    TraceFormat format = TraceFormat::PairwiseCsv;
    std::set<NodeId> excluded;
    /// Reject an empty result.
    bool require_non_empty = true;
};

struct IngestReport {
    std::size_t lines = 0;
    std::size_t raw_records = 0;
    std::size_t dropped = 0;
    std::size_t merged = 0;
};

ContactTrace ingest_trace(std::istream& in, const IngestOptions& options = {},
                          IngestReport* report = nullptr);
ContactTrace ingest_trace_file(const std::string& path, const IngestOptions& options = {},
                               IngestReport* report = nullptr);

/// Writes the pairwise-csv format; read back by ingest_trace unchanged.
void write_pairwise_csv(std::ostream& out, const ContactTrace& trace);

/// Slotted time axis: slots of slot_len seconds, frames of frame_len slots,
/// history_depth frames of history, anchored at epoch.
struct SlotGrid {
    double slot_len = 600.0;
    int frame_len = 144;
    int history_depth = 5;
    double epoch = 0.0;

    double frame_seconds() const { return slot_len * frame_len; }

    /// Throws Error when a field is out of range.
    void validate() const;

    /// Default epoch: trace start rounded down to a slot boundary.
    static double default_epoch(const ContactTrace& trace, double slot_len);
};

/// h x f presence bits for one pair. Frames and slots are 1-based in the
/// accessors to line up with the frame notation used across the toolkit.
struct HistoryMatrix {
    NodePair pair;
    int history_depth = 0;
    int frame_len = 0;
    /// Frames fully covered by the trace; less than history_depth when partial.
    int complete_frames = 0;
    std::vector<unsigned char> bits;

    bool at(int frame, int slot) const {
        return bits[static_cast<std::size_t>((frame - 1) * frame_len + (slot - 1))] != 0;
    }
    bool partial() const { return complete_frames < history_depth; }
};

HistoryMatrix slot_history(const ContactTrace& trace, const SlotGrid& grid, NodePair pair);

/// Per-slot mean of the presence bits over all frames: length frame_len.
std::vector<double> slot_contact_rate(const HistoryMatrix& history);

}  // namespace reaper::trace
