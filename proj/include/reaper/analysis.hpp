#pragma once

#include "reaper/trace.hpp"

#include <optional>
#include <vector>

namespace reaper::analysis {

/// Dense n x n matrix indexed by node position in ContactTrace::nodes().
template <typename T>
struct SquareMatrix {
    int n = 0;
    std::vector<T> cells;

    SquareMatrix() = default;
    explicit SquareMatrix(int size, T fill = T{})
        : n(size), cells(static_cast<std::size_t>(size) * size, fill) {}

    T& operator()(int i, int j) { return cells[static_cast<std::size_t>(i * n + j)]; }
    const T& operator()(int i, int j) const { return cells[static_cast<std::size_t>(i * n + j)]; }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;
};

using BoolMatrix = SquareMatrix<unsigned char>;
using WeightMatrix = SquareMatrix<double>;

enum class LinkProbMode { Binary, Empirical };

/// Window k (0-based) covers [epoch + k*delta, epoch + (k+1)*delta).
/// Binary: 1 where the pair had a contact in the window. Empirical: fraction
/// of windows 0..k in which the pair met. Throws when the window starts at or
/// after the end of the trace.
WeightMatrix window_adjacency(const trace::ContactTrace& trace, double delta, int k,
                              LinkProbMode mode, std::optional<double> epoch = std::nullopt);

/// Binary adjacency of every complete window of length delta.
std::vector<BoolMatrix> window_sequence(const trace::ContactTrace& trace, double delta,
                                        std::optional<double> epoch = std::nullopt);

struct TemporalReachability {
    /// reach(i, j): a path from i to j exists taking at most one hop per
    /// window, hops in window order.
    BoolMatrix reach;
    /// Minimum hop count of such a path, -1 when unreachable.
    SquareMatrix<int> min_hops;
    /// Reachable ordered-pair count after consuming windows 1..n.
    std::vector<int> path_counts;
    /// Windows consumed until the reachable-pair count stopped changing.
    int hop_bound = 0;
    /// Longest minimum hop count over reachable pairs.
    int diameter_hops = 0;
};

TemporalReachability temporal_reach(const std::vector<BoolMatrix>& windows);

/// Best multiplicative path probability per ordered pair, over paths taking
/// at most one hop per window in window order. Diagonal is 0.
WeightMatrix most_reliable_paths(const std::vector<WeightMatrix>& windows);

struct WindowMetrics {
    double delta = 0.0;
    double p_thresh = 0.0;
    int windows = 0;
    /// Mean per-window meeting probability over linked pairs.
    double avg_link_prob = 0.0;
    /// Linked unordered pairs over all unordered pairs.
    double connected_link_fraction = 0.0;
    /// Mean best-path probability over ordered pairs with any path.
    double avg_path_prob = 0.0;
    int diameter_hops = 0;
    /// Ordered pairs connected by a time-respecting window path.
    double reachable_pair_fraction = 0.0;
};

WindowMetrics window_metrics(const trace::ContactTrace& trace, double delta,
                             double p_thresh = 0.0, std::optional<double> epoch = std::nullopt);

struct FrameChoice {
    std::optional<double> frame_len;
    std::vector<WindowMetrics> table;
};

struct FrameCriteria {
    double min_path_prob = 0.60;
    double min_component = 0.90;
};

/// Smallest window whose path reliability reaches min_path_prob while the
/// reachable pairs stay above min_component of the best seen in the sweep.
FrameChoice characteristic_frame(const trace::ContactTrace& trace, std::vector<double> delta_sweep,
                                 const FrameCriteria& criteria = {});

std::vector<WindowMetrics> threshold_study(const trace::ContactTrace& trace, double frame_len,
                                           const std::vector<double>& thresholds);

/// Parses "1h:7d" style ranges (doubling steps) or comma lists with s/m/h/d suffixes.
std::vector<double> parse_delta_sweep(const std::string& spec);
double parse_duration(const std::string& text);

}  // namespace reaper::analysis
