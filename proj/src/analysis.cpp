#include "reaper/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace reaper::analysis {

namespace {

std::map<NodeId, int> index_of(const trace::ContactTrace& trace) {
    std::map<NodeId, int> idx;
    for (std::size_t i = 0; i < trace.nodes().size(); ++i)
        idx[trace.nodes()[i]] = static_cast<int>(i);
    return idx;
}

double resolve_epoch(const trace::ContactTrace& trace, std::optional<double> epoch) {
    return epoch ? *epoch : trace.begin_time();
}

int complete_windows(const trace::ContactTrace& trace, double delta, double epoch) {
    double span = trace.end_time() - epoch;
    return std::max(1, static_cast<int>(std::floor(span / delta + 1e-9)));
}

/// counts(i,j) = number of windows among the first `windows` in which i and j met.
SquareMatrix<int> meeting_counts(const trace::ContactTrace& trace, double delta, double epoch,
                                 int windows, std::vector<BoolMatrix>* per_window) {
    const int n = static_cast<int>(trace.nodes().size());
    auto idx = index_of(trace);
    SquareMatrix<int> counts(n, 0);
    if (per_window) per_window->assign(static_cast<std::size_t>(windows), BoolMatrix(n, 0));
    for (const auto& pair : trace.pairs()) {
        int a = idx.at(pair.first), b = idx.at(pair.second);
        int last_counted = -1;
        for (const auto& r : trace.pair_records(pair)) {
            auto k0 = static_cast<long long>(std::floor((r.start - epoch) / delta));
            auto k1 = static_cast<long long>(std::ceil((r.end - epoch) / delta)) - 1;
            k0 = std::max<long long>(k0, 0);
            k1 = std::min<long long>(k1, windows - 1);
            for (auto k = std::max<long long>(k0, last_counted + 1); k <= k1; ++k) {
                ++counts(a, b);
                ++counts(b, a);
                if (per_window) {
                    (*per_window)[static_cast<std::size_t>(k)](a, b) = 1;
                    (*per_window)[static_cast<std::size_t>(k)](b, a) = 1;
                }
                last_counted = static_cast<int>(k);
            }
        }
    }
    return counts;
}

}  // namespace

WeightMatrix window_adjacency(const trace::ContactTrace& trace, double delta, int k,
                              LinkProbMode mode, std::optional<double> epoch) {
    if (!(delta > 0.0)) throw Error("window length must be > 0");
    if (k < 0) throw Error("window index must be >= 0");
    const double e = resolve_epoch(trace, epoch);
    if (e + k * delta >= trace.end_time()) throw Error("window lies beyond the end of the trace");

    const int n = static_cast<int>(trace.nodes().size());
    WeightMatrix out(n, 0.0);
    if (mode == LinkProbMode::Binary) {
        std::vector<BoolMatrix> windows;
        meeting_counts(trace, delta, e, k + 1, &windows);
        const auto& w = windows[static_cast<std::size_t>(k)];
        for (std::size_t c = 0; c < w.cells.size(); ++c) out.cells[c] = w.cells[c];
    } else {
        auto counts = meeting_counts(trace, delta, e, k + 1, nullptr);
        for (std::size_t c = 0; c < counts.cells.size(); ++c)
            out.cells[c] = static_cast<double>(counts.cells[c]) / (k + 1);
    }
    return out;
}

std::vector<BoolMatrix> window_sequence(const trace::ContactTrace& trace, double delta,
                                        std::optional<double> epoch) {
    if (!(delta > 0.0)) throw Error("window length must be > 0");
    const double e = resolve_epoch(trace, epoch);
    std::vector<BoolMatrix> windows;
    meeting_counts(trace, delta, e, complete_windows(trace, delta, e), &windows);
    return windows;
}

TemporalReachability temporal_reach(const std::vector<BoolMatrix>& windows) {
    TemporalReachability tr;
    const int n = windows.empty() ? 0 : windows.front().n;
    tr.min_hops = SquareMatrix<int>(n, -1);
    tr.reach = BoolMatrix(n, 0);

    int count = 0;
    for (const auto& a : windows) {
        // One hop per window: extend with paths known before this window only.
        auto next = tr.min_hops;
        for (int i = 0; i < n; ++i) {
            for (int v = 0; v < n; ++v) {
                int base = (i == v) ? 0 : tr.min_hops(i, v);
                if (base < 0) continue;
                for (int w = 0; w < n; ++w) {
                    if (w == i || !a(v, w)) continue;
                    int cand = base + 1;
                    if (next(i, w) < 0 || cand < next(i, w)) next(i, w) = cand;
                }
            }
        }
        tr.min_hops = std::move(next);
        int now = 0;
        for (int v : tr.min_hops.cells) now += v >= 0 ? 1 : 0;
        tr.path_counts.push_back(now);
        if (now != count) tr.hop_bound = static_cast<int>(tr.path_counts.size());
        count = now;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            tr.reach(i, j) = tr.min_hops(i, j) >= 0 ? 1 : 0;
            tr.diameter_hops = std::max(tr.diameter_hops, tr.min_hops(i, j));
        }
    return tr;
}

WeightMatrix most_reliable_paths(const std::vector<WeightMatrix>& windows) {
    // Layered shortest path on -log(weight); one relaxation layer per window.
    const int n = windows.empty() ? 0 : windows.front().n;
    constexpr double inf = std::numeric_limits<double>::infinity();
    SquareMatrix<double> cost(n, inf);
    for (const auto& w : windows) {
        auto next = cost;
        for (int i = 0; i < n; ++i) {
            for (int v = 0; v < n; ++v) {
                double base = (i == v) ? 0.0 : cost(i, v);
                if (base == inf) continue;
                for (int t = 0; t < n; ++t) {
                    if (t == i || !(w(v, t) > 0.0)) continue;
                    double cand = base - std::log(w(v, t));
                    if (cand < next(i, t)) next(i, t) = cand;
                }
            }
        }
        cost = std::move(next);
    }
    WeightMatrix best(n, 0.0);
    for (std::size_t c = 0; c < cost.cells.size(); ++c)
        best.cells[c] = cost.cells[c] == inf ? 0.0 : std::exp(-cost.cells[c]);
    return best;
}

WindowMetrics window_metrics(const trace::ContactTrace& trace, double delta, double p_thresh,
                             std::optional<double> epoch) {
    if (!(delta > 0.0)) throw Error("window length must be > 0");
    const double e = resolve_epoch(trace, epoch);
    const int n = static_cast<int>(trace.nodes().size());
    const int nwin = complete_windows(trace, delta, e);

    std::vector<BoolMatrix> windows;
    auto counts = meeting_counts(trace, delta, e, nwin, &windows);

    WindowMetrics m;
    m.delta = delta;
    m.p_thresh = p_thresh;
    m.windows = nwin;

    WeightMatrix prob(n, 0.0);
    BoolMatrix keep(n, 0);
    double link_sum = 0.0;
    int links = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = static_cast<double>(counts(i, j)) / nwin;
            if (p > 0.0 && p >= p_thresh) {
                prob(i, j) = prob(j, i) = p;
                keep(i, j) = keep(j, i) = 1;
                link_sum += p;
                ++links;
            }
        }
    const double unordered = n > 1 ? n * (n - 1) / 2.0 : 1.0;
    m.avg_link_prob = links ? link_sum / links : 0.0;
    m.connected_link_fraction = links / unordered;

    std::vector<WeightMatrix> repeated(static_cast<std::size_t>(std::max(1, n - 1)), prob);
    auto best = most_reliable_paths(repeated);
    double path_sum = 0.0;
    int paths = 0;
    for (double v : best.cells)
        if (v > 0.0) {
            path_sum += v;
            ++paths;
        }
    m.avg_path_prob = paths ? path_sum / paths : 0.0;

    for (auto& w : windows)
        for (std::size_t c = 0; c < w.cells.size(); ++c) w.cells[c] &= keep.cells[c];
    auto tr = temporal_reach(windows);
    m.diameter_hops = tr.diameter_hops;
    int reachable = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && tr.reach(i, j)) ++reachable;
    m.reachable_pair_fraction = n > 1 ? reachable / (2.0 * unordered) : 0.0;
    return m;
}

FrameChoice characteristic_frame(const trace::ContactTrace& trace, std::vector<double> delta_sweep,
                                 const FrameCriteria& criteria) {
    if (delta_sweep.empty()) throw Error("characteristic_frame: empty window sweep");
    std::sort(delta_sweep.begin(), delta_sweep.end());
    FrameChoice choice;
    double most_reachable = 0.0;
    for (double d : delta_sweep) {
        choice.table.push_back(window_metrics(trace, d));
        most_reachable = std::max(most_reachable, choice.table.back().reachable_pair_fraction);
    }
    for (const auto& m : choice.table) {
        if (m.avg_path_prob + 1e-12 >= criteria.min_path_prob &&
            m.reachable_pair_fraction + 1e-12 >= criteria.min_component * most_reachable) {
            choice.frame_len = m.delta;
            break;
        }
    }
    return choice;
}

std::vector<WindowMetrics> threshold_study(const trace::ContactTrace& trace, double frame_len,
                                           const std::vector<double>& thresholds) {
    std::vector<WindowMetrics> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) out.push_back(window_metrics(trace, frame_len, t));
    return out;
}

double parse_duration(const std::string& text) {
    if (text.empty()) throw Error("empty duration");
    double scale = 1.0;
    std::string num = text;
    switch (text.back()) {
        case 's': num.pop_back(); break;
        case 'm': scale = 60.0; num.pop_back(); break;
        case 'h': scale = 3600.0; num.pop_back(); break;
        case 'd': scale = 86400.0; num.pop_back(); break;
        default: break;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(num, &used);
    } catch (const std::exception&) {
        throw Error("bad duration '" + text + "'");
    }
    if (used != num.size() || !(v > 0.0)) throw Error("bad duration '" + text + "'");
    return v * scale;
}

std::vector<double> parse_delta_sweep(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3) throw Error("bad sweep '" + spec + "'");
        double lo = parse_duration(parts[0]), hi = parse_duration(parts[1]);
        if (hi < lo) throw Error("bad sweep '" + spec + "': upper bound below lower bound");
        if (parts.size() == 3) {
            double step = parse_duration(parts[2]);
            for (double d = lo; d <= hi * (1 + 1e-12); d += step) out.push_back(d);
        } else {
            for (double d = lo; d <= hi * (1 + 1e-12); d *= 2) out.push_back(d);
            if (out.back() < hi) out.push_back(hi);
        }
    } else {
        std::stringstream ss(spec);
        std::string p;
        while (std::getline(ss, p, ',')) out.push_back(parse_duration(p));
    }
    if (out.empty()) throw Error("empty sweep");
    return out;
}

}  // namespace reaper::analysis
