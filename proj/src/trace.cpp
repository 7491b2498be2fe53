#include "reaper/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace reaper::trace {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

NodeId parse_node(const std::string& tok, std::size_t line) {
    NodeId v = 0;
    auto t = trim(tok);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw TraceError("bad node id '" + t + "'", line);
    return v;
}

double parse_time(const std::string& tok, std::size_t line) {
    auto t = trim(tok);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw TraceError("bad time value '" + t + "'", line);
    return v;
}

std::string format_time(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void check_record(const ContactRecord& r, std::size_t line) {
    if (r.node_a == r.node_b) throw TraceError("self contact", line);
    if (!(r.start < r.end)) throw TraceError("contact must satisfy start < end", line);
}

std::vector<ContactRecord> read_pairwise(std::istream& in, IngestReport& rep) {
    std::vector<ContactRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        ++rep.lines;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ss(t);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 4) throw TraceError("expected 4 columns a,b,start,end", rep.lines);
        ContactRecord r{parse_node(cols[0], rep.lines), parse_node(cols[1], rep.lines),
                        parse_time(cols[2], rep.lines), parse_time(cols[3], rep.lines)};
        check_record(r, rep.lines);
        out.push_back(r);
    }
    return out;
}

std::vector<ContactRecord> read_haggle(std::istream& in, IngestReport& rep) {
    std::vector<ContactRecord> out;
    std::map<NodePair, double> open;
    double last_time = 0.0;
    std::string line;
    while (std::getline(in, line)) {
        ++rep.lines;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::stringstream ss(t);
        std::string time_tok, kind, a_tok, b_tok, extra;
        if (!(ss >> time_tok >> kind >> a_tok >> b_tok) || (ss >> extra))
            throw TraceError("expected 'time up|down a b'", rep.lines);
        double time = parse_time(time_tok, rep.lines);
        NodeId a = parse_node(a_tok, rep.lines);
        NodeId b = parse_node(b_tok, rep.lines);
        if (a == b) throw TraceError("self contact", rep.lines);
        last_time = std::max(last_time, time);
        NodePair p{a, b};
        if (kind == "up") {
            open.emplace(p, time);  // a repeated up keeps the earlier opening
        } else if (kind == "down") {
            auto it = open.find(p);
            if (it == open.end()) {
                ++rep.dropped;
                continue;
            }
            if (time > it->second) out.push_back({p.first, p.second, it->second, time});
            else ++rep.dropped;
            open.erase(it);
        } else {
            throw TraceError("unknown event kind '" + kind + "'", rep.lines);
        }
    }
    for (const auto& [p, start] : open) {
        if (last_time > start) out.push_back({p.first, p.second, start, last_time});
        else ++rep.dropped;
    }
    return out;
}

}  // namespace

ContactTrace ContactTrace::from_records(std::vector<ContactRecord> records,
                                        std::size_t* merged_count) {
    for (auto& r : records) {
        check_record(r, 0);
        if (r.node_a > r.node_b) std::swap(r.node_a, r.node_b);
    }
    std::sort(records.begin(), records.end(), [](const auto& x, const auto& y) {
        if (x.pair() != y.pair()) return x.pair() < y.pair();
        return x.start < y.start;
    });
    std::vector<ContactRecord> merged;
    std::size_t merges = 0;
    for (const auto& r : records) {
        if (!merged.empty() && merged.back().pair() == r.pair() && r.start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, r.end);
            ++merges;
        } else {
            merged.push_back(r);
        }
    }
    std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) {
        if (x.start != y.start) return x.start < y.start;
        return x.pair() < y.pair();
    });

    ContactTrace t;
    t.records_ = std::move(merged);
    std::set<NodeId> nodes;
    for (std::size_t i = 0; i < t.records_.size(); ++i) {
        const auto& r = t.records_[i];
        nodes.insert(r.node_a);
        nodes.insert(r.node_b);
        t.by_pair_[r.pair()].push_back(i);
    }
    t.nodes_.assign(nodes.begin(), nodes.end());
    if (merged_count) *merged_count = merges;
    return t;
}

double ContactTrace::begin_time() const {
    return records_.empty() ? 0.0 : records_.front().start;
}

double ContactTrace::end_time() const {
    double e = 0.0;
    for (const auto& r : records_) e = std::max(e, r.end);
    return e;
}

std::vector<ContactRecord> ContactTrace::pair_records(NodePair pair) const {
    std::vector<ContactRecord> out;
    auto it = by_pair_.find(pair);
    if (it == by_pair_.end()) return out;
    out.reserve(it->second.size());
    for (auto idx : it->second) out.push_back(records_[idx]);
    return out;
}

std::vector<NodePair> ContactTrace::pairs() const {
    std::vector<NodePair> out;
    out.reserve(by_pair_.size());
    for (const auto& [p, _] : by_pair_) out.push_back(p);
    return out;
}

std::vector<ContactRecord> ContactTrace::window(double from, double to) const {
    std::vector<ContactRecord> out;
    for (const auto& r : records_) {
        if (r.start >= to) break;
        if (r.end > from) out.push_back(r);
    }
    return out;
}

ContactTrace ingest_trace(std::istream& in, const IngestOptions& options, IngestReport* report) {
    IngestReport rep;
    auto raw = options.format == TraceFormat::PairwiseCsv ? read_pairwise(in, rep)
                                                          : read_haggle(in, rep);
    rep.raw_records = raw.size() + rep.dropped;
    std::vector<ContactRecord> kept;
    kept.reserve(raw.size());
    for (const auto& r : raw) {
        if (options.excluded.count(r.node_a) || options.excluded.count(r.node_b)) {
            ++rep.dropped;
            continue;
        }
        kept.push_back(r);
    }
    auto trace = ContactTrace::from_records(std::move(kept), &rep.merged);
    if (report) *report = rep;
    if (options.require_non_empty && trace.empty()) throw TraceError("empty trace");
    return trace;
}

ContactTrace ingest_trace_file(const std::string& path, const IngestOptions& options,
                               IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file '" + path + "'");
    return ingest_trace(in, options, report);
}

void write_pairwise_csv(std::ostream& out, const ContactTrace& trace) {
    out << "# a,b,start,end\n";
    for (const auto& r : trace.records())
        out << r.node_a << ',' << r.node_b << ',' << format_time(r.start) << ','
            << format_time(r.end) << '\n';
}

void SlotGrid::validate() const {
    if (!(slot_len > 0.0) || !std::isfinite(slot_len)) throw Error("slot length must be > 0");
    if (frame_len < 1) throw Error("frame length must be >= 1 slot");
    if (history_depth < 1) throw Error("history depth must be >= 1 frame");
}

double SlotGrid::default_epoch(const ContactTrace& trace, double slot_len) {
    return std::floor(trace.begin_time() / slot_len) * slot_len;
}

HistoryMatrix slot_history(const ContactTrace& trace, const SlotGrid& grid, NodePair pair) {
    grid.validate();
    HistoryMatrix h;
    h.pair = pair;
    h.history_depth = grid.history_depth;
    h.frame_len = grid.frame_len;
    h.bits.assign(static_cast<std::size_t>(grid.history_depth) * grid.frame_len, 0);

    const double span_end = grid.epoch + grid.history_depth * grid.frame_seconds();
    const double covered = trace.end_time();
    h.complete_frames = 0;
    for (int k = 1; k <= grid.history_depth; ++k)
        if (grid.epoch + k * grid.frame_seconds() <= covered) h.complete_frames = k;

    const auto total_slots = static_cast<long long>(grid.history_depth) * grid.frame_len;
    for (const auto& r : trace.pair_records(pair)) {
        if (r.end <= grid.epoch || r.start >= span_end) continue;
        // Slot index i covers [epoch + i*s, epoch + (i+1)*s); a contact hits
        // every slot with start < slot_end and end > slot_start.
        auto first = static_cast<long long>(std::floor((r.start - grid.epoch) / grid.slot_len));
        auto last = static_cast<long long>(std::ceil((r.end - grid.epoch) / grid.slot_len)) - 1;
        first = std::max(first, 0LL);
        last = std::min(last, total_slots - 1);
        for (auto i = first; i <= last; ++i) h.bits[static_cast<std::size_t>(i)] = 1;
    }
    return h;
}

std::vector<double> slot_contact_rate(const HistoryMatrix& history) {
    std::vector<double> rate(static_cast<std::size_t>(history.frame_len), 0.0);
    if (history.history_depth < 1) return rate;
    for (int k = 1; k <= history.history_depth; ++k)
        for (int r = 1; r <= history.frame_len; ++r)
            if (history.at(k, r)) rate[static_cast<std::size_t>(r - 1)] += 1.0;
    for (auto& v : rate) v /= history.history_depth;
    return rate;
}

}  // namespace reaper::trace
