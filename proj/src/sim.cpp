#include "reaper/sim.hpp"

#include "reaper/baselines.hpp"
#include "reaper/predict.hpp"
#include "reaper/protocol.hpp"
#include "reaper/routing.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <thread>
#include <tuple>

namespace reaper::sim {

bool operator<(const SimEvent& x, const SimEvent& y) {
    return std::tie(x.time, x.kind, x.a, x.b) < std::tie(y.time, y.kind, y.a, y.b);
}

ProtocolSpec ProtocolSpec::reaper(double deadline_hours) {
    return {ProtocolKind::Reaper, deadline_hours * 3600.0};
}
ProtocolSpec ProtocolSpec::prophet() { return {ProtocolKind::Prophet, 0}; }
ProtocolSpec ProtocolSpec::meed() { return {ProtocolKind::Meed, 0}; }

ProtocolSpec ProtocolSpec::parse(const std::string& name) {
    std::string up;
    for (char c : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "PROPHET") return prophet();
    if (up == "MEED-DVR" || up == "MEED") return meed();
    if (up.rfind("REAPER_", 0) == 0) {
        try {
            std::size_t used = 0;
            const double h = std::stod(up.substr(7), &used);
            if (used == up.size() - 7 && h > 0) return reaper(h);
        } catch (const std::exception&) {
        }
    }
    throw Error("unknown protocol '" + name + "' (REAPER_<hours>, PROPHET, MEED-DVR)");
}

std::string ProtocolSpec::name() const {
    switch (kind) {
        case ProtocolKind::Prophet: return "PROPHET";
        case ProtocolKind::Meed: return "MEED-DVR";
        case ProtocolKind::Reaper: break;
    }
    std::ostringstream os;
    os << "REAPER_" << deadline_seconds / 3600.0;
    return os.str();
}

namespace {

// Consecutive packets of one source that travelled together.
struct Batch {
    NodeId source = kNoHop;
    std::uint32_t seq = 0;
    std::uint32_t count = 0;
    double t0 = 0;
    double dt = 0;
    double life = 0;
    int hops = 0;
    std::vector<NodeId> path;

    double created(std::uint32_t i) const { return t0 + i * dt; }
    double expiry(std::uint32_t i) const { return created(i) + life; }

    Batch slice(std::uint32_t lo, std::uint32_t hi) const {
        Batch b = *this;
        b.seq = seq + lo;
        b.count = hi - lo;
        b.t0 = created(lo);
        return b;
    }
};

bool batch_order(const Batch& x, const Batch& y) {
    return std::tuple(x.expiry(0), x.source, x.seq) < std::tuple(y.expiry(0), y.source, y.seq);
}

// First index whose expiry is >= threshold (strict: > threshold).
std::uint32_t first_index(const Batch& b, double threshold, bool strict) {
    std::uint32_t lo = 0, hi = b.count;
    while (lo < hi) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        const double e = b.expiry(mid);
        if (strict ? e > threshold : e >= threshold)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

struct Span {
    std::size_t batch;
    std::uint32_t begin, end;
};

struct ContactState {
    double start = 0;
    double end = 0;
    double used_bytes = 0;
    // Tables at the last REAPER exchange on this contact.
    routing::TFrame seen_a, seen_b;
};

}  // namespace

struct Simulator::Impl {
    const trace::ContactTrace& trace;
    SimConfig cfg;
    ProtocolSpec proto;
    Workload wl;
    std::ostream* log = nullptr;
    Observer observer;

    std::vector<NodeId> ids;
    std::map<NodeId, std::size_t> index;
    std::vector<std::vector<Batch>> buf;
    std::vector<NodeId> sources;
    std::vector<std::uint32_t> next_seq;
    double interval = 0;
    double life = 0;
    double end = 0;
    std::size_t dest = 0;

    std::vector<protocol::NodeProcess> procs;
    std::vector<baselines::ProphetState> prophet;
    std::vector<baselines::MeedState> meed;

    std::map<NodePair, std::deque<double>> pending_ends;
    std::map<NodePair, ContactState> active;
    // Bytes each radio moved in the slot ending at radio_window.
    std::vector<double> radio_used, radio_window;

    MetricsReport m;
    double delay_sum = 0;
    long long hops_sum = 0;

    Impl(const trace::ContactTrace& t, SimConfig c, ProtocolSpec p, Workload w)
        : trace(t), cfg(std::move(c)), proto(p), wl(w) {
        cfg.grid.validate();
        if (wl.packet_size <= 0) throw Error("packet size must be positive");
        if (wl.rate_bps < 0 || wl.duration < 0) throw Error("workload rate and duration must be non-negative");
        if (!(cfg.link_rate_bps > 0)) throw Error("link rate must be positive");
        ids = t.nodes();
        if (!std::binary_search(ids.begin(), ids.end(), cfg.destination)) {
            ids.push_back(cfg.destination);
            std::sort(ids.begin(), ids.end());
        }
        for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
        dest = index.at(cfg.destination);
        buf.resize(ids.size());
        for (NodeId n : ids)
            if (n != cfg.destination) sources.push_back(n);
        next_seq.assign(ids.size(), 0);
        radio_used.assign(ids.size(), 0);
        radio_window.assign(ids.size(), -1);
        interval = wl.rate_bps > 0 ? wl.packet_size * 8.0 / wl.rate_bps : 0;
        life = proto.kind == ProtocolKind::Reaper ? proto.deadline_seconds : cfg.baseline_deadline;
        end = cfg.end_time > 0 ? cfg.end_time : std::max(t.empty() ? 0.0 : t.end_time(), wl.start + wl.duration);

        protocol::ProtocolConfig pc;
        pc.destination = cfg.destination;
        pc.nodes = ids;
        pc.max_hops = cfg.max_hops > 0 ? cfg.max_hops : routing::default_max_hops(static_cast<int>(ids.size()));
        pc.frame_len = cfg.grid.frame_len;
        baselines::ProphetParams pp;
        pp.time_unit = cfg.grid.slot_len;
        for (NodeId n : ids) {
            switch (proto.kind) {
                case ProtocolKind::Reaper: procs.emplace_back(n, pc); break;
                case ProtocolKind::Prophet: prophet.emplace_back(n, pp); break;
                case ProtocolKind::Meed: meed.emplace_back(n, t.empty() ? 0.0 : t.begin_time()); break;
            }
        }
        m.protocol = proto.name();
        m.offered_rate_bps = wl.rate_bps;
    }

    // --- packet bookkeeping -------------------------------------------------

    void log_piece(const Batch& b, const char* fate, double t, int hops) {
        if (!log) return;
        std::string path;
        for (NodeId n : b.path) path += (path.empty() ? "" : "-") + std::to_string(n);
        for (std::uint32_t i = 0; i < b.count; ++i)
            *log << b.source << ',' << b.seq + i << ',' << b.created(i) << ',' << fate << ',' << t << ','
                 << hops << ',' << path << '\n';
    }

    void insert(std::vector<Batch>& into, Batch piece) {
        for (auto& b : into) {
            const bool same = b.source == piece.source && b.hops == piece.hops && b.path == piece.path &&
                              b.dt == piece.dt && b.life == piece.life;
            if (!same) continue;
            if (b.seq + b.count == piece.seq) {
                b.count += piece.count;
                return;
            }
            if (piece.seq + piece.count == b.seq) {
                piece.count += b.count;
                b = std::move(piece);
                std::sort(into.begin(), into.end(), batch_order);
                return;
            }
        }
        into.insert(std::upper_bound(into.begin(), into.end(), piece, batch_order), std::move(piece));
    }

    void drop_expired(double t) {
        for (auto& node : buf) {
            bool emptied = false;
            for (auto& b : node) {
                if (b.expiry(0) > t) break;
                const std::uint32_t n = first_index(b, t, true);
                log_piece(b.slice(0, n), "dropped_deadline", t, b.hops);
                m.dropped_deadline += n;
                b = b.slice(n, b.count);
                emptied = emptied || b.count == 0;
            }
            if (emptied) std::erase_if(node, [](const Batch& b) { return b.count == 0; });
            std::sort(node.begin(), node.end(), batch_order);
        }
    }

    void generate(NodeId src, double t) {
        const std::size_t i = index.at(src);
        const std::uint32_t seq = next_seq[i]++;
        ++m.generated;
        auto& node = buf[i];
        for (auto it = node.rbegin(); it != node.rend(); ++it)
            if (it->source == src && it->hops == 0 && it->seq + it->count == seq) {
                ++it->count;
                return;
            }
        Batch b;
        b.source = src;
        b.seq = seq;
        b.count = 1;
        b.t0 = t;
        b.dt = interval;
        b.life = life;
        b.path = {src};
        insert(node, std::move(b));
    }

    void arrive(Batch piece, std::size_t to, double t) {
        const NodeId id = ids[to];
        m.transmissions += piece.count;
        ++piece.hops;
        if (std::find(piece.path.begin(), piece.path.end(), id) != piece.path.end()) m.cycle_revisits += piece.count;
        piece.path.push_back(id);
        if (to == dest) {
            const double n = piece.count;
            m.delivered += piece.count;
            delay_sum += n * t - (n * piece.t0 + piece.dt * n * (n - 1) / 2);
            hops_sum += static_cast<long long>(piece.hops) * piece.count;
            log_piece(piece, "delivered", t, piece.hops);
            return;
        }
        insert(buf[to], std::move(piece));
    }

    // Moves up to n packets of the spans, oldest batch first.
    void move(std::size_t from, std::size_t to, const std::vector<Span>& spans, long long n, double t) {
        if (n <= 0 || spans.empty()) return;
        auto& src = buf[from];
        std::vector<Batch> keep, moved;
        std::size_t s = 0;
        for (std::size_t bi = 0; bi < src.size(); ++bi) {
            const Batch& b = src[bi];
            std::uint32_t cursor = 0;
            for (; s < spans.size() && spans[s].batch == bi; ++s) {
                const auto take = static_cast<std::uint32_t>(
                    std::min<long long>(spans[s].end - spans[s].begin, n));
                if (take == 0) continue;
                if (spans[s].begin > cursor) keep.push_back(b.slice(cursor, spans[s].begin));
                moved.push_back(b.slice(spans[s].begin, spans[s].begin + take));
                n -= take;
                cursor = spans[s].begin + take;
            }
            if (cursor < b.count) keep.push_back(b.slice(cursor, b.count));
        }
        src = std::move(keep);
        std::sort(src.begin(), src.end(), batch_order);
        for (auto& piece : moved) arrive(std::move(piece), to, t);
    }

    // --- protocol hooks -----------------------------------------------------

    std::vector<Span> all_of(std::size_t from) const {
        std::vector<Span> out;
        for (std::size_t i = 0; i < buf[from].size(); ++i) out.push_back({i, 0, buf[from][i].count});
        return out;
    }

    // Whether slot x lies in the beta interval that ends at meeting slot p:
    // after the previous meeting slot of the pair, up to p, wrapping.
    static bool in_meeting_window(const protocol::NodeProcess& n, NodeId peer, int p, int x) {
        const auto* beta = n.beta(peer);
        if (!beta) return false;
        const int f = beta->frame_len;
        const auto& b = beta->betas;
        auto it = std::find(b.begin(), b.end(), p);
        if (it == b.end()) return false;
        const int prev = it == b.begin() ? b.back() : *(it - 1);
        const int span = prev == p ? f : ((p - prev) % f + f) % f;
        const int ahead = ((p - x) % f + f) % f;
        return ahead < span;
    }

    std::vector<Span> eligible(std::size_t from, std::size_t to, double t) const {
        if (from == dest || buf[from].empty()) return {};
        if (to == dest) return all_of(from);
        const NodeId peer = ids[to];
        switch (proto.kind) {
            case ProtocolKind::Prophet:
                return baselines::prophet_forward(prophet[from], prophet[to], cfg.destination) ? all_of(from)
                                                                                               : std::vector<Span>{};
            case ProtocolKind::Meed:
                return meed[from].next_hop(cfg.destination) == peer ? all_of(from) : std::vector<Span>{};
            case ProtocolKind::Reaper: break;
        }
        const routing::ForwardPlan plan(procs[from].table(), t, cfg.grid);
        const int x = predict::normalize_instant(t, cfg.grid);
        std::vector<double> th;
        for (const auto& row : plan.rows())
            if (row) th.push_back(row->delay_seconds);
        std::sort(th.begin(), th.end());
        th.erase(std::unique(th.begin(), th.end()), th.end());
        if (th.empty()) return {};
        // Remaining time below the fastest row falls back to the fastest row.
        std::vector<bool> via_peer(th.size());
        for (std::size_t k = 0; k < th.size(); ++k) {
            const auto c = plan.select(routing::Deadline{th[k]});
            via_peer[k] = c && c->next_hop == peer && in_meeting_window(procs[from], peer, c->slot, x);
        }
        std::vector<Span> out;
        for (std::size_t bi = 0; bi < buf[from].size(); ++bi) {
            const Batch& b = buf[from][bi];
            for (std::size_t k = 0; k < th.size(); ++k) {
                if (!via_peer[k]) continue;
                const std::uint32_t lo = k == 0 ? 0 : first_index(b, t + th[k], false);
                const std::uint32_t hi = k + 1 < th.size() ? first_index(b, t + th[k + 1], false) : b.count;
                if (lo >= hi) continue;
                if (!out.empty() && out.back().batch == bi && out.back().end == lo)
                    out.back().end = hi;
                else
                    out.push_back({bi, lo, hi});
            }
        }
        return out;
    }

    void drain_audit(protocol::NodeProcess& n) {
        while (n.audit() != protocol::Action::None) {
        }
    }

    void deliver_frame(protocol::NodeProcess& to, const routing::SFrame& s) {
        for (;;) {
            const auto a = to.receive(s);
            if (a == protocol::Action::None || a == protocol::Action::Quarantine || a == protocol::Action::Receive)
                break;
        }
    }

    long long control_exchange(std::size_t a, std::size_t b, double t) {
        long long bytes = 0;
        switch (proto.kind) {
            case ProtocolKind::Prophet: {
                bytes = static_cast<long long>(prophet[a].vector().size() + prophet[b].vector().size()) *
                        cfg.prophet_entry_bytes;
                m.control_frames += 2;
                baselines::prophet_contact(prophet[a], prophet[b], t);
                break;
            }
            case ProtocolKind::Meed: {
                meed[a].contact_start(ids[b], t);
                meed[b].contact_start(ids[a], t);
                bytes = static_cast<long long>(meed[a].vector().size() + meed[b].vector().size()) *
                        cfg.meed_entry_bytes;
                m.control_frames += 2;
                baselines::meed_exchange(meed[a], meed[b]);
                break;
            }
            case ProtocolKind::Reaper: {
                auto& na = procs[a];
                auto& nb = procs[b];
                if (!na.beta(nb.id()) || !nb.beta(na.id())) break;
                drain_audit(na);
                drain_audit(nb);
                for (auto [from, to] : {std::pair{&na, &nb}, std::pair{&nb, &na}}) {
                    auto r = from->send(to->id());
                    if (!r.frame) continue;
                    bytes += static_cast<long long>(r.frame->finite_cells()) * cfg.reaper_cell_bytes;
                    ++m.control_frames;
                    deliver_frame(*to, *r.frame);
                }
                break;
            }
        }
        m.control_bytes += bytes;
        return bytes;
    }

    double next_tick(double t) const {
        const double s = cfg.grid.slot_len;
        return cfg.grid.epoch + (std::floor((t - cfg.grid.epoch) / s + 1e-9) + 1) * s;
    }

    // One transfer opportunity: control (optionally), then data both ways
    // using the capacity accrued up to the next opportunity.
    void opportunity(const NodePair& pair, double t, bool control) {
        auto& c = active.at(pair);
        const std::size_t a = index.at(pair.first), b = index.at(pair.second);
        const double tick = next_tick(t);
        const double horizon = std::min(tick, c.end);
        for (std::size_t n : {a, b})
            if (radio_window[n] != tick) {
                radio_window[n] = tick;
                radio_used[n] = 0;
            }
        if (proto.kind == ProtocolKind::Reaper)
            control = control || procs[a].table() != c.seen_a || procs[b].table() != c.seen_b;
        if (control) {
            const auto bytes = static_cast<double>(control_exchange(a, b, t));
            c.used_bytes += bytes;
            radio_used[a] += bytes;
            radio_used[b] += bytes;
            if (proto.kind == ProtocolKind::Reaper) {
                c.seen_a = procs[a].table();
                c.seen_b = procs[b].table();
            }
        }
        const double radio = cfg.link_rate_bps / 8.0 * (tick - t);
        const double avail = std::min({cfg.link_rate_bps / 8.0 * (horizon - c.start) - c.used_bytes,
                                       radio - radio_used[a], radio - radio_used[b]});
        const long long cap = avail > 0 ? static_cast<long long>(avail / wl.packet_size) : 0;
        if (cap == 0) return;
        const auto ab = eligible(a, b, t);
        const auto ba = eligible(b, a, t);
        auto total = [](const std::vector<Span>& v) {
            long long n = 0;
            for (const auto& s : v) n += s.end - s.begin;
            return n;
        };
        const long long want_ab = total(ab), want_ba = total(ba);
        long long n_ab = want_ab, n_ba = want_ba;
        if (want_ab + want_ba > cap) {
            n_ab = std::min(want_ab, cap / 2);
            n_ba = std::min(want_ba, cap - n_ab);
            n_ab = std::min(want_ab, cap - n_ba);
        }
        move(a, b, ab, n_ab, t);
        move(b, a, ba, n_ba, t);
        const double sent = static_cast<double>(n_ab + n_ba) * wl.packet_size;
        c.used_bytes += sent;
        radio_used[a] += sent;
        radio_used[b] += sent;
    }

    // Refreshes every pair's beta-frame from past history only. Each refresh
    // can void cells, so after the history fills it runs every
    // beta_refresh_frames frames.
    bool update_betas(double t, int frame) {
        const int h = std::min(cfg.grid.history_depth, frame);
        if (h <= 0) return false;
        const int every = cfg.beta_refresh_frames > 0 ? cfg.beta_refresh_frames : cfg.grid.history_depth;
        if (frame > cfg.grid.history_depth && frame % every != 0) return false;
        trace::SlotGrid g = cfg.grid;
        g.history_depth = h;
        g.epoch = t - h * cfg.grid.frame_seconds();
        for (const NodePair& pair : trace.pairs()) {
            auto& na = procs[index.at(pair.first)];
            auto& nb = procs[index.at(pair.second)];
            auto beta = predict::beta_frame_for_pair(trace, g, pair);
            if (beta) {
                na.set_beta(pair.second, *beta);
                nb.set_beta(pair.first, *beta);
            } else {
                na.clear_beta(pair.second);
                nb.clear_beta(pair.first);
            }
        }
        return true;
    }

    // --- event handlers -----------------------------------------------------

    void on_tick(double t) {
        drop_expired(t);
        bool boundary = false;
        if (proto.kind == ProtocolKind::Reaper) {
            const long long k = std::llround((t - cfg.grid.epoch) / cfg.grid.slot_len);
            if (k % cfg.grid.frame_len == 0) boundary = update_betas(t, static_cast<int>(k / cfg.grid.frame_len));
            for (auto& n : procs) drain_audit(n);
        }
        for (const auto& [pair, c] : active) opportunity(pair, t, boundary);
    }

    void on_contact_start(const SimEvent& e) {
        drop_expired(e.time);
        const NodePair pair(e.a, e.b);
        auto& ends = pending_ends.at(pair);
        ContactState c;
        c.start = e.time;
        c.end = ends.front();
        ends.pop_front();
        active[pair] = c;
        ++m.contacts;
        opportunity(pair, e.time, true);
    }

    void on_contact_end(const SimEvent& e) {
        const NodePair pair(e.a, e.b);
        active.erase(pair);
        if (proto.kind == ProtocolKind::Meed) {
            meed[index.at(pair.first)].contact_end(pair.second, e.time);
            meed[index.at(pair.second)].contact_end(pair.first, e.time);
        }
    }

    MetricsReport run(const Simulator& self) {
        using Queue = std::priority_queue<SimEvent, std::vector<SimEvent>,
                                          decltype([](const SimEvent& x, const SimEvent& y) { return y < x; })>;
        Queue q;
        for (const auto& r : trace.records()) {
            if (r.start >= end) continue;
            pending_ends[r.pair()].push_back(r.end);
            q.push({r.start, EventKind::ContactStart, r.node_a, r.node_b});
            if (r.end <= end) q.push({r.end, EventKind::ContactEnd, r.node_a, r.node_b});
        }
        const double wl_end = wl.start + wl.duration;
        if (interval > 0 && wl.start < wl_end)
            for (NodeId s : sources) q.push({wl.start, EventKind::PacketGen, s, kNoHop});
        for (double t = next_tick(cfg.grid.epoch); t <= end; t = next_tick(t)) q.push({t, EventKind::SlotTick});

        while (!q.empty()) {
            const SimEvent e = q.top();
            q.pop();
            switch (e.kind) {
                case EventKind::ContactStart: on_contact_start(e); break;
                case EventKind::ContactEnd: on_contact_end(e); break;
                case EventKind::SlotTick: on_tick(e.time); break;
                case EventKind::PacketGen: {
                    generate(e.a, e.time);
                    const double next = wl.start + next_seq[index.at(e.a)] * interval;
                    if (next < wl_end && next <= end) q.push({next, EventKind::PacketGen, e.a, kNoHop});
                    break;
                }
            }
            if (observer) observer(self, e);
        }
        drop_expired(end);
        for (const auto& node : buf)
            for (const auto& b : node) {
                m.in_flight += b.count;
                log_piece(b, "in_flight", end, b.hops);
            }
        if (m.delivered > 0) {
            const double d = static_cast<double>(m.delivered);
            m.avg_cost_hops = static_cast<double>(m.transmissions) / d;
            m.avg_path_hops = static_cast<double>(hops_sum) / d;
            m.avg_delay = delay_sum / d;
        }
        if (m.generated > 0) m.delivery_prob = static_cast<double>(m.delivered) / static_cast<double>(m.generated);
        if (wl.duration > 0 && !sources.empty())
            m.throughput_bps = static_cast<double>(m.delivered) * wl.packet_size * 8.0 / wl.duration /
                               static_cast<double>(sources.size());
        return m;
    }
};

Simulator::Simulator(const trace::ContactTrace& trace, SimConfig config, ProtocolSpec protocol, Workload workload)
    : impl_(std::make_unique<Impl>(trace, std::move(config), protocol, workload)) {}

Simulator::~Simulator() = default;

void Simulator::set_packet_log(std::ostream* out) {
    impl_->log = out;
    if (out) *out << "source,seq,created,fate,time,hops,path\n";
}
void Simulator::set_observer(Observer observer) { impl_->observer = std::move(observer); }
MetricsReport Simulator::run() { return impl_->run(*this); }

std::vector<Holding> Simulator::holdings() const {
    std::vector<Holding> out;
    for (std::size_t i = 0; i < impl_->buf.size(); ++i)
        for (const auto& b : impl_->buf[i]) out.push_back({impl_->ids[i], b.source, b.seq, b.count});
    return out;
}

long long Simulator::generated() const { return impl_->m.generated; }
long long Simulator::delivered() const { return impl_->m.delivered; }
long long Simulator::dropped() const { return impl_->m.dropped_deadline; }

long long Simulator::buffered() const {
    long long n = 0;
    for (const auto& node : impl_->buf)
        for (const auto& b : node) n += b.count;
    return n;
}

MetricsReport run(const trace::ContactTrace& trace, const SimConfig& config, const ProtocolSpec& protocol,
                  const Workload& workload) {
    return Simulator(trace, config, protocol, workload).run();
}

void write_metrics_header(std::ostream& out) {
    out << "seed,protocol,offered_rate_bps,generated,delivered,dropped_deadline,in_flight,transmissions,"
           "throughput_bps,delivery_prob,avg_cost_hops,avg_path_hops,avg_delay,control_bytes,control_frames,"
           "contacts,cycle_revisits\n";
}

void write_metrics_row(std::ostream& out, const MetricsReport& r, std::uint64_t seed) {
    out << seed << ',' << r.protocol << ',' << r.offered_rate_bps << ',' << r.generated << ',' << r.delivered << ','
        << r.dropped_deadline << ',' << r.in_flight << ',' << r.transmissions << ',' << r.throughput_bps << ','
        << r.delivery_prob << ',' << r.avg_cost_hops << ',' << r.avg_path_hops << ',' << r.avg_delay << ','
        << r.control_bytes << ',' << r.control_frames << ',' << r.contacts << ',' << r.cycle_revisits << '\n';
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
    if (!spec.make_trace) throw Error("sweep needs a trace source");
    std::vector<trace::ContactTrace> traces;
    for (auto seed : spec.seeds) traces.push_back(spec.make_trace(seed));

    struct Cell {
        std::size_t seed, proto, rate;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < spec.seeds.size(); ++s)
        for (std::size_t p = 0; p < spec.protocols.size(); ++p)
            for (std::size_t r = 0; r < spec.rates.size(); ++r) cells.push_back({s, p, r});

    std::vector<SweepRow> rows(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
            const Cell& c = cells[i];
            Workload w = spec.workload;
            w.rate_bps = spec.rates[c.rate];
            try {
                rows[i] = {spec.seeds[c.seed], run(traces[c.seed], spec.config, spec.protocols[c.proto], w)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned n = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

}  // namespace reaper::sim
