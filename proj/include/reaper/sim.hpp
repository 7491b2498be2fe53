#pragma once

#include "reaper/trace.hpp"
#include "reaper/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

// Discrete-event simulation of single-copy routing over a contact trace.
namespace reaper::sim {

enum class ProtocolKind { Reaper, Prophet, Meed };

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::Reaper;
    /// Per-packet deadline for REAPER packets, seconds.
    double deadline_seconds = 96 * 3600.0;

    static ProtocolSpec reaper(double deadline_hours);
    static ProtocolSpec prophet();
    static ProtocolSpec meed();
    /// "REAPER_<hours>", "PROPHET", "MEED-DVR" (case-insensitive).
    static ProtocolSpec parse(const std::string& name);
    std::string name() const;
};

struct Workload {
    /// Per-source constant bit rate.
    double rate_bps = 96;
    int packet_size = 500;
    /// Default leaves five days of history first.
    double start = 5 * 86400.0;
    double duration = 86300;
};

struct SimConfig {
    NodeId destination = 0;
    /// Prediction grid: slots, one-frame period, history depth, epoch.
    trace::SlotGrid grid;
    /// 0 picks ceil(log2 N) + 1.
    int max_hops = 0;
    /// Frames between beta-frame refreshes once the history is full;
    /// 0 uses the history depth.
    int beta_refresh_frames = 0;
    double link_rate_bps = 1e6;
    /// 0 runs to the later of the trace end and the workload end.
    double end_time = 0;
    /// Packet lifetime under PROPHET and MEED-DVR.
    double baseline_deadline = std::numeric_limits<double>::infinity();
    int reaper_cell_bytes = 4;
    int prophet_entry_bytes = 6;
    int meed_entry_bytes = 8;
};

enum class EventKind { ContactStart = 0, ContactEnd = 1, PacketGen = 2, SlotTick = 3 };

struct SimEvent {
    double time = 0;
    EventKind kind = EventKind::SlotTick;
    NodeId a = kNoHop;
    NodeId b = kNoHop;

    /// Time, then kind, then ids.
    friend bool operator<(const SimEvent& x, const SimEvent& y);
};

struct MetricsReport {
    std::string protocol;
    double offered_rate_bps = 0;
    long long generated = 0;
    long long delivered = 0;
    long long dropped_deadline = 0;
    long long in_flight = 0;
    /// Data transmissions, every hop of every packet.
    long long transmissions = 0;
    /// Delivered bits per second per source over the workload window.
    double throughput_bps = 0;
    double delivery_prob = 0;
    /// Transmissions per delivered packet.
    double avg_cost_hops = 0;
    /// Mean hop count of delivered packets.
    double avg_path_hops = 0;
    double avg_delay = 0;
    long long control_bytes = 0;
    long long control_frames = 0;
    long long contacts = 0;
    long long cycle_revisits = 0;
};

/// Packets held by one node: `count` consecutive sequence numbers of a source.
struct Holding {
    NodeId node = kNoHop;
    NodeId source = kNoHop;
    std::uint32_t first_seq = 0;
    std::uint32_t count = 0;
};

class Simulator {
public:
    Simulator(const trace::ContactTrace& trace, SimConfig config, ProtocolSpec protocol, Workload workload);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Writes a header, then one CSV line per packet fate:
    /// source,seq,created,fate,time,hops,path.
    void set_packet_log(std::ostream* out);
    using Observer = std::function<void(const Simulator&, const SimEvent&)>;
    /// Called after every processed event.
    void set_observer(Observer observer);

    MetricsReport run();

    std::vector<Holding> holdings() const;
    long long generated() const;
    long long delivered() const;
    long long dropped() const;
    long long buffered() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

MetricsReport run(const trace::ContactTrace& trace, const SimConfig& config, const ProtocolSpec& protocol,
                  const Workload& workload);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsReport& r, std::uint64_t seed);

struct SweepSpec {
    std::vector<double> rates;
    std::vector<ProtocolSpec> protocols;
    std::vector<std::uint64_t> seeds;
    SimConfig config;
    Workload workload;
    /// Trace for a seed; called once per seed.
    std::function<trace::ContactTrace(std::uint64_t)> make_trace;
    /// 0 uses the hardware concurrency.
    unsigned threads = 0;
};

struct SweepRow {
    std::uint64_t seed = 0;
    MetricsReport report;
};

/// Rows in (seed, protocol, rate) order regardless of thread scheduling.
std::vector<SweepRow> sweep(const SweepSpec& spec);

}  // namespace reaper::sim
