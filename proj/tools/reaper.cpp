#include "CLI11.hpp"

#include "reaper/analysis.hpp"
#include "reaper/experiments.hpp"
#include "reaper/mobility.hpp"
#include "reaper/predict.hpp"
#include "reaper/sim.hpp"
#include "reaper/trace.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace reaper;

namespace {

// Where a command reads its contacts from.
struct TraceSource {
    std::string path;
    std::string format = "pairwise";
    std::string exclude;
    std::string mobility_config;
    int days = 10;
    std::uint64_t seed = 1;

    void add(CLI::App* app) {
        app->add_option("--trace", path, "Contact trace file; empty generates a campus mobility trace")
            ->capture_default_str();
        app->add_option("--format", format, "Trace format: pairwise or haggle")
            ->check(CLI::IsMember({"pairwise", "haggle"}))
            ->capture_default_str();
        app->add_option("--exclude", exclude, "Comma-separated node ids to drop from the trace")->capture_default_str();
        app->add_option("--mobility-config", mobility_config, "Mobility config for a generated trace")
            ->capture_default_str();
        app->add_option("--days", days, "Days of generated trace")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--seed", seed, "Seed for generated traces")->capture_default_str();
    }

    mobility::TvcmConfig mobility_for(std::uint64_t s) const {
        auto c = mobility_config.empty() ? mobility::TvcmConfig::campus() : mobility::load_config(mobility_config);
        c.seed = s;
        return c;
    }

    trace::ContactTrace load_for(std::uint64_t s) const {
        if (path.empty()) return mobility::generate_trace(mobility_for(s), days);
        trace::IngestOptions opt;
        opt.format = format == "haggle" ? trace::TraceFormat::HaggleEvents : trace::TraceFormat::PairwiseCsv;
        std::stringstream ids(exclude);
        for (std::string id; std::getline(ids, id, ',');)
            if (!id.empty()) opt.excluded.insert(std::stoi(id));
        return trace::ingest_trace_file(path, opt);
    }

    trace::ContactTrace load() const { return load_for(seed); }
};

struct GridFlags {
    double slot = 600;
    int frame_len = 144;
    int history = 5;
    double epoch = 0;

    void add(CLI::App* app) {
        app->add_option("--slot", slot, "Slot length, seconds")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--frame-len", frame_len, "Slots per frame")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--history", history, "Frames of history")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--epoch", epoch, "Time of the first slot, seconds")->capture_default_str();
    }

    trace::SlotGrid grid() const {
        trace::SlotGrid g;
        g.slot_len = slot;
        g.frame_len = frame_len;
        g.history_depth = history;
        g.epoch = epoch;
        g.validate();
        return g;
    }
};

struct SimFlags {
    NodeId destination = 0;
    int max_hops = 0;
    double link_rate = 1e6;
    double end_time = 0;
    int beta_refresh = 0;
    double packet_size = 500;
    std::string start = "5d";
    std::string duration = "86300";

    void add(CLI::App* app) {
        app->add_option("--destination", destination, "Destination node id")->capture_default_str();
        app->add_option("--max-hops", max_hops, "Hop bound K; 0 picks ceil(log2 N)+1")->capture_default_str();
        app->add_option("--link-rate", link_rate, "Link rate, bits per second")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--end-time", end_time, "Simulation end, seconds; 0 runs to the trace end")
            ->capture_default_str();
        app->add_option("--beta-refresh", beta_refresh, "Frames between beta refreshes; 0 uses the history depth")
            ->capture_default_str();
        app->add_option("--packet-size", packet_size, "Packet size, bytes")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--start", start, "Workload start (s/m/h/d suffixes)")->capture_default_str();
        app->add_option("--duration", duration, "Workload duration (s/m/h/d suffixes)")->capture_default_str();
    }

    sim::SimConfig config(const trace::SlotGrid& grid) const {
        sim::SimConfig c;
        c.destination = destination;
        c.grid = grid;
        c.max_hops = max_hops;
        c.link_rate_bps = link_rate;
        c.end_time = end_time;
        c.beta_refresh_frames = beta_refresh;
        return c;
    }

    sim::Workload workload(double rate) const {
        sim::Workload w;
        w.rate_bps = rate;
        w.packet_size = static_cast<int>(packet_size);
        w.start = analysis::parse_duration(start);
        w.duration = analysis::parse_duration(duration);
        return w;
    }
};

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw Error("bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw Error("empty number list");
    return out;
}

std::vector<sim::ProtocolSpec> parse_protocols(const std::string& text) {
    std::vector<sim::ProtocolSpec> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(sim::ProtocolSpec::parse(item));
    if (out.empty()) throw Error("empty protocol list");
    return out;
}

// Stdout for "-", else the named file.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw Error("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_window_row(std::ostream& out, const analysis::WindowMetrics& m, bool selected) {
    out << m.delta << ',' << m.p_thresh << ',' << m.windows << ',' << m.avg_link_prob << ','
        << m.connected_link_fraction << ',' << m.avg_path_prob << ',' << m.diameter_hops << ','
        << m.reachable_pair_fraction << ',' << (selected ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact-trace analysis, meeting prediction and deadline routing for delay tolerant networks"};
    app.require_subcommand(1);
    std::string out_path = "-";

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Window metrics per frame length or per link threshold");
    TraceSource a_src;
    a_src.add(analyze);
    std::string delta_sweep = "1h:7d", thresholds, frame;
    double min_path = 0.60, min_component = 0.90;
    analyze->add_option("--delta-sweep", delta_sweep, "Window lengths: a:b doubling range or list")
        ->capture_default_str();
    analyze->add_option("--thresholds", thresholds, "Comma list of link thresholds; switches to a threshold study")
        ->capture_default_str();
    analyze->add_option("--frame", frame, "Frame length for the threshold study; empty uses the chosen frame")
        ->capture_default_str();
    analyze->add_option("--min-path-prob", min_path, "Frame choice: path reliability floor")->capture_default_str();
    analyze->add_option("--min-component", min_component, "Frame choice: share of best reachable pairs")
        ->capture_default_str();
    analyze->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Beta frame of every pair that met");
    TraceSource p_src;
    p_src.add(predict_cmd);
    GridFlags p_grid;
    p_grid.add(predict_cmd);
    double p_thresh = 0;
    predict_cmd->add_option("--p-thresh", p_thresh, "Ignore slots with a lower contact rate")->capture_default_str();
    predict_cmd->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    // generate-trace
    auto* gen = app.add_subcommand("generate-trace", "Synthetic community mobility trace");
    std::string g_config;
    int g_days = 10;
    std::uint64_t g_seed = 1;
    bool dump_config = false;
    gen->add_option("--config", g_config, "Mobility config file; empty uses the campus layout")->capture_default_str();
    gen->add_option("--days", g_days, "Days to generate")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--seed", g_seed, "Random seed")->capture_default_str();
    gen->add_flag("--dump-config", dump_config, "Write the effective config instead of the trace");
    gen->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "One protocol at one offered rate");
    TraceSource s_src;
    s_src.add(simulate);
    GridFlags s_grid;
    s_grid.add(simulate);
    SimFlags s_sim;
    s_sim.add(simulate);
    std::string protocol = "REAPER_96", packet_log;
    double rate = 96;
    simulate->add_option("--protocol", protocol, "REAPER_<hours>, MEED-DVR or PROPHET")->capture_default_str();
    simulate->add_option("--rate", rate, "Offered rate per source, bits per second")->capture_default_str();
    simulate->add_option("--packet-log", packet_log, "Per-packet fate log file")->capture_default_str();
    simulate->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Protocols by offered rate over one or more seeds");
    TraceSource w_src;
    w_src.add(sweep_cmd);
    GridFlags w_grid;
    w_grid.add(sweep_cmd);
    SimFlags w_sim;
    w_sim.add(sweep_cmd);
    std::string rates = "1,10,96,960,2400,4800,9600";
    std::string protocols = "REAPER_96,REAPER_72,REAPER_48,REAPER_24,MEED-DVR,PROPHET";
    int runs = 1;
    unsigned threads = 0;
    sweep_cmd->add_option("--rates", rates, "Comma list of offered rates")->capture_default_str();
    sweep_cmd->add_option("--protocols", protocols, "Comma list of protocols")->capture_default_str();
    sweep_cmd->add_option("--runs", runs, "Seeds seed..seed+runs-1")->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--threads", threads, "Worker threads; 0 uses all cores")->capture_default_str();
    sweep_cmd->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    // stabilize-test
    auto* stab = app.add_subcommand("stabilize-test", "Corrupt the tables and track convergence frame by frame");
    std::string faults_path, st_trace;
    int st_nodes = 8, st_frame = 24, st_hops = 0, st_frames = 0, corrupt = 5, preconverge = 0;
    std::uint64_t st_seed = 1;
    GridFlags st_grid;
    stab->add_option("--faults", faults_path, "Fault script; empty draws random faults")->capture_default_str();
    stab->add_option("--corrupt", corrupt, "Random faults when no script is given")->capture_default_str();
    stab->add_option("--trace", st_trace, "Derive the topology from a trace; empty uses a small world")
        ->capture_default_str();
    stab->add_option("--nodes", st_nodes, "Small-world node count")->check(CLI::Range(3, 1024))->capture_default_str();
    stab->add_option("--frame-slots", st_frame, "Small-world frame length, slots")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    stab->add_option("--max-hops", st_hops, "Hop bound K; 0 picks ceil(log2 N)+1")->capture_default_str();
    stab->add_option("--frames", st_frames, "Frames to run; 0 runs 3(K+1)+3")->capture_default_str();
    stab->add_option("--preconverge", preconverge, "Fault-free frames before the faults")->capture_default_str();
    stab->add_option("--seed", st_seed, "Seed for topology and faults")->capture_default_str();
    st_grid.add(stab);
    stab->add_option("--out", out_path, "Output file, - for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n";
        const CLI::App* shown = &app;
        for (const auto* sub : app.get_subcommands()) shown = sub;
        std::cerr << shown->help();
        return 2;
    }

    try {
        if (*analyze) {
            const auto tr = a_src.load();
            Output out(out_path);
            auto& os = out.stream();
            os << "delta,p_thresh,windows,avg_link_prob,connected_link_fraction,avg_path_prob,diameter_hops,"
                  "reachable_pair_fraction,selected\n";
            const auto choice =
                analysis::characteristic_frame(tr, analysis::parse_delta_sweep(delta_sweep), {min_path, min_component});
            if (thresholds.empty()) {
                for (const auto& m : choice.table) write_window_row(os, m, choice.frame_len && m.delta == *choice.frame_len);
            } else {
                double f = 0;
                if (!frame.empty())
                    f = analysis::parse_duration(frame);
                else if (choice.frame_len)
                    f = *choice.frame_len;
                else
                    throw Error("no frame length met the criteria; pass --frame");
                for (const auto& m : analysis::threshold_study(tr, f, parse_numbers(thresholds)))
                    write_window_row(os, m, false);
            }
        } else if (*predict_cmd) {
            const auto tr = p_src.load();
            const auto g = p_grid.grid();
            predict::BetaOptions opt;
            opt.p_thresh = p_thresh;
            Output out(out_path);
            auto& os = out.stream();
            os << "a,b,z,betas\n";
            for (const auto& pair : tr.pairs()) {
                const auto b = predict::beta_frame_for_pair(tr, g, pair, opt);
                if (!b) continue;
                os << pair.first << ',' << pair.second << ',' << b->betas.size();
                for (int x : b->betas) os << ',' << x;
                os << '\n';
            }
        } else if (*gen) {
            auto c = g_config.empty() ? mobility::TvcmConfig::campus() : mobility::load_config(g_config);
            c.seed = g_seed;
            c.validate();
            Output out(out_path);
            if (dump_config)
                mobility::write_config(out.stream(), c);
            else
                trace::write_pairwise_csv(out.stream(), mobility::generate_trace(c, g_days));
        } else if (*simulate) {
            const auto tr = s_src.load();
            sim::Simulator s(tr, s_sim.config(s_grid.grid()), sim::ProtocolSpec::parse(protocol), s_sim.workload(rate));
            std::unique_ptr<std::ofstream> log;
            if (!packet_log.empty()) {
                log = std::make_unique<std::ofstream>(packet_log);
                if (!*log) throw Error("cannot write '" + packet_log + "'");
                s.set_packet_log(log.get());
            }
            const auto r = s.run();
            Output out(out_path);
            sim::write_metrics_header(out.stream());
            sim::write_metrics_row(out.stream(), r, s_src.seed);
        } else if (*sweep_cmd) {
            sim::SweepSpec spec;
            spec.rates = parse_numbers(rates);
            spec.protocols = parse_protocols(protocols);
            for (int i = 0; i < runs; ++i) spec.seeds.push_back(w_src.seed + static_cast<std::uint64_t>(i));
            spec.config = w_sim.config(w_grid.grid());
            spec.workload = w_sim.workload(0);
            spec.make_trace = [&w_src](std::uint64_t s) { return w_src.load_for(s); };
            spec.threads = threads;
            const auto rows = sim::sweep(spec);
            Output out(out_path);
            sim::write_metrics_header(out.stream());
            for (const auto& row : rows) sim::write_metrics_row(out.stream(), row.report, row.seed);
        } else if (*stab) {
            std::mt19937_64 rng(st_seed);
            protocol::Topology topo;
            if (st_trace.empty())
                topo = experiments::small_world_topology(st_nodes, st_seed, st_frame, 2, 0.1, 2, st_hops);
            else
                topo = experiments::topology_from_trace(trace::ingest_trace_file(st_trace), st_grid.grid(), 0, st_hops);
            std::vector<protocol::Fault> faults;
            if (!faults_path.empty()) {
                std::ifstream in(faults_path);
                if (!in) throw Error("cannot read '" + faults_path + "'");
                faults = protocol::parse_fault_script(in);
            } else {
                faults = experiments::random_faults(topo, rng, corrupt);
            }
            const int k = topo.config.max_hops;
            const int frames = st_frames > 0 ? st_frames : 3 * (k + 1) + 3;
            const auto rep = experiments::run_stabilization(topo, faults, frames, preconverge);
            Output out(out_path);
            auto& os = out.stream();
            os << "frame,level,c1,c2,c3,c5";
            for (int r = 1; r <= k; ++r) os << ",v" << r + 1;
            os << ",actions\n";
            for (const auto& f : rep.frames) {
                os << f.frame << ',' << f.level;
                for (int c : f.counts) os << ',' << c;
                for (int r = 1; r <= k; ++r) os << ',' << f.v[static_cast<std::size_t>(r)];
                os << ',' << f.actions << '\n';
            }
            std::cerr << "legitimate after frame " << (rep.reached ? std::to_string(*rep.reached) : "never")
                      << " (K+1 = " << k + 1 << "); left again: " << (rep.left_legitimate ? "yes" : "no")
                      << "; #(s) monotone: " << (rep.counts_monotone ? "yes" : "no")
                      << "; V monotone: " << (rep.v_monotone ? "yes" : "no")
                      << "; tables match oracle: " << (rep.matches_oracle ? "yes" : "no") << '\n';
            if (!rep.reached) return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
