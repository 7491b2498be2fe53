#pragma once

#include "reaper/protocol.hpp"
#include "reaper/trace.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

// Topology fixtures and protocol-level experiment drivers.
namespace reaper::experiments {

struct RandomTopologyOptions {
    int min_nodes = 3, max_nodes = 6;
    int min_frame = 2, max_frame = 12;
    int min_hops = 1, max_hops = 3;
    double link_prob = 0.5;
    /// Chance that a slot is a meeting slot of a linked pair.
    double slot_prob = 0.25;
};

/// Node 0 is the destination. Every linked pair meets at least once a frame.
protocol::Topology random_topology(std::mt19937_64& rng, const RandomTopologyOptions& opt = {});

/// Ring lattice with `degree` neighbors per side, each edge rewired with
/// probability `rewire`; `meetings` random slots per linked pair.
protocol::Topology small_world_topology(int nodes, std::uint64_t seed, int frame_len = 24, int degree = 2,
                                        double rewire = 0.1, int meetings = 2, int max_hops = 0);

/// Beta frames per pair from the trace; max_hops 0 picks ceil(log2 N) + 1.
protocol::Topology topology_from_trace(const trace::ContactTrace& trace, const trace::SlotGrid& grid,
                                       NodeId destination, int max_hops = 0);

/// `count` random cell overwrites and history resets.
std::vector<protocol::Fault> random_faults(const protocol::Topology& topo, std::mt19937_64& rng, int count);

struct StabilizationFrame {
    int frame = 0;
    int level = 0;
    std::array<int, 4> counts{};
    std::vector<int> v;
    int actions = 0;
};

struct StabilizationReport {
    int max_hops = 0;
    std::vector<StabilizationFrame> frames;
    /// First frame after which H.(K+1) held, 0 if it held from the start.
    std::optional<int> reached;
    /// H.(K+1) broke again after being reached.
    bool left_legitimate = false;
    /// Lexicographic #(s) never rose between consecutive steps.
    bool counts_monotone = true;
    /// V_(r+1) never rose while H.r held.
    bool v_monotone = true;
    bool matches_oracle = false;
};

/// Applies the faults to a fresh network (after `preconverge` fault-free
/// frames when positive), then runs `frames` frames checking the ladder and
/// the variants after every action.
StabilizationReport run_stabilization(const protocol::Topology& topo, const std::vector<protocol::Fault>& faults,
                                      int frames, int preconverge = 0);

struct OptimalityReport {
    bool converged = false;
    long long cells = 0;
    long long cell_mismatches = 0;
    long long queries = 0;
    long long forward_mismatches = 0;
};

/// Converges the network, compares every cell with the path enumeration and
/// every (slot, deadline) forwarding query with the unrestricted optimum.
OptimalityReport check_optimality(const protocol::Topology& topo, int max_frames = 50);

}  // namespace reaper::experiments
