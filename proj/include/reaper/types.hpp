#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace reaper {

using NodeId = std::int32_t;

/// Null next-hop marker.
inline constexpr NodeId kNoHop = -1;

/// Unordered node pair, always stored with first < second.
struct NodePair {
    NodeId first = 0;
    NodeId second = 0;

    NodePair() = default;
    NodePair(NodeId a, NodeId b) : first(a < b ? a : b), second(a < b ? b : a) {}

    bool contains(NodeId n) const { return n == first || n == second; }
    NodeId other(NodeId n) const { return n == first ? second : first; }

    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct NodePairHash {
    std::size_t operator()(const NodePair& p) const noexcept {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.first)) << 32) ^
               static_cast<std::uint32_t>(p.second);
    }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace reaper
