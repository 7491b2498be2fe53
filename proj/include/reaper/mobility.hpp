#pragma once

#include "reaper/trace.hpp"
#include "reaper/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Community-based synthetic mobility: nodes sit at sampled spots inside
// communities chosen per time period; contacts follow from distance.
namespace reaper::mobility {

enum Kind : unsigned { Home = 1, Work = 2, Food = 4, Recreation = 8 };

/// Parses "home", "work", "food", "recreation" joined by '+'.
unsigned parse_kinds(const std::string& text);
std::string kinds_name(unsigned kinds);

struct Community {
    unsigned kinds = Home;
    double x0 = 0, y0 = 0, x1 = 100, y1 = 100;
};

/// Hours of day; end < start wraps past midnight.
struct Window {
    double start_h = 0;
    double end_h = 24;
};

struct Period {
    std::vector<Window> windows;
    unsigned kind = Home;
    double probability = 0.0;
};

struct TvcmConfig {
    double area_w = 1000, area_h = 1000;
    std::vector<Community> communities;
    std::vector<Period> periods;
    /// Mobile nodes, ids 1..nodes.
    int nodes = 25;
    /// Adds a fixed node with id 0.
    bool base_station = true;
    /// Negative: centre of the first community that is both food and
    /// recreation, else of the first community.
    double base_x = -1, base_y = -1;
    double contact_range = 100;
    /// Seconds a node stays at one sampled spot.
    double epoch_length = 3600;
    std::uint64_t seed = 1;

    /// 1 km square, 10 home, 4 work, 2 food, 2 recreation (one of them also
    /// food), five daily periods.
    static TvcmConfig campus();

    /// Throws Error on bad geometry, probabilities outside [0,1], windows
    /// that do not tile the day, or kinds no community offers.
    void validate() const;
};

/// key = value lines, '#' comments. Repeated `community` / `period` keys
/// replace the defaults as a whole:
///   community = recreation+food 800 500 900 600
///   period = work 0.9 9-13 15-17
/// Other keys: area, nodes, base_station, base_position, contact_range,
/// epoch_length, seed.
TvcmConfig parse_config(std::istream& in);
TvcmConfig load_config(const std::string& path);
void write_config(std::ostream& out, const TvcmConfig& config);

/// Communities a node uses, as indices into config.communities.
struct NodePlan {
    NodeId id = 0;
    int home = 0;
    /// Per kind bit position (home, work, food, recreation): chosen
    /// community, -1 when none offers that kind.
    int favourite[4] = {-1, -1, -1, -1};
};

struct TvcmOutput {
    std::vector<NodePlan> plans;
    /// Contacts split at period-window boundaries, merged inside a window.
    std::vector<trace::ContactRecord> contacts;
    trace::ContactTrace trace;
};

/// Deterministic for a given config (seed included).
TvcmOutput generate(const TvcmConfig& config, int days);
trace::ContactTrace generate_trace(const TvcmConfig& config, int days);

}  // namespace reaper::mobility
