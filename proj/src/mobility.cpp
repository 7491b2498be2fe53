#include "reaper/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace reaper::mobility {

namespace {

constexpr const char* kKindNames[] = {"home", "work", "food", "recreation"};

int kind_index(unsigned kind) {
    for (int i = 0; i < 4; ++i)
        if (kind == (1u << i)) return i;
    throw Error("period target must be a single kind");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("bad boolean: " + v);
}

Window parse_window(const std::string& text) {
    const auto dash = text.find('-');
    if (dash == std::string::npos) throw Error("bad window: " + text);
    return {std::stod(text.substr(0, dash)), std::stod(text.substr(dash + 1))};
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct Segment {
    double start, end;  // seconds
    const Period* period;
};

std::vector<Segment> timeline(const TvcmConfig& cfg, int days) {
    std::vector<Segment> out;
    const double horizon = days * 86400.0;
    for (int d = -1; d <= days; ++d)
        for (const auto& p : cfg.periods)
            for (const auto& w : p.windows) {
                double a = (d * 24 + w.start_h) * 3600.0;
                double b = (w.end_h > w.start_h ? d * 24 + w.end_h : (d + 1) * 24 + w.end_h) * 3600.0;
                a = std::max(a, 0.0);
                b = std::min(b, horizon);
                if (b > a) out.push_back({a, b, &p});
            }
    std::sort(out.begin(), out.end(), [](const Segment& x, const Segment& y) { return x.start < y.start; });
    return out;
}

}  // namespace

unsigned parse_kinds(const std::string& text) {
    unsigned kinds = 0;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '+')) {
        part = trim(part);
        bool found = false;
        for (int i = 0; i < 4; ++i)
            if (part == kKindNames[i]) {
                kinds |= 1u << i;
                found = true;
            }
        if (!found) throw Error("unknown community kind: " + part);
    }
    if (!kinds) throw Error("empty community kind");
    return kinds;
}

std::string kinds_name(unsigned kinds) {
    std::string out;
    for (int i : {0, 1, 3, 2})
        if (kinds & (1u << i)) out += (out.empty() ? "" : "+") + std::string(kKindNames[i]);
    return out;
}

TvcmConfig TvcmConfig::campus() {
    TvcmConfig c;
    auto cell = [](unsigned kinds, int col, int row) {
        return Community{kinds, col * 100.0, row * 100.0, col * 100.0 + 100, row * 100.0 + 100};
    };
    for (int i = 0; i < 5; ++i) c.communities.push_back(cell(Home, 2 * i, 0));
    for (int i = 0; i < 5; ++i) c.communities.push_back(cell(Home, 2 * i + 1, 9));
    c.communities.push_back(cell(Work, 3, 3));
    c.communities.push_back(cell(Work, 6, 3));
    c.communities.push_back(cell(Work, 3, 6));
    c.communities.push_back(cell(Work, 6, 6));
    c.communities.push_back(cell(Food, 4, 2));
    c.communities.push_back(cell(Food, 5, 7));
    c.communities.push_back(cell(Recreation, 1, 5));
    c.communities.push_back(cell(Recreation | Food, 8, 5));
    c.periods = {
        {{{7, 9}, {19, 21}}, Recreation, 0.5},
        {{{9, 13}, {15, 17}}, Work, 0.9},
        {{{13, 15}}, Food, 0.33},
        {{{17, 19}}, Recreation, 0.5},
        {{{21, 7}}, Home, 0.9},
    };
    return c;
}

void TvcmConfig::validate() const {
    if (!(area_w > 0 && area_h > 0)) throw Error("area must be positive");
    if (nodes < 0) throw Error("nodes must be non-negative");
    if (!(contact_range >= 0)) throw Error("contact_range must be non-negative");
    if (!(epoch_length > 0)) throw Error("epoch_length must be positive");
    if (communities.empty()) throw Error("no communities");
    bool has_home = false;
    unsigned offered = 0;
    for (const auto& c : communities) {
        if (!(c.x0 >= 0 && c.y0 >= 0 && c.x1 <= area_w && c.y1 <= area_h && c.x0 < c.x1 && c.y0 < c.y1))
            throw Error("community outside the area");
        has_home = has_home || (c.kinds & Home);
        offered |= c.kinds;
    }
    if (!has_home) throw Error("no home community");
    std::vector<std::pair<double, double>> pieces;
    for (const auto& p : periods) {
        if (!(p.probability >= 0 && p.probability <= 1)) throw Error("period probability outside [0,1]");
        kind_index(p.kind);
        if (!(offered & p.kind)) throw Error("no community offers " + kinds_name(p.kind));
        for (const auto& w : p.windows) {
            if (!(w.start_h >= 0 && w.start_h < 24 && w.end_h >= 0 && w.end_h <= 24) || w.start_h == w.end_h)
                throw Error("bad period window");
            if (w.end_h > w.start_h) {
                pieces.emplace_back(w.start_h, w.end_h);
            } else {
                pieces.emplace_back(w.start_h, 24);
                if (w.end_h > 0) pieces.emplace_back(0, w.end_h);
            }
        }
    }
    std::sort(pieces.begin(), pieces.end());
    double at = 0;
    for (const auto& [a, b] : pieces) {
        if (a != at) throw Error("period windows do not tile the day");
        at = b;
    }
    if (at != 24) throw Error("period windows do not tile the day");
}

TvcmConfig parse_config(std::istream& in) {
    TvcmConfig c = TvcmConfig::campus();
    bool own_communities = false, own_periods = false;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("line " + std::to_string(n) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::istringstream v(trim(line.substr(eq + 1)));
        try {
            if (key == "area") {
                v >> c.area_w >> c.area_h;
            } else if (key == "nodes") {
                v >> c.nodes;
            } else if (key == "base_station") {
                std::string b;
                v >> b;
                c.base_station = parse_bool(b);
            } else if (key == "base_position") {
                v >> c.base_x >> c.base_y;
            } else if (key == "contact_range") {
                v >> c.contact_range;
            } else if (key == "epoch_length") {
                v >> c.epoch_length;
            } else if (key == "seed") {
                v >> c.seed;
            } else if (key == "community") {
                if (!own_communities) c.communities.clear();
                own_communities = true;
                std::string kinds;
                Community com;
                v >> kinds >> com.x0 >> com.y0 >> com.x1 >> com.y1;
                com.kinds = parse_kinds(kinds);
                c.communities.push_back(com);
            } else if (key == "period") {
                if (!own_periods) c.periods.clear();
                own_periods = true;
                std::string kind, w;
                Period p;
                v >> kind >> p.probability;
                p.kind = parse_kinds(kind);
                while (v >> w) p.windows.push_back(parse_window(w));
                v.clear();
                if (p.windows.empty()) throw Error("period without windows");
                c.periods.push_back(p);
            } else {
                throw Error("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw Error("line " + std::to_string(n) + ": bad number");
        } catch (const Error& e) {
            throw Error("line " + std::to_string(n) + ": " + e.what());
        }
        if (v.fail()) throw Error("line " + std::to_string(n) + ": bad value for " + key);
    }
    c.validate();
    return c;
}

TvcmConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_config(in);
}

void write_config(std::ostream& out, const TvcmConfig& c) {
    out << "area = " << c.area_w << ' ' << c.area_h << '\n'
        << "nodes = " << c.nodes << '\n'
        << "base_station = " << (c.base_station ? "true" : "false") << '\n';
    if (c.base_x >= 0) out << "base_position = " << c.base_x << ' ' << c.base_y << '\n';
    out << "contact_range = " << c.contact_range << '\n'
        << "epoch_length = " << c.epoch_length << '\n'
        << "seed = " << c.seed << '\n';
    for (const auto& com : c.communities)
        out << "community = " << kinds_name(com.kinds) << ' ' << com.x0 << ' ' << com.y0 << ' ' << com.x1 << ' '
            << com.y1 << '\n';
    for (const auto& p : c.periods) {
        out << "period = " << kinds_name(p.kind) << ' ' << p.probability;
        for (const auto& w : p.windows) out << ' ' << fmt(w.start_h) << '-' << fmt(w.end_h);
        out << '\n';
    }
}

TvcmOutput generate(const TvcmConfig& cfg, int days) {
    cfg.validate();
    if (days < 0) throw Error("days must be non-negative");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TvcmOutput out;
    std::vector<int> by_kind[4];
    for (int i = 0; i < static_cast<int>(cfg.communities.size()); ++i)
        for (int k = 0; k < 4; ++k)
            if (cfg.communities[static_cast<std::size_t>(i)].kinds & (1u << k)) by_kind[k].push_back(i);
    for (NodeId id = 1; id <= cfg.nodes; ++id) {
        NodePlan plan;
        plan.id = id;
        plan.home = by_kind[0][static_cast<std::size_t>(id - 1) % by_kind[0].size()];
        plan.favourite[0] = plan.home;
        for (int k = 1; k < 4; ++k)
            if (!by_kind[k].empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, by_kind[k].size() - 1);
                plan.favourite[k] = by_kind[k][pick(rng)];
            }
        out.plans.push_back(plan);
    }

    struct Pos {
        NodeId id;
        double x, y;
    };
    std::vector<Pos> pos;
    if (cfg.base_station) {
        double bx = cfg.base_x, by = cfg.base_y;
        if (bx < 0 || by < 0) {
            const Community* at = &cfg.communities.front();
            for (const auto& c : cfg.communities)
                if ((c.kinds & Food) && (c.kinds & Recreation)) {
                    at = &c;
                    break;
                }
            bx = (at->x0 + at->x1) / 2;
            by = (at->y0 + at->y1) / 2;
        }
        pos.push_back({0, bx, by});
    }
    const std::size_t mobile_from = pos.size();
    for (const auto& p : out.plans) pos.push_back({p.id, 0, 0});

    const double r2 = cfg.contact_range * cfg.contact_range;
    for (const Segment& seg : timeline(cfg, days)) {
        const int k = kind_index(seg.period->kind);
        std::map<NodePair, double> open;  // pair -> contact start
        for (double t = seg.start; t < seg.end; t += cfg.epoch_length) {
            const double t_end = std::min(seg.end, t + cfg.epoch_length);
            for (std::size_t i = 0; i < out.plans.size(); ++i) {
                const auto& plan = out.plans[i];
                int where = plan.home;
                if (unit(rng) < seg.period->probability && plan.favourite[k] >= 0) where = plan.favourite[k];
                const auto& c = cfg.communities[static_cast<std::size_t>(where)];
                pos[mobile_from + i].x = c.x0 + unit(rng) * (c.x1 - c.x0);
                pos[mobile_from + i].y = c.y0 + unit(rng) * (c.y1 - c.y0);
            }
            std::map<NodePair, double> still;
            for (std::size_t i = 0; i < pos.size(); ++i)
                for (std::size_t j = i + 1; j < pos.size(); ++j) {
                    const double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
                    if (dx * dx + dy * dy > r2) continue;
                    const NodePair pair(pos[i].id, pos[j].id);
                    auto it = open.find(pair);
                    still[pair] = it == open.end() ? t : it->second;
                }
            for (const auto& [pair, start] : open)
                if (!still.contains(pair)) out.contacts.push_back({pair.first, pair.second, start, t});
            open = std::move(still);
            if (t_end >= seg.end)
                for (const auto& [pair, start] : open) out.contacts.push_back({pair.first, pair.second, start, t_end});
        }
    }
    std::sort(out.contacts.begin(), out.contacts.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start, a.node_a, a.node_b) < std::tie(b.start, b.node_a, b.node_b);
    });
    out.trace = trace::ContactTrace::from_records(out.contacts);
    return out;
}

trace::ContactTrace generate_trace(const TvcmConfig& config, int days) {
    return generate(config, days).trace;
}

}  // namespace reaper::mobility
