#include "uavh/pathfinding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavh::path {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool overlaps(double a0, double a1, double b0, double b1) {
    // half-open intervals; boundary touching is not a conflict
    return a0 < b1 - kEps && b0 < a1 - kEps;
}

}  // namespace

OccupancyTable::OccupancyTable(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
}

double OccupancyTable::earliest_feasible(int interchange, double t, double duration,
                                         const std::vector<Interval>* forbidden) const {
    static const std::vector<Interval> kNone;
    const auto it = slots_.find(interchange);
    const std::vector<Interval>& existing = it == slots_.end() ? kNone : it->second;
    const std::vector<Interval>& banned = forbidden ? *forbidden : kNone;

    std::vector<double> candidates{t};
    for (const auto& iv : existing)
        if (iv.end > t) candidates.push_back(iv.end);
    for (const auto& iv : banned)
        if (iv.end > t) candidates.push_back(iv.end);
    std::sort(candidates.begin(), candidates.end());

    for (double s : candidates) {
        if (s < t) continue;
        const double e = s + duration;
        bool bad = false;
        for (const auto& iv : banned)
            if (overlaps(s, e, iv.start, iv.end)) { bad = true; break; }
        if (bad) continue;
        // the overlap count within [s, e) peaks at s or at an interior start
        std::vector<double> probes{s};
        for (const auto& iv : existing)
            if (iv.start > s && iv.start < e - kEps) probes.push_back(iv.start);
        for (double x : probes) {
            int count = 0;
            for (const auto& iv : existing)
                if (iv.start <= x + kEps && x < iv.end - kEps) ++count;
            if (count > capacity_ - 1) { bad = true; break; }
        }
        if (duration <= kEps) bad = false;  // empty window never collides
        if (!bad) return s;
    }
    // all reservations end eventually
    double last = t;
    for (const auto& iv : existing) last = std::max(last, iv.end);
    for (const auto& iv : banned) last = std::max(last, iv.end);
    return last;
}

void OccupancyTable::reserve(int interchange, double start, double duration) {
    if (duration < 0.0) throw std::invalid_argument("reservation length must be >= 0");
    if (duration <= kEps) return;
    slots_[interchange].push_back(Interval{start, start + duration});
}

int OccupancyTable::max_overlap(int interchange) const {
    const auto it = slots_.find(interchange);
    if (it == slots_.end()) return 0;
    std::vector<std::pair<double, int>> events;
    for (const auto& iv : it->second) {
        events.emplace_back(iv.start, +1);
        events.emplace_back(iv.end, -1);
    }
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return a.second < b.second;  // ends before starts at a tie
              });
    int cur = 0, best = 0;
    for (const auto& [x, d] : events) {
        cur += d;
        best = std::max(best, cur);
    }
    return best;
}

std::size_t OccupancyTable::total_reservations() const {
    std::size_t n = 0;
    for (const auto& [id, ivs] : slots_) n += ivs.size();
    return n;
}

std::string OccupancyTable::to_csv() const {
    std::ostringstream os;
    os << "interchange,start,end\n";
    char buf[96];
    for (const auto& [id, ivs] : slots_) {
        std::vector<Interval> sorted = ivs;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Interval& a, const Interval& b) { return a.start < b.start; });
        for (const auto& iv : sorted) {
            std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f", id, iv.start, iv.end);
            os << buf << "\n";
        }
    }
    return os.str();
}

namespace {

struct SearchEdge {
    int to;
    double time;
    double flight;
    bool transit;
    int interchange = -1;   // global id of the boarding interchange
    double duration = 0.0;  // reservation length (response time)
};

struct SearchGraph {
    std::vector<int> ids;  // [0] = start, [1] = goal, [2..] = interchanges
    std::vector<std::vector<SearchEdge>> adj;
    std::vector<double> h_time;    // admissible time-to-goal
    std::vector<double> h_flight;  // minimum flight-to-goal
};

SearchGraph build_search_graph(const net::TrafficNetwork& net, int from, int to) {
    SearchGraph g;
    g.ids = {from, to};
    std::map<int, int> local;
    local[from] = 0;
    local[to] = 1;
    for (int id : net.ids_of(net::NodeKind::Interchange)) {
        if (local.count(id)) continue;
        local[id] = static_cast<int>(g.ids.size());
        g.ids.push_back(id);
    }
    const int n = static_cast<int>(g.ids.size());
    g.adj.assign(n, {});
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) {
            if (u == v) continue;
            const double ft = net.flight_time(g.ids[u], g.ids[v]);
            g.adj[u].push_back(SearchEdge{v, ft, ft, false});
        }
    for (const auto& r : net.transit_routes()) {
        const auto iu = local.find(r.from);
        const auto iv = local.find(r.to);
        if (iu == local.end() || iv == local.end()) continue;
        g.adj[iu->second].push_back(SearchEdge{iv->second, net.ride_time(r), 0.0, true,
                                               r.from, net.response_time(r.from)});
    }

    // reverse Dijkstra for both admissible heuristics
    auto reverse_dijkstra = [&](auto edge_cost) {
        std::vector<std::vector<std::pair<int, double>>> rev(n);
        for (int u = 0; u < n; ++u)
            for (const auto& e : g.adj[u]) rev[e.to].emplace_back(u, edge_cost(e));
        std::vector<double> dist(n, kInf);
        dist[1] = 0.0;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        pq.emplace(0.0, 1);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u] + kEps) continue;
            for (const auto& [v, c] : rev[u])
                if (d + c < dist[v] - kEps) {
                    dist[v] = d + c;
                    pq.emplace(dist[v], v);
                }
        }
        return dist;
    };
    g.h_time = reverse_dijkstra([](const SearchEdge& e) { return e.time; });
    g.h_flight = reverse_dijkstra([](const SearchEdge& e) { return e.flight; });
    return g;
}

struct Label {
    int node;
    double time;    // absolute arrival time
    double flight;  // flight budget consumed so far
    int parent;
    Mode mode;
    double wait = 0.0;
    int res_interchange = -1;
    double res_start = 0.0;
    double res_duration = 0.0;
};

const OccupancyTable& unconstrained_table() {
    static const OccupancyTable table(std::numeric_limits<int>::max());
    return table;
}

}  // namespace

HalfResult search_half(const net::TrafficNetwork& net, int from, int to,
                       const SearchOptions& options) {
    HalfResult out;
    if (from == to) {
        out.ok = true;
        out.legs = {Leg{from, options.start_time, Mode::Flight}};
        return out;
    }

    const SearchGraph g = build_search_graph(net, from, to);
    const OccupancyTable& occ =
        options.occupancy ? *options.occupancy : unconstrained_table();
    const auto t_begin = std::chrono::steady_clock::now();

    std::vector<Label> arena;
    std::vector<char> dead;
    std::vector<std::vector<int>> frontier(g.ids.size());

    auto dominated = [&](int node, double time, double flight) {
        for (int idx : frontier[node]) {
            if (dead[idx]) continue;
            const Label& l = arena[idx];
            if (l.time <= time + kEps && l.flight <= flight + kEps) return true;
        }
        return false;
    };
    auto insert = [&](Label l) {
        const int idx = static_cast<int>(arena.size());
        if (options.prune_dominated) {
            for (int other : frontier[l.node]) {
                if (dead[other]) continue;
                const Label& o = arena[other];
                if (l.time <= o.time + kEps && l.flight <= o.flight + kEps)
                    dead[other] = 1;
            }
        }
        frontier[l.node].push_back(idx);
        arena.push_back(l);
        dead.push_back(0);
        return idx;
    };

    using Item = std::pair<double, int>;  // (f, label index)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    const int root = insert(Label{0, options.start_time, 0.0, -1, Mode::Flight});
    pq.emplace(g.h_time[0], root);

    int pops = 0;
    while (!pq.empty()) {
        const auto [f, idx] = pq.top();
        pq.pop();
        if (dead[idx]) continue;
        const Label cur = arena[idx];

        if (++pops % 256 == 0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin)
                    .count();
            if (elapsed > options.limits.compute_budget_secs) {
                out.reason = "compute budget exceeded";
                return out;
            }
        }
        if (static_cast<int>(arena.size()) > options.limits.label_cap) {
            out.reason = "label cap exceeded";
            return out;
        }

        if (cur.node == 1) {  // goal
            out.ok = true;
            out.time = cur.time - options.start_time;
            out.flight = cur.flight;
            std::vector<int> chain;
            for (int i = idx; i != -1; i = arena[i].parent) chain.push_back(i);
            std::reverse(chain.begin(), chain.end());
            for (int i : chain) {
                const Label& l = arena[i];
                out.legs.push_back(Leg{g.ids[l.node], l.time, l.mode, l.wait});
                if (l.wait > kEps) {
                    out.extra_wait += l.wait;
                    ++out.conflicts;
                }
                if (l.res_interchange >= 0 && l.res_duration > kEps)
                    out.reservations.push_back(
                        Reservation{l.res_interchange, l.res_start, l.res_duration});
            }
            return out;
        }

        for (const auto& e : g.adj[cur.node]) {
            const double nf = cur.flight + e.flight;
            if (nf > options.flight_budget + kEps) continue;
            if (nf + g.h_flight[e.to] > options.flight_budget + kEps) continue;

            Label next{e.to, 0.0, nf, idx, e.transit ? Mode::Transit : Mode::Flight};
            if (e.transit) {
                const std::vector<Interval>* forbidden = nullptr;
                if (options.constraints) {
                    const auto it = options.constraints->find(e.interchange);
                    if (it != options.constraints->end()) forbidden = &it->second;
                }
                const double s =
                    occ.earliest_feasible(e.interchange, cur.time, e.duration, forbidden);
                next.wait = s - cur.time;
                next.time = cur.time + next.wait + e.time;
                next.res_interchange = e.interchange;
                next.res_start = s;
                next.res_duration = e.duration;
            } else {
                next.time = cur.time + e.time;
            }
            if (options.prune_dominated && dominated(e.to, next.time, next.flight))
                continue;
            const int nidx = insert(next);
            pq.emplace(next.time - options.start_time + g.h_time[e.to], nidx);
        }
    }
    out.reason = "frontier exhausted";
    return out;
}

namespace {

PlannedPath stitch(const HalfResult& a, const HalfResult& b, double start_time) {
    PlannedPath p;
    p.start_time = start_time;
    p.legs = a.legs;
    p.legs.insert(p.legs.end(), b.legs.begin() + 1, b.legs.end());
    p.total_time = a.time + b.time;
    p.flight_first = a.flight;
    p.flight_second = b.flight;
    p.extra_wait = a.extra_wait + b.extra_wait;
    p.conflicts = a.conflicts + b.conflicts;
    p.reservations = a.reservations;
    p.reservations.insert(p.reservations.end(), b.reservations.begin(),
                          b.reservations.end());
    return p;
}

}  // namespace

PlanResult plan_direct(const net::TrafficNetwork& net, const alloc::Subtask& subtask,
                       double start_time) {
    const double budget = net.speeds().max_flight_time / 2.0;
    const double t1 = net.flight_time(subtask.start_depot, subtask.package);
    const double t2 = net.flight_time(subtask.package, subtask.end_depot);
    PlanResult res;
    if (t1 > budget + kEps) {
        res.reason = "outbound leg exceeds flight budget";
        return res;
    }
    if (t2 > budget + kEps) {
        res.reason = "return leg exceeds flight budget";
        return res;
    }
    res.ok = true;
    res.path.start_time = start_time;
    res.path.legs = {Leg{subtask.start_depot, start_time, Mode::Flight},
                     Leg{subtask.package, start_time + t1, Mode::Flight},
                     Leg{subtask.end_depot, start_time + t1 + t2, Mode::Flight}};
    res.path.total_time = t1 + t2;
    res.path.flight_first = t1;
    res.path.flight_second = t2;
    return res;
}

namespace {

// One half of Algorithm-3 style planning: direct flight or exactly one ride.
HalfResult single_hop_half(const net::TrafficNetwork& net, int from, int to,
                           double start_time, const OccupancyTable& occupancy) {
    const double budget = net.speeds().max_flight_time / 2.0;
    HalfResult best;
    best.reason = "no feasible option";
    double best_total = kInf;

    if (from == to) {
        best.ok = true;
        best.legs = {Leg{from, start_time, Mode::Flight}};
        return best;
    }

    const double direct = net.flight_time(from, to);
    if (direct <= budget + kEps) {
        best.ok = true;
        best.time = direct;
        best.flight = direct;
        best.legs = {Leg{from, start_time, Mode::Flight},
                     Leg{to, start_time + direct, Mode::Flight}};
        best_total = direct;
    }

    for (const auto& r : net.transit_routes()) {
        const double f1 = net.flight_time(from, r.from);
        const double f2 = net.flight_time(r.to, to);
        if (f1 + f2 > budget + kEps) continue;
        const double arrival = start_time + f1;
        const double wait = net.response_time(r.from);
        // a ride is acceptable only when the landing slot is free on arrival
        if (occupancy.earliest_feasible(r.from, arrival, wait) > arrival + kEps) continue;
        const double total = f1 + net.ride_time(r) + f2;
        if (total < best_total - kEps) {
            best_total = total;
            best.ok = true;
            best.time = total;
            best.flight = f1 + f2;
            best.extra_wait = 0.0;
            best.conflicts = 0;
            best.legs = {Leg{from, start_time, Mode::Flight},
                         Leg{r.from, arrival, Mode::Flight},
                         Leg{r.to, arrival + net.ride_time(r), Mode::Transit},
                         Leg{to, start_time + total, Mode::Flight}};
            best.reservations = {Reservation{r.from, arrival, wait}};
        }
    }
    return best;
}

}  // namespace

PlanResult plan_single_hop(const net::TrafficNetwork& net, const alloc::Subtask& subtask,
                           OccupancyTable& occupancy, double start_time) {
    PlanResult res;
    const HalfResult a =
        single_hop_half(net, subtask.start_depot, subtask.package, start_time, occupancy);
    if (!a.ok) {
        res.reason = "outbound: " + a.reason;
        return res;
    }
    const HalfResult b = single_hop_half(net, subtask.package, subtask.end_depot,
                                         start_time + a.time, occupancy);
    if (!b.ok) {
        res.reason = "return: " + b.reason;
        return res;
    }
    res.ok = true;
    res.path = stitch(a, b, start_time);
    for (const auto& r : res.path.reservations) occupancy.reserve(r);
    return res;
}

PlanResult plan_multi_hop_cabps(const net::TrafficNetwork& net,
                                const alloc::Subtask& subtask, OccupancyTable& occupancy,
                                double start_time, const SearchLimits& limits) {
    SearchOptions opt;
    opt.flight_budget = net.speeds().max_flight_time / 2.0;
    opt.start_time = start_time;
    opt.occupancy = &occupancy;
    opt.limits = limits;

    PlanResult res;
    const HalfResult a = search_half(net, subtask.start_depot, subtask.package, opt);
    if (!a.ok) {
        res.reason = "outbound: " + a.reason;
        return res;
    }
    opt.start_time = start_time + a.time;
    const HalfResult b = search_half(net, subtask.package, subtask.end_depot, opt);
    if (!b.ok) {
        res.reason = "return: " + b.reason;
        return res;
    }
    res.ok = true;
    res.path = stitch(a, b, start_time);
    // committed paths are never replanned; reservations become visible to
    // every later planning call sharing this table
    for (const auto& r : res.path.reservations) occupancy.reserve(r);
    return res;
}

namespace {

struct Conflict {
    bool found = false;
    int interchange = -1;
    int agent_a = -1, agent_b = -1;
    Interval iv_a{}, iv_b{};
};

Conflict find_conflict(const std::vector<PlannedPath>& paths, int capacity) {
    struct Entry {
        int agent;
        Interval iv;
    };
    std::map<int, std::vector<Entry>> by_interchange;
    for (int a = 0; a < static_cast<int>(paths.size()); ++a)
        for (const auto& r : paths[a].reservations)
            by_interchange[r.interchange].push_back(
                Entry{a, Interval{r.start, r.start + r.duration}});

    Conflict best;
    double best_time = kInf;
    for (const auto& [ic, entries] : by_interchange) {
        for (size_t i = 0; i < entries.size(); ++i) {
            // count simultaneous occupants at the start of entry i
            std::vector<const Entry*> active;
            for (size_t j = 0; j < entries.size(); ++j)
                if (entries[j].iv.start <= entries[i].iv.start + kEps &&
                    entries[i].iv.start < entries[j].iv.end - kEps)
                    active.push_back(&entries[j]);
            if (static_cast<int>(active.size()) > capacity &&
                entries[i].iv.start < best_time) {
                std::sort(active.begin(), active.end(),
                          [](const Entry* a, const Entry* b) {
                              return a->iv.start < b->iv.start;
                          });
                const Entry* a = active[active.size() - 2];
                const Entry* b = active[active.size() - 1];
                best_time = entries[i].iv.start;
                best.found = true;
                best.interchange = ic;
                best.agent_a = a->agent;
                best.iv_a = a->iv;
                best.agent_b = b->agent;
                best.iv_b = b->iv;
            }
        }
    }
    return best;
}

PlanResult cbs_low_level(const net::TrafficNetwork& net, const alloc::Subtask& subtask,
                         const ConstraintSet& constraints) {
    SearchOptions opt;
    opt.flight_budget = net.speeds().max_flight_time / 2.0;
    opt.start_time = 0.0;
    opt.constraints = &constraints;

    PlanResult res;
    const HalfResult a = search_half(net, subtask.start_depot, subtask.package, opt);
    if (!a.ok) {
        res.reason = a.reason;
        return res;
    }
    opt.start_time = a.time;
    const HalfResult b = search_half(net, subtask.package, subtask.end_depot, opt);
    if (!b.ok) {
        res.reason = b.reason;
        return res;
    }
    res.ok = true;
    res.path = stitch(a, b, 0.0);
    return res;
}

}  // namespace

CbsResult plan_cbs_reference(const net::TrafficNetwork& net,
                             const std::vector<alloc::Subtask>& subtasks, int capacity,
                             int node_expansion_cap) {
    const int n = static_cast<int>(subtasks.size());
    struct CtNode {
        std::vector<ConstraintSet> constraints;
        std::vector<PlannedPath> paths;
        double cost = 0.0;
    };

    CbsResult out;
    CtNode root;
    root.constraints.assign(n, {});
    for (int a = 0; a < n; ++a) {
        const PlanResult r = cbs_low_level(net, subtasks[a], root.constraints[a]);
        if (!r.ok) return out;  // instance infeasible for some agent alone
        root.paths.push_back(r.path);
        root.cost += r.path.total_time;
    }

    auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        return a > b;
    };
    std::vector<CtNode> nodes{std::move(root)};
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        decltype(cmp)>
        open(cmp);
    open.emplace(nodes[0].cost, 0);

    int expanded = 0;
    while (!open.empty()) {
        if (++expanded > node_expansion_cap) {
            out.timeout = true;
            return out;
        }
        const auto [cost, id] = open.top();
        open.pop();
        const CtNode node = nodes[id];

        const Conflict c = find_conflict(node.paths, capacity);
        if (!c.found) {
            out.ok = true;
            out.paths = node.paths;
            out.total_time = node.cost;
            return out;
        }
        const std::pair<int, Interval> branches[2] = {{c.agent_a, c.iv_b},
                                                      {c.agent_b, c.iv_a}};
        for (const auto& [agent, banned] : branches) {
            CtNode child = node;
            child.constraints[agent][c.interchange].push_back(banned);
            const PlanResult r = cbs_low_level(net, subtasks[agent], child.constraints[agent]);
            if (!r.ok) continue;
            child.cost += r.path.total_time - child.paths[agent].total_time;
            child.paths[agent] = r.path;
            nodes.push_back(std::move(child));
            open.emplace(nodes.back().cost, static_cast<int>(nodes.size()) - 1);
        }
    }
    return out;
}

std::string PlannedPath::to_json() const {
    nlohmann::json j;
    j["start_time"] = start_time;
    j["total_time"] = total_time;
    j["flight_first"] = flight_first;
    j["flight_second"] = flight_second;
    j["extra_wait"] = extra_wait;
    j["conflicts"] = conflicts;
    j["legs"] = nlohmann::json::array();
    for (const auto& l : legs)
        j["legs"].push_back({{"node", l.node},
                             {"arrival", l.arrival},
                             {"mode", l.mode == Mode::Transit ? "transit" : "flight"},
                             {"wait", l.wait}});
    return j.dump(2);
}

}  // namespace uavh::path
