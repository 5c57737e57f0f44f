#include "uavh/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavh::net {

namespace {

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Depot: return "depot";
        case NodeKind::Package: return "package";
        case NodeKind::Interchange: return "interchange";
    }
    return "?";
}

NodeKind kind_from(const std::string& s) {
    if (s == "depot") return NodeKind::Depot;
    if (s == "package") return NodeKind::Package;
    if (s == "interchange") return NodeKind::Interchange;
    throw std::invalid_argument("unknown node kind: " + s);
}

}  // namespace

TrafficNetwork::TrafficNetwork(std::vector<Node> nodes, std::vector<TransitRoute> routes,
                               SpeedModel speeds)
    : nodes_(std::move(nodes)), routes_(std::move(routes)), speeds_(speeds) {
    if (!(speeds_.uav_speed > 0 && speeds_.vehicle_speed > 0 && speeds_.max_flight_time > 0))
        throw std::invalid_argument("speeds must be positive");
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
        if (nodes_[i].id != i) throw std::invalid_argument("node ids must be 0..n-1 in order");
    response_times_.assign(nodes_.size(), 0.0);
    routes_out_.assign(nodes_.size(), {});
    for (int r = 0; r < static_cast<int>(routes_.size()); ++r) {
        const auto& route = routes_[r];
        if (nodes_.at(route.from).kind != NodeKind::Interchange ||
            nodes_.at(route.to).kind != NodeKind::Interchange)
            throw std::invalid_argument("transit route endpoints must be interchanges");
        if (!(route.length >= 0.0) || !(route.vehicle_time > 0.0))
            throw std::invalid_argument("transit route times must be positive");
        routes_out_[route.from].push_back(r);
    }
}

void TrafficNetwork::set_response_time(int id, double wait) {
    if (wait < 0.0) throw std::invalid_argument("response time must be >= 0");
    response_times_.at(id) = wait;
}

void TrafficNetwork::set_all_response_times(double wait) {
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::Interchange) set_response_time(n.id, wait);
}

double TrafficNetwork::distance(int u, int v) const {
    const Node& a = nodes_.at(u);
    const Node& b = nodes_.at(v);
    return std::hypot(a.x - b.x, a.y - b.y);
}

double TrafficNetwork::flight_time(int u, int v) const {
    return distance(u, v) / speeds_.uav_speed;
}

std::vector<int> TrafficNetwork::ids_of(NodeKind kind) const {
    std::vector<int> out;
    for (const auto& n : nodes_)
        if (n.kind == kind) out.push_back(n.id);
    return out;
}

PathResult TrafficNetwork::shortest_time_path(int from, int to) const {
    const int n = static_cast<int>(nodes_.size());
    if (from < 0 || from >= n || to < 0 || to >= n)
        throw std::invalid_argument("node id out of range");

    PathResult result;
    if (from == to) {
        result.reachable = true;
        return result;
    }

    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::vector<char> done(n, 0);
    dist[from] = 0.0;
    // complete flight connectivity makes the graph dense; O(n^2) scan
    for (;;) {
        int u = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            if (!done[i] && dist[i] < best) { best = dist[i]; u = i; }
        if (u < 0 || u == to) break;
        done[u] = 1;
        for (int v = 0; v < n; ++v) {
            if (v == u) continue;
            const double cand = dist[u] + flight_time(u, v);
            if (cand < dist[v]) { dist[v] = cand; parent[v] = u; }
        }
        for (int r : routes_out_[u]) {
            const auto& route = routes_[r];
            const double cand = dist[u] + ride_time(route);
            if (cand < dist[route.to]) { dist[route.to] = cand; parent[route.to] = u; }
        }
    }

    if (!std::isfinite(dist[to])) return result;  // cannot happen with flight edges
    result.reachable = true;
    result.time = dist[to];
    for (int v = to; v != -1; v = parent[v]) result.nodes.push_back(v);
    std::reverse(result.nodes.begin(), result.nodes.end());
    return result;
}

AllocationGraph TrafficNetwork::allocation_subgraph() const {
    AllocationGraph g;
    g.depot_ids = ids_of(NodeKind::Depot);
    g.package_ids = ids_of(NodeKind::Package);
    std::vector<int> ids = g.depot_ids;
    ids.insert(ids.end(), g.package_ids.begin(), g.package_ids.end());
    const int n = static_cast<int>(ids.size());
    g.w.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) g.w[i][j] = shortest_time_path(ids[i], ids[j]).time;
    return g;
}

std::string AllocationGraph::to_csv() const {
    std::ostringstream os;
    os << "from,to,time\n";
    std::vector<int> ids = depot_ids;
    ids.insert(ids.end(), package_ids.begin(), package_ids.end());
    char buf[64];
    for (size_t i = 0; i < ids.size(); ++i)
        for (size_t j = 0; j < ids.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.6f", ids[i], ids[j], w[i][j]);
            os << buf << "\n";
        }
    return os.str();
}

std::string TrafficNetwork::to_json() const {
    nlohmann::json j;
    j["speeds"] = {{"uav_speed", speeds_.uav_speed},
                   {"vehicle_speed", speeds_.vehicle_speed},
                   {"max_flight_time", speeds_.max_flight_time}};
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nlohmann::json jn = {{"id", n.id}, {"kind", kind_name(n.kind)},
                             {"x", n.x},   {"y", n.y}};
        if (n.kind == NodeKind::Interchange)
            jn["response_time"] = response_times_[n.id];
        j["nodes"].push_back(jn);
    }
    j["transit_routes"] = nlohmann::json::array();
    for (const auto& r : routes_)
        j["transit_routes"].push_back({{"from", r.from},
                                       {"to", r.to},
                                       {"length", r.length},
                                       {"vehicle_time", r.vehicle_time}});
    return j.dump(2);
}

TrafficNetwork TrafficNetwork::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SpeedModel speeds{j.at("speeds").at("uav_speed").get<double>(),
                      j.at("speeds").at("vehicle_speed").get<double>(),
                      j.at("speeds").at("max_flight_time").get<double>()};
    std::vector<Node> nodes;
    for (const auto& jn : j.at("nodes"))
        nodes.push_back(Node{jn.at("id").get<int>(), kind_from(jn.at("kind").get<std::string>()),
                             jn.at("x").get<double>(), jn.at("y").get<double>()});
    std::vector<TransitRoute> routes;
    for (const auto& jr : j.at("transit_routes"))
        routes.push_back(TransitRoute{jr.at("from").get<int>(), jr.at("to").get<int>(),
                                      jr.at("length").get<double>(),
                                      jr.at("vehicle_time").get<double>()});
    TrafficNetwork net(std::move(nodes), std::move(routes), speeds);
    for (const auto& jn : j.at("nodes"))
        if (jn.contains("response_time"))
            net.set_response_time(jn.at("id").get<int>(), jn.at("response_time").get<double>());
    return net;
}

void TrafficNetwork::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json() << "\n";
}

TrafficNetwork TrafficNetwork::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

TrafficNetwork generate_network(const GeneratorConfig& config, std::uint64_t seed) {
    if (config.depots < 1) throw std::invalid_argument("need at least one depot");
    if (config.packages < 0 || config.interchanges < 0 || config.transit_routes < 0)
        throw std::invalid_argument("counts must be nonnegative");
    const long long max_routes =
        static_cast<long long>(config.interchanges) * (config.interchanges - 1);
    if (config.transit_routes > max_routes)
        throw std::invalid_argument("more transit routes requested than distinct interchange pairs");

    // One independent stream per node category: growing one count (say,
    // depots) leaves every other category's draw unchanged, which gives
    // common random numbers across sweeps of K, M, L' or L.
    auto stream = [&](std::uint64_t tag) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return std::mt19937_64(x ^ (x >> 31));
    };
    std::uniform_real_distribution<double> ux(0.0, config.width);
    std::uniform_real_distribution<double> uy(0.0, config.height);

    std::vector<Node> nodes;
    auto add = [&](NodeKind kind, int count, std::uint64_t tag) {
        std::mt19937_64 rng = stream(tag);
        for (int i = 0; i < count; ++i) {
            const int id = static_cast<int>(nodes.size());
            const double x = ux(rng), y = uy(rng);
            nodes.push_back(Node{id, kind, x, y});
        }
    };
    add(NodeKind::Depot, config.depots, 1);
    add(NodeKind::Package, config.packages, 2);
    const int first_interchange = static_cast<int>(nodes.size());
    add(NodeKind::Interchange, config.interchanges, 3);

    // sample distinct directed interchange pairs
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < config.interchanges; ++i)
        for (int j = 0; j < config.interchanges; ++j)
            if (i != j) pairs.emplace_back(first_interchange + i, first_interchange + j);
    std::mt19937_64 route_rng = stream(4);
    std::shuffle(pairs.begin(), pairs.end(), route_rng);

    std::vector<TransitRoute> routes;
    for (int r = 0; r < config.transit_routes; ++r) {
        const auto [u, v] = pairs[r];
        // stored route length uses the rectilinear street metric
        const double len = std::abs(nodes[u].x - nodes[v].x) + std::abs(nodes[u].y - nodes[v].y);
        routes.push_back(TransitRoute{u, v, len, len / config.speeds.vehicle_speed});
    }

    TrafficNetwork net(std::move(nodes), std::move(routes), config.speeds);
    net.set_all_response_times(config.response_time);
    return net;
}

}  // namespace uavh::net
