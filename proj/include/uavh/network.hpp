#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uavh::net {

enum class NodeKind { Depot, Package, Interchange };

struct Node {
    int id;
    NodeKind kind;
    double x, y;  // meters
};

// Directed road section between two interchange points, traversed while
// riding a vehicle. `length` is the stored route length (rectilinear street
// metric); `vehicle_time` = length / vehicle_speed.
struct TransitRoute {
    int from, to;
    double length;
    double vehicle_time;
};

struct SpeedModel {
    double uav_speed;       // m/s
    double vehicle_speed;   // m/s
    double max_flight_time; // T-bar, seconds of flight per subtask
};

struct PathResult {
    bool reachable = false;
    std::vector<int> nodes;  // empty when from == to
    double time = 0.0;
};

// Pairwise predicted passage times over depots and packages.
struct AllocationGraph {
    std::vector<int> depot_ids;
    std::vector<int> package_ids;
    // w[i][j]: row/col order is depots then packages
    std::vector<std::vector<double>> w;

    int size() const { return static_cast<int>(w.size()); }
    int depots() const { return static_cast<int>(depot_ids.size()); }
    std::string to_csv() const;
};

// Immutable after construction; flight connectivity is implicit and complete
// (straight-line flight between any node pair).
class TrafficNetwork {
  public:
    TrafficNetwork() = default;
    TrafficNetwork(std::vector<Node> nodes, std::vector<TransitRoute> routes,
                   SpeedModel speeds);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<TransitRoute>& transit_routes() const { return routes_; }
    const SpeedModel& speeds() const { return speeds_; }
    const Node& node(int id) const { return nodes_.at(id); }

    // Expected vehicle response time at an interchange (0 elsewhere).
    double response_time(int id) const { return response_times_.at(id); }
    void set_response_time(int id, double wait);
    void set_all_response_times(double wait);

    double distance(int u, int v) const;          // Euclidean
    double flight_time(int u, int v) const;       // distance / uav_speed
    // Ride time over a transit route: response wait at origin + drive time.
    double ride_time(const TransitRoute& r) const {
        return response_times_[r.from] + r.vehicle_time;
    }

    std::vector<int> ids_of(NodeKind kind) const;

    // Minimum-passage-time path ignoring energy and occupancy; used as the
    // A* heuristic and as the allocation-graph weight.
    PathResult shortest_time_path(int from, int to) const;

    AllocationGraph allocation_subgraph() const;

    std::string to_json() const;
    static TrafficNetwork from_json(const std::string& text);
    void save(const std::string& path) const;
    static TrafficNetwork load(const std::string& path);

  private:
    std::vector<Node> nodes_;
    std::vector<TransitRoute> routes_;
    SpeedModel speeds_{};
    std::vector<double> response_times_;
    std::vector<std::vector<int>> routes_out_;  // route indices by origin node
};

struct GeneratorConfig {
    int depots = 1;         // K
    int packages = 0;       // M
    int interchanges = 0;   // L'
    int transit_routes = 0; // L
    double width = 10000.0;   // meters
    double height = 10000.0;  // meters
    SpeedModel speeds{10.0, 10.0 / 1.3, 1e9};
    double response_time = 0.0;  // default W-bar per interchange
};

// Deterministic given seed; throws on infeasible configs.
TrafficNetwork generate_network(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace uavh::net
