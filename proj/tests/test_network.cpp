#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "uavh/network.hpp"

using namespace uavh::net;

namespace {

TrafficNetwork small_fixture() {
    // depot 0 at origin, package 1 far right, interchanges 2 -> 3 bridged by
    // one fast transit section
    std::vector<Node> nodes = {
        {0, NodeKind::Depot, 0.0, 0.0},
        {1, NodeKind::Package, 1000.0, 0.0},
        {2, NodeKind::Interchange, 100.0, 0.0},
        {3, NodeKind::Interchange, 900.0, 0.0},
    };
    std::vector<TransitRoute> routes = {{2, 3, 800.0, 10.0}};
    return TrafficNetwork(std::move(nodes), std::move(routes), SpeedModel{10.0, 80.0, 1e9});
}

}  // namespace

TEST_CASE("constructor validates topology") {
    CHECK_THROWS_AS(TrafficNetwork({{1, NodeKind::Depot, 0, 0}}, {}, {10, 8, 1e9}),
                    std::invalid_argument);
    CHECK_THROWS_AS(TrafficNetwork({{0, NodeKind::Depot, 0, 0}, {1, NodeKind::Package, 1, 1}},
                                   {{0, 1, 5.0, 1.0}}, {10, 8, 1e9}),
                    std::invalid_argument);  // route endpoints must be interchanges
    CHECK_THROWS_AS(TrafficNetwork({{0, NodeKind::Depot, 0, 0}}, {}, {0, 8, 1e9}),
                    std::invalid_argument);
}

TEST_CASE("distance and flight time") {
    auto net = small_fixture();
    CHECK(net.distance(0, 1) == doctest::Approx(1000.0));
    CHECK(net.flight_time(0, 1) == doctest::Approx(100.0));
    CHECK(net.distance(2, 3) == doctest::Approx(800.0));
}

TEST_CASE("shortest time path prefers the transit section when it wins") {
    auto net = small_fixture();
    // direct flight 0 -> 1: 100 s; fly to 2, ride to 3, fly to 1: 10 + 10 + 10 = 30 s
    auto r = net.shortest_time_path(0, 1);
    REQUIRE(r.reachable);
    CHECK(r.nodes == std::vector<int>{0, 2, 3, 1});
    CHECK(r.time == doctest::Approx(30.0));

    // a response wait at the boarding interchange shifts the balance
    net.set_response_time(2, 100.0);
    auto slow = net.shortest_time_path(0, 1);
    CHECK(slow.nodes == std::vector<int>{0, 1});
    CHECK(slow.time == doctest::Approx(100.0));
}

TEST_CASE("exhaustive check on every pair of a five-node network") {
    auto net = small_fixture();
    const int n = 4;
    // oracle: Floyd-Warshall over the same edge set, recomputed independently
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) d[i][j] = net.distance(i, j) / net.speeds().uav_speed;
    for (const auto& route : net.transit_routes())
        d[route.from][route.to] =
            std::min(d[route.from][route.to], net.ride_time(route));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(net.shortest_time_path(i, j).time == doctest::Approx(d[i][j]));
}

TEST_CASE("shortest times satisfy the triangle inequality") {
    auto net = generate_network({2, 4, 8, 20, 5000, 5000, {10.0, 10.0 / 1.3, 1e9}, 30.0}, 5);
    const int n = int(net.nodes().size());
    std::vector<std::vector<double>> t(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t[i][j] = net.shortest_time_path(i, j).time;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                CHECK(t[i][j] <= t[i][k] + t[k][j] + 1e-9);
    // flight time is never beaten by more than the transit system can offer,
    // and is always an upper bound
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) CHECK(t[i][j] <= net.flight_time(i, j) + 1e-9);
}

TEST_CASE("generator is deterministic and respects the config") {
    GeneratorConfig cfg{3, 5, 10, 30, 8000, 6000, {13.0, 10.0, 900.0}, 42.0};
    auto a = generate_network(cfg, 77);
    auto b = generate_network(cfg, 77);
    CHECK(a.to_json() == b.to_json());
    auto c = generate_network(cfg, 78);
    CHECK(a.to_json() != c.to_json());

    CHECK(int(a.ids_of(NodeKind::Depot).size()) == 3);
    CHECK(int(a.ids_of(NodeKind::Package).size()) == 5);
    CHECK(int(a.ids_of(NodeKind::Interchange).size()) == 10);
    CHECK(int(a.transit_routes().size()) == 30);
    for (const auto& n : a.nodes()) {
        CHECK(n.x >= 0.0);
        CHECK(n.x <= 8000.0);
        CHECK(n.y >= 0.0);
        CHECK(n.y <= 6000.0);
    }
    for (const auto& r : a.transit_routes()) {
        CHECK(a.node(r.from).kind == NodeKind::Interchange);
        CHECK(a.node(r.to).kind == NodeKind::Interchange);
        // street metric: rectilinear length, at least the straight-line distance
        CHECK(r.length >= a.distance(r.from, r.to) - 1e-9);
        CHECK(r.vehicle_time == doctest::Approx(r.length / 10.0));
    }
    for (int id : a.ids_of(NodeKind::Interchange)) CHECK(a.response_time(id) == 42.0);
}

TEST_CASE("route sets are nested when only the route count changes") {
    GeneratorConfig lo{2, 4, 8, 10, 5000, 5000, {10.0, 8.0, 1e9}, 0.0};
    GeneratorConfig hi = lo;
    hi.transit_routes = 30;
    auto a = generate_network(lo, 9), b = generate_network(hi, 9);
    for (size_t i = 0; i < a.nodes().size(); ++i) {
        CHECK(a.nodes()[i].x == b.nodes()[i].x);
        CHECK(a.nodes()[i].y == b.nodes()[i].y);
    }
    for (size_t i = 0; i < a.transit_routes().size(); ++i) {
        CHECK(a.transit_routes()[i].from == b.transit_routes()[i].from);
        CHECK(a.transit_routes()[i].to == b.transit_routes()[i].to);
    }
}

TEST_CASE("generator rejects infeasible configs") {
    CHECK_THROWS_AS(generate_network({0, 1, 1, 0, 100, 100, {10, 8, 1e9}, 0}, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_network({1, 1, 2, 3, 100, 100, {10, 8, 1e9}, 0}, 1),
                    std::invalid_argument);  // only 2 directed pairs exist
}

TEST_CASE("JSON round trip is stable") {
    auto net = generate_network({2, 3, 6, 12, 4000, 4000, {10.0, 8.0, 700.0}, 25.0}, 13);
    net.set_response_time(net.ids_of(NodeKind::Interchange)[0], 99.0);
    auto text = net.to_json();
    auto back = TrafficNetwork::from_json(text);
    CHECK(back.to_json() == text);
    CHECK(back.response_time(net.ids_of(NodeKind::Interchange)[0]) == 99.0);
    CHECK(back.speeds().max_flight_time == 700.0);
}

TEST_CASE("allocation subgraph covers depots then packages") {
    auto net = generate_network({2, 3, 5, 8, 4000, 4000, {10.0, 8.0, 1e9}, 10.0}, 3);
    auto g = net.allocation_subgraph();
    CHECK(g.depots() == 2);
    CHECK(g.size() == 5);
    for (int i = 0; i < g.size(); ++i) CHECK(g.w[i][i] == 0.0);
    std::vector<int> ids = g.depot_ids;
    ids.insert(ids.end(), g.package_ids.begin(), g.package_ids.end());
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j)
            if (i != j)
                CHECK(g.w[i][j] == doctest::Approx(net.shortest_time_path(ids[i], ids[j]).time));
}
