#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "uavh/pathfinding.hpp"

using namespace uavh;
using path::Interval;
using path::OccupancyTable;

namespace {

// Depot(0) -- package(1) corridor bridged by three interchanges (2,3,4) and
// bidirectional transit sections. Direct flight is 200 s each way; the
// per-half budget of 75 s forces at least two rides.
net::TrafficNetwork corridor() {
    std::vector<net::Node> nodes = {
        {0, net::NodeKind::Depot, 0.0, 0.0},
        {1, net::NodeKind::Package, 2000.0, 0.0},
        {2, net::NodeKind::Interchange, 100.0, 0.0},
        {3, net::NodeKind::Interchange, 950.0, 0.0},
        {4, net::NodeKind::Interchange, 1900.0, 0.0},
    };
    std::vector<net::TransitRoute> routes;
    auto link = [&](int a, int b) {
        const double len = std::abs(nodes[a].x - nodes[b].x);
        routes.push_back({a, b, len, len / 5.0});
        routes.push_back({b, a, len, len / 5.0});
    };
    link(2, 3);
    link(3, 4);
    net::TrafficNetwork net(std::move(nodes), std::move(routes),
                            net::SpeedModel{10.0, 5.0, 150.0});
    net.set_all_response_times(30.0);
    return net;
}

}  // namespace

TEST_CASE("occupancy table places requests at the earliest free slot") {
    OccupancyTable occ(1);
    CHECK_THROWS_AS(OccupancyTable(0), std::invalid_argument);
    CHECK(occ.earliest_feasible(5, 10.0, 3.0) == 10.0);
    occ.reserve(5, 10.0, 3.0);
    CHECK(occ.earliest_feasible(5, 10.0, 3.0) == 13.0);  // shifted past the block
    CHECK(occ.earliest_feasible(5, 13.0, 3.0) == 13.0);  // boundary touch is fine
    CHECK(occ.earliest_feasible(5, 0.0, 11.0) == 13.0);  // cannot fit before
    CHECK(occ.earliest_feasible(5, 5.0, 5.0) == 5.0);    // exactly ends at 10
    CHECK(occ.earliest_feasible(7, 10.0, 3.0) == 10.0);  // other interchange free
    CHECK(occ.earliest_feasible(5, 11.0, 0.0) == 11.0);  // empty window never collides
    CHECK(occ.max_overlap(5) == 1);
}

TEST_CASE("capacity two admits one concurrent reservation") {
    OccupancyTable occ(2);
    occ.reserve(1, 0.0, 10.0);
    CHECK(occ.earliest_feasible(1, 0.0, 10.0) == 0.0);
    occ.reserve(1, 0.0, 10.0);
    CHECK(occ.earliest_feasible(1, 0.0, 10.0) == 10.0);
    occ.reserve(1, 10.0, 5.0);
    CHECK(occ.max_overlap(1) == 2);
}

TEST_CASE("forbidden intervals are avoided even when capacity allows") {
    OccupancyTable occ(1);
    std::vector<Interval> banned = {{5.0, 20.0}};
    CHECK(occ.earliest_feasible(3, 0.0, 10.0, &banned) == 20.0);
    CHECK(occ.earliest_feasible(3, 0.0, 5.0, &banned) == 0.0);
    CHECK(occ.earliest_feasible(3, 25.0, 10.0, &banned) == 25.0);
}

TEST_CASE("random reservation sweep never exceeds capacity") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ut(0.0, 100.0), ud(1.0, 20.0);
    for (int cap = 1; cap <= 3; ++cap) {
        OccupancyTable occ(cap);
        for (int i = 0; i < 200; ++i) {
            const int ic = int(rng() % 4);
            const double t = ut(rng), d = ud(rng);
            const double s = occ.earliest_feasible(ic, t, d);
            CHECK(s >= t);
            occ.reserve(ic, s, d);
        }
        for (int ic = 0; ic < 4; ++ic) CHECK(occ.max_overlap(ic) <= cap);
        CHECK(occ.total_reservations() == 200);
    }
}

TEST_CASE("occupancy CSV is sorted per interchange") {
    OccupancyTable occ(2);
    occ.reserve(2, 30.0, 5.0);
    occ.reserve(2, 10.0, 5.0);
    occ.reserve(1, 0.0, 2.0);
    CHECK(occ.to_csv() ==
          "interchange,start,end\n"
          "1,0.000000,2.000000\n"
          "2,10.000000,15.000000\n"
          "2,30.000000,35.000000\n");
}

TEST_CASE("half search equals exhaustive path enumeration on small graphs") {
    std::mt19937_64 rng(41);
    for (int it = 0; it < 100; ++it) {
        const int interchanges = 2 + int(rng() % 5);  // search graph <= 8 nodes
        const int max_routes = interchanges * (interchanges - 1);
        net::GeneratorConfig cfg{1, 1, interchanges,
                                 1 + int(rng() % max_routes),
                                 3000, 3000, {10.0, 6.0, 1e9}, 10.0 + double(rng() % 40)};
        auto net = net::generate_network(cfg, 1000 + it);
        // budget between "direct barely fits" and "nothing fits"
        const double direct = net.flight_time(0, 1);
        std::uniform_real_distribution<double> ub(0.3 * direct, 1.5 * direct);
        const double budget = ub(rng);

        path::SearchOptions opt;
        opt.flight_budget = budget;
        auto got = path::search_half(net, 0, 1, opt);
        auto want = test_oracles::brute_best_path(net, 0, 1, budget);
        REQUIRE(got.ok == want.ok);
        if (got.ok) {
            CHECK(got.time == doctest::Approx(want.time).epsilon(1e-9));
            CHECK(got.flight <= budget + 1e-9);
            CHECK(got.extra_wait == 0.0);  // nothing else is flying
        }
    }
}

TEST_CASE("disabling dominance pruning does not change the optimum") {
    for (int it = 0; it < 10; ++it) {
        auto net = net::generate_network({1, 1, 4, 8, 3000, 3000, {10.0, 6.0, 1e9}, 25.0},
                                         7000 + it);
        path::SearchOptions fast, slow;
        fast.flight_budget = slow.flight_budget = 0.8 * net.flight_time(0, 1);
        slow.prune_dominated = false;
        auto a = path::search_half(net, 0, 1, fast);
        auto b = path::search_half(net, 0, 1, slow);
        REQUIRE(a.ok == b.ok);
        if (a.ok) CHECK(a.time == doctest::Approx(b.time).epsilon(1e-9));
    }
}

TEST_CASE("search respects the compute and label limits") {
    auto net = corridor();
    path::SearchOptions opt;
    opt.flight_budget = 75.0;
    opt.limits.label_cap = 2;
    auto r = path::search_half(net, 0, 1, opt);
    CHECK_FALSE(r.ok);
    CHECK(r.reason == "label cap exceeded");
}

TEST_CASE("direct planning applies the per-half budget") {
    auto net = corridor();
    alloc::Subtask st{0, 1, 0};
    auto r = path::plan_direct(net, st);
    CHECK_FALSE(r.ok);  // 200 s of flight > 75 s per half

    std::vector<net::Node> nodes = {{0, net::NodeKind::Depot, 0.0, 0.0},
                                    {1, net::NodeKind::Package, 500.0, 0.0}};
    net::TrafficNetwork tiny(std::move(nodes), {}, {10.0, 5.0, 150.0});
    auto ok = path::plan_direct(tiny, {0, 1, 0}, 7.0);
    REQUIRE(ok.ok);
    CHECK(ok.path.total_time == doctest::Approx(100.0));
    CHECK(ok.path.flight_first == doctest::Approx(50.0));
    CHECK(ok.path.flight_second == doctest::Approx(50.0));
    CHECK(ok.path.start_time == 7.0);
    CHECK(ok.path.legs.back().arrival == doctest::Approx(107.0));
}

TEST_CASE("single-hop planning allows at most one ride per half") {
    auto net = corridor();
    path::OccupancyTable occ(1);
    // one ride cannot bridge the corridor within budget
    auto r = path::plan_single_hop(net, {0, 1, 0}, occ);
    CHECK_FALSE(r.ok);
    CHECK(occ.total_reservations() == 0);  // failures must not reserve

    // shrink the span so one ride suffices: fly 10 s, ride 2 -> 3, fly to a
    // package at 1050 (10 s flight)
    std::vector<net::Node> nodes = {
        {0, net::NodeKind::Depot, 0.0, 0.0},
        {1, net::NodeKind::Package, 1050.0, 0.0},
        {2, net::NodeKind::Interchange, 100.0, 0.0},
        {3, net::NodeKind::Interchange, 950.0, 0.0},
    };
    std::vector<net::TransitRoute> routes = {{2, 3, 850.0, 170.0}, {3, 2, 850.0, 170.0}};
    net::TrafficNetwork small(std::move(nodes), std::move(routes), {10.0, 5.0, 150.0});
    small.set_all_response_times(30.0);

    path::OccupancyTable occ2(1);
    auto ok = path::plan_single_hop(small, {0, 1, 0}, occ2);
    REQUIRE(ok.ok);
    // out: 10 + (30 + 170) + 10 = 220; back the same
    CHECK(ok.path.total_time == doctest::Approx(440.0));
    CHECK(ok.path.flight_first == doctest::Approx(20.0));
    CHECK(ok.path.reservations.size() == 2);
    CHECK(occ2.total_reservations() == 2);

    // a UAV already owning the outbound slot forces the follower to fly
    // direct (105 s of flight fits the 75 s budget? no: it does not), so the
    // follower must fail outbound
    auto blocked = path::plan_single_hop(small, {0, 1, 0}, occ2);
    CHECK_FALSE(blocked.ok);
}

TEST_CASE("multi-hop planning chains rides and commits reservations") {
    auto net = corridor();
    path::OccupancyTable occ(1);
    auto r = path::plan_multi_hop_cabps(net, {0, 1, 0}, occ);
    REQUIRE(r.ok);
    CHECK(r.path.flight_first <= 75.0 + 1e-9);
    CHECK(r.path.flight_second <= 75.0 + 1e-9);
    CHECK(r.path.extra_wait == 0.0);
    // out: fly 10 + (30+170) + (30+190) + fly 10 = 440; return mirrors it
    CHECK(r.path.total_time == doctest::Approx(880.0));
    CHECK(occ.total_reservations() == 4);

    // an identical follower collides at every boarding point and must wait
    auto follower = path::plan_multi_hop_cabps(net, {0, 1, 0}, occ);
    REQUIRE(follower.ok);
    CHECK(follower.path.conflicts > 0);
    CHECK(follower.path.extra_wait > 0.0);
    CHECK(follower.path.total_time >= r.path.total_time - 1e-9);
    // committed plans are untouched by later planning
    CHECK(r.path.total_time == doctest::Approx(880.0));
}

TEST_CASE("conflict-based reference finds conflict-free joint plans") {
    auto net = corridor();
    std::vector<alloc::Subtask> agents = {{0, 1, 0}, {0, 1, 0}};
    auto cbs = path::plan_cbs_reference(net, agents, 1);
    REQUIRE(cbs.ok);
    REQUIRE(cbs.paths.size() == 2);

    // replay all reservations: capacity must hold jointly
    path::OccupancyTable replay(1);
    for (const auto& p : cbs.paths)
        for (const auto& res : p.reservations) replay.reserve(res);
    for (const auto& [ic, ivs] : replay.reservations()) CHECK(replay.max_overlap(ic) <= 1);

    // sequential planning with commitments is never better than the joint
    // optimum, and exceeds it by at most (conflicts) x max response time
    path::OccupancyTable occ(1);
    double quasi = 0.0;
    int conflicts = 0;
    for (const auto& a : agents) {
        auto r = path::plan_multi_hop_cabps(net, a, occ);
        REQUIRE(r.ok);
        quasi += r.path.total_time;
        conflicts += r.path.conflicts;
    }
    CHECK(cbs.total_time <= quasi + 1e-6);
    CHECK(quasi <= cbs.total_time + conflicts * 30.0 + 1e-6);
}

TEST_CASE("planned paths serialize with legs and modes") {
    auto net = corridor();
    path::OccupancyTable occ(1);
    auto r = path::plan_multi_hop_cabps(net, {0, 1, 0}, occ);
    REQUIRE(r.ok);
    auto j = r.path.to_json();
    CHECK(j.find("\"transit\"") != std::string::npos);
    CHECK(j.find("\"flight\"") != std::string::npos);
    CHECK(j.find("\"total_time\"") != std::string::npos);
}
