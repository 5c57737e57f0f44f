#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavh/allocation.hpp"
#include "uavh/network.hpp"

namespace uavh::path {

enum class Mode { Flight, Transit };

struct Leg {
    int node;        // traffic-network node id
    double arrival;  // absolute time
    Mode mode;       // mode of the edge used to arrive (first leg: Flight)
    double wait = 0.0;  // conflict-induced waiting spent before this leg
};

struct Interval {
    double start, end;  // half-open [start, end)
};

struct Reservation {
    int interchange;
    double start, duration;
};

// Shared conflict-avoidance state: per-interchange reserved landing windows,
// at most `capacity` overlapping at any instant.
class OccupancyTable {
  public:
    explicit OccupancyTable(int capacity = 1);

    int capacity() const { return capacity_; }

    // Earliest s >= t such that placing [s, s + duration) keeps the overlap
    // within capacity and avoids every interval in `forbidden` (if given).
    double earliest_feasible(int interchange, double t, double duration,
                             const std::vector<Interval>* forbidden = nullptr) const;

    void reserve(int interchange, double start, double duration);
    void reserve(const Reservation& r) { reserve(r.interchange, r.start, r.duration); }

    int max_overlap(int interchange) const;
    const std::map<int, std::vector<Interval>>& reservations() const { return slots_; }
    std::size_t total_reservations() const;

    std::string to_csv() const;  // interchange,start,end

  private:
    int capacity_;
    std::map<int, std::vector<Interval>> slots_;
};

struct PlannedPath {
    std::vector<Leg> legs;
    double start_time = 0.0;
    double total_time = 0.0;     // passage time including waits
    double flight_first = 0.0;   // flight consumed on d -> g
    double flight_second = 0.0;  // flight consumed on g -> d'
    double extra_wait = 0.0;
    int conflicts = 0;  // legs that required waiting
    std::vector<Reservation> reservations;

    std::string to_json() const;
};

struct PlanResult {
    bool ok = false;
    PlannedPath path;
    std::string reason;
};

struct SearchLimits {
    double compute_budget_secs = 300.0;
    int label_cap = 100000;
};

// CBS constraint set: forbidden occupancy intervals per interchange.
using ConstraintSet = std::map<int, std::vector<Interval>>;

struct SearchOptions {
    double flight_budget = 0.0;  // per half-subtask, T-bar / 2
    double start_time = 0.0;
    const OccupancyTable* occupancy = nullptr;
    const ConstraintSet* constraints = nullptr;
    SearchLimits limits;
    bool prune_dominated = true;  // differential-testing hook
};

struct HalfResult {
    bool ok = false;
    std::string reason;
    std::vector<Leg> legs;  // starts with the departure node
    double time = 0.0;      // arrival - start_time
    double flight = 0.0;
    double extra_wait = 0.0;
    int conflicts = 0;
    std::vector<Reservation> reservations;
};

// Time-and-energy constrained A* over the search graph of Definition-style
// construction: departure, endpoint, and all interchanges; flight edges
// between every pair, transit edges on top of designated routes.
HalfResult search_half(const net::TrafficNetwork& net, int from, int to,
                       const SearchOptions& options);

// Straight-line flight d -> g -> d'; fails when either leg exceeds T-bar/2.
PlanResult plan_direct(const net::TrafficNetwork& net, const alloc::Subtask& subtask,
                       double start_time = 0.0);

// At most one ride per half-subtask; linear scan over transit sections.
// Commits reservations into `occupancy` on success.
PlanResult plan_single_hop(const net::TrafficNetwork& net, const alloc::Subtask& subtask,
                           OccupancyTable& occupancy, double start_time = 0.0);

// Multi-hop conflict-avoidance planner; commits reservations on success and
// never replans previously committed paths.
PlanResult plan_multi_hop_cabps(const net::TrafficNetwork& net,
                                const alloc::Subtask& subtask, OccupancyTable& occupancy,
                                double start_time = 0.0,
                                const SearchLimits& limits = {});

struct CbsResult {
    bool ok = false;
    bool timeout = false;
    std::vector<PlannedPath> paths;
    double total_time = 0.0;
};

// Conflict-based search reference oracle: jointly optimal conflict-free paths
// for a small set of subtasks (all starting at time 0).
CbsResult plan_cbs_reference(const net::TrafficNetwork& net,
                             const std::vector<alloc::Subtask>& subtasks, int capacity,
                             int node_expansion_cap = 20000);

}  // namespace uavh::path
