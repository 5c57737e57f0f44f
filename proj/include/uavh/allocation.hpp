#pragma once

#include <string>
#include <vector>

#include "uavh/network.hpp"

namespace uavh::alloc {

// Integral circulation over the allocation graph. Indices are positions in
// the AllocationGraph order (depots first, then packages).
struct CirculationSolution {
    int depots = 0;
    int size = 0;
    // x[u][v]: usage count of directed edge (u, v)
    std::vector<std::vector<int>> x;
    double cost = 0.0;
};

struct Subtask {
    int start_depot;  // node ids in the traffic network
    int package;
    int end_depot;
};

struct AllocationPlan {
    std::vector<std::vector<Subtask>> orders;  // one sequence per UAV
    std::vector<double> predicted_times;
    double tour_weight = 0.0;  // |T|, includes merge edges
    int merges = 0;            // a, number of component merges
    std::string to_json() const;
    std::string predicted_times_csv() const;
};

// Optimal integral circulation for the minimum-connecting-tours relaxation:
// each package enters and leaves exactly once, depots are balanced,
// depot-depot edges are uncapacitated.
CirculationSolution solve_mcc(const net::AllocationGraph& graph);

// Repeatedly joins the two components connected by the cheapest depot-depot
// round trip until one component remains. Returns the directed edge multiset
// of the connected, degree-balanced graph.
std::vector<std::pair<int, int>> merge_components(const CirculationSolution& solution,
                                                  const net::AllocationGraph& graph,
                                                  int* merges = nullptr,
                                                  double* added_weight = nullptr);

// Eulerian circuit over a connected balanced edge multiset, rotated to start
// at the lowest-id depot. Returns the node sequence (first == last).
std::vector<int> extract_tour(const std::vector<std::pair<int, int>>& edges,
                              const net::AllocationGraph& graph);

// Splits the grand tour into per-UAV subtask sequences, cutting only at
// depot visits.
AllocationPlan split_tour(const std::vector<int>& tour, const net::AllocationGraph& graph,
                          int n_uavs);

// Full Layer-1 pipeline. Handles the empty-package case.
AllocationPlan allocate(const net::AllocationGraph& graph, int n_uavs);

}  // namespace uavh::alloc
