#include "uavh/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavh::alloc {

namespace {

// Small successive-shortest-path min-cost max-flow with potentials.
class MinCostFlow {
  public:
    explicit MinCostFlow(int n) : head_(n, -1), n_(n) {}

    int add_edge(int u, int v, int cap, double cost) {
        const int id = static_cast<int>(to_.size());
        to_.push_back(v); cap_.push_back(cap); cost_.push_back(cost);
        next_.push_back(head_[u]); head_[u] = id;
        to_.push_back(u); cap_.push_back(0); cost_.push_back(-cost);
        next_.push_back(head_[v]); head_[v] = id + 1;
        return id;
    }

    int flow_on(int edge_id) const { return cap_[edge_id ^ 1]; }

    // Returns (flow, cost). Costs must be nonnegative on the input arcs.
    std::pair<int, double> solve(int s, int t) {
        int total_flow = 0;
        double total_cost = 0.0;
        std::vector<double> pot(n_, 0.0);
        for (;;) {
            std::vector<double> dist(n_, std::numeric_limits<double>::infinity());
            std::vector<int> pre(n_, -1);
            using Item = std::pair<double, int>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
            dist[s] = 0.0;
            pq.emplace(0.0, s);
            while (!pq.empty()) {
                auto [d, u] = pq.top(); pq.pop();
                if (d > dist[u] + 1e-12) continue;
                for (int e = head_[u]; e != -1; e = next_[e]) {
                    if (cap_[e] <= 0) continue;
                    const int v = to_[e];
                    const double nd = d + cost_[e] + pot[u] - pot[v];
                    if (nd + 1e-12 < dist[v]) {
                        dist[v] = nd; pre[v] = e;
                        pq.emplace(nd, v);
                    }
                }
            }
            if (pre[t] == -1) break;
            for (int i = 0; i < n_; ++i)
                if (std::isfinite(dist[i])) pot[i] += dist[i];
            int push = std::numeric_limits<int>::max();
            for (int v = t; v != s;) {
                const int e = pre[v];
                push = std::min(push, cap_[e]);
                v = to_[e ^ 1];
            }
            for (int v = t; v != s;) {
                const int e = pre[v];
                cap_[e] -= push; cap_[e ^ 1] += push;
                total_cost += push * cost_[e];
                v = to_[e ^ 1];
            }
            total_flow += push;
        }
        return {total_flow, total_cost};
    }

  private:
    std::vector<int> head_, next_, to_, cap_;
    std::vector<double> cost_;
    int n_;
};

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

CirculationSolution solve_mcc(const net::AllocationGraph& graph) {
    const int k = graph.depots();
    const int m = graph.size() - k;
    if (k < 1 || m < 1) throw std::invalid_argument("need K >= 1 and M >= 1");

    // Node layout: depots [0, k), package-in [k, k+m), package-out [k+m, k+2m),
    // then super source/sink for the unit lower bounds on package throughput.
    const int s = k + 2 * m, t = s + 1;
    MinCostFlow mcf(t + 1);

    std::vector<std::vector<int>> in_edge(k, std::vector<int>(m));
    std::vector<std::vector<int>> out_edge(m, std::vector<int>(k));
    std::vector<std::vector<int>> dd_edge(k, std::vector<int>(k, -1));
    for (int d = 0; d < k; ++d)
        for (int g = 0; g < m; ++g) {
            in_edge[d][g] = mcf.add_edge(d, k + g, 1, graph.w[d][k + g]);
            out_edge[g][d] = mcf.add_edge(k + m + g, d, 1, graph.w[k + g][d]);
        }
    for (int d = 0; d < k; ++d)
        for (int d2 = 0; d2 < k; ++d2)
            if (d != d2) dd_edge[d][d2] = mcf.add_edge(d, d2, k + m, graph.w[d][d2]);
    for (int g = 0; g < m; ++g) {
        mcf.add_edge(s, k + m + g, 1, 0.0);  // forced unit through each package
        mcf.add_edge(k + g, t, 1, 0.0);
    }

    auto [flow, cost] = mcf.solve(s, t);
    if (flow != m) throw std::runtime_error("circulation infeasible");  // cannot happen

    CirculationSolution sol;
    sol.depots = k;
    sol.size = k + m;
    sol.cost = cost;
    sol.x.assign(k + m, std::vector<int>(k + m, 0));
    for (int d = 0; d < k; ++d)
        for (int g = 0; g < m; ++g) {
            sol.x[d][k + g] = mcf.flow_on(in_edge[d][g]);
            sol.x[k + g][d] = mcf.flow_on(out_edge[g][d]);
        }
    for (int d = 0; d < k; ++d)
        for (int d2 = 0; d2 < k; ++d2)
            if (d != d2) sol.x[d][d2] = mcf.flow_on(dd_edge[d][d2]);
    return sol;
}

std::vector<std::pair<int, int>> merge_components(const CirculationSolution& solution,
                                                  const net::AllocationGraph& graph,
                                                  int* merges, double* added_weight) {
    const int n = solution.size;
    const int k = solution.depots;
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            for (int c = 0; c < solution.x[u][v]; ++c) edges.emplace_back(u, v);

    Dsu dsu(n);
    std::vector<char> active(n, 0);
    for (const auto& [u, v] : edges) {
        dsu.join(u, v);
        active[u] = active[v] = 1;
    }

    int merge_count = 0;
    double weight = 0.0;
    for (;;) {
        // distinct active component roots
        std::vector<int> roots;
        for (int i = 0; i < n; ++i)
            if (active[i] && dsu.find(i) == i) roots.push_back(i);
        if (roots.size() <= 1) break;

        int best_d = -1, best_d2 = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int d = 0; d < k; ++d) {
            if (!active[d]) continue;
            for (int d2 = 0; d2 < k; ++d2) {
                if (!active[d2] || dsu.find(d) == dsu.find(d2)) continue;
                const double cand = graph.w[d][d2] + graph.w[d2][d];
                if (cand < best - 1e-12) { best = cand; best_d = d; best_d2 = d2; }
            }
        }
        if (best_d < 0) throw std::runtime_error("component without a depot");
        edges.emplace_back(best_d, best_d2);
        edges.emplace_back(best_d2, best_d);
        dsu.join(best_d, best_d2);
        ++merge_count;
        weight += best;
    }
    if (merges) *merges = merge_count;
    if (added_weight) *added_weight = weight;
    return edges;
}

std::vector<int> extract_tour(const std::vector<std::pair<int, int>>& edges,
                              const net::AllocationGraph& graph) {
    if (edges.empty()) return {};
    const int n = graph.size();
    std::vector<int> indeg(n, 0), outdeg(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        ++outdeg[u];
        ++indeg[v];
    }
    for (int i = 0; i < n; ++i) {
        if (indeg[i] != outdeg[i]) throw std::runtime_error("unbalanced edge multiset");
        std::sort(adj[i].begin(), adj[i].end());  // deterministic traversal
    }

    int start = -1;
    for (int d = 0; d < graph.depots(); ++d)
        if (outdeg[d] > 0) { start = d; break; }
    if (start < 0) throw std::runtime_error("no depot in tour");

    // Hierholzer
    std::vector<size_t> next(n, 0);
    std::vector<int> stack{start}, circuit;
    while (!stack.empty()) {
        const int u = stack.back();
        if (next[u] < adj[u].size()) {
            stack.push_back(adj[u][next[u]++]);
        } else {
            circuit.push_back(u);
            stack.pop_back();
        }
    }
    std::reverse(circuit.begin(), circuit.end());
    if (circuit.size() != edges.size() + 1)
        throw std::runtime_error("edge multiset is not connected");
    return circuit;
}

AllocationPlan split_tour(const std::vector<int>& tour, const net::AllocationGraph& graph,
                          int n_uavs) {
    if (n_uavs < 1) throw std::invalid_argument("need at least one UAV");
    AllocationPlan plan;
    plan.orders.assign(n_uavs, {});
    plan.predicted_times.assign(n_uavs, 0.0);
    if (tour.empty()) return plan;

    const int k = graph.depots();
    double total = 0.0;
    for (size_t i = 0; i + 1 < tour.size(); ++i)
        total += graph.w[tour[i]][tour[i + 1]];
    plan.tour_weight = total;

    // Subtasks in tour order. Intermediate depot-depot hops are collapsed
    // into the next subtask's start; shortest-path weights obey the triangle
    // inequality, so the collapsed predicted time never exceeds the segment.
    struct Local { int start, package, end; double time; };
    std::vector<Local> subtasks;
    int cur_start = tour.front();
    for (size_t i = 1; i + 1 < tour.size(); ++i) {
        if (tour[i] >= k) {  // package position
            const int g = tour[i];
            const int end = tour[i + 1];
            subtasks.push_back({cur_start, g, end,
                                graph.w[cur_start][g] + graph.w[g][end]});
            cur_start = end;
        }
    }

    std::vector<int> ids = graph.depot_ids;
    ids.insert(ids.end(), graph.package_ids.begin(), graph.package_ids.end());

    const double threshold = total / n_uavs;
    int uav = 0;
    double load = 0.0;
    for (const auto& st : subtasks) {
        plan.orders[uav].push_back(Subtask{ids[st.start], ids[st.package], ids[st.end]});
        load += st.time;
        plan.predicted_times[uav] = load;
        if (load >= threshold - 1e-9 && uav + 1 < n_uavs) {
            ++uav;
            load = 0.0;
        }
    }
    return plan;
}

AllocationPlan allocate(const net::AllocationGraph& graph, int n_uavs) {
    if (graph.package_ids.empty()) {
        AllocationPlan plan;
        plan.orders.assign(n_uavs, {});
        plan.predicted_times.assign(n_uavs, 0.0);
        return plan;
    }
    const CirculationSolution sol = solve_mcc(graph);
    int merges = 0;
    double added = 0.0;
    const auto edges = merge_components(sol, graph, &merges, &added);
    const auto tour = extract_tour(edges, graph);
    AllocationPlan plan = split_tour(tour, graph, n_uavs);
    plan.merges = merges;
    return plan;
}

std::string AllocationPlan::to_json() const {
    nlohmann::json j;
    j["tour_weight"] = tour_weight;
    j["merges"] = merges;
    j["uavs"] = nlohmann::json::array();
    for (size_t n = 0; n < orders.size(); ++n) {
        nlohmann::json ju;
        ju["uav"] = n;
        ju["predicted_time"] = predicted_times[n];
        ju["subtasks"] = nlohmann::json::array();
        for (const auto& st : orders[n])
            ju["subtasks"].push_back({st.start_depot, st.package, st.end_depot});
        j["uavs"].push_back(ju);
    }
    return j.dump(2);
}

std::string AllocationPlan::predicted_times_csv() const {
    std::ostringstream os;
    os << "uav,predicted_time\n";
    char buf[64];
    for (size_t n = 0; n < orders.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f", n, predicted_times[n]);
        os << buf << "\n";
    }
    return os.str();
}

}  // namespace uavh::alloc
