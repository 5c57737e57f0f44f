#include "uavh/simulator.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavh::sim {

const char* mode_name(DeliveryMode mode) {
    switch (mode) {
        case DeliveryMode::Direct: return "direct";
        case DeliveryMode::SingleHop: return "single-hop";
        case DeliveryMode::MultiHop: return "multi-hop";
    }
    return "?";
}

DeliveryMode mode_from(const std::string& name) {
    if (name == "direct") return DeliveryMode::Direct;
    if (name == "single-hop") return DeliveryMode::SingleHop;
    if (name == "multi-hop") return DeliveryMode::MultiHop;
    throw std::invalid_argument("unknown delivery mode: " + name);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(mix(master ^ mix(a + 1)) ^ mix(b + 0x1234567));
}

void apply_response_times(net::TrafficNetwork& network, const ExperimentConfig& config) {
    if (config.response_time_max.has_value()) {
        std::mt19937_64 rng(derive_seed(config.seed, 0xA11CE));
        std::uniform_real_distribution<double> u(0.0, *config.response_time_max);
        for (int id : network.ids_of(net::NodeKind::Interchange))
            network.set_response_time(id, u(rng));
    } else if (config.use_pricing) {
        const pricing::SteadyState ss = pricing::steady_state(config.pricing);
        network.set_all_response_times(ss.wait_star * config.slot_seconds);
    }
}

RunMetrics run_pipeline_on(const net::TrafficNetwork& network,
                           const ExperimentConfig& config,
                           const alloc::AllocationPlan& plan) {
    RunMetrics metrics;
    metrics.uav_times.assign(config.n_uavs, 0.0);

    path::OccupancyTable occupancy(config.capacity);
    path::SearchLimits limits;
    limits.compute_budget_secs = config.budget_secs;

    size_t longest = 0;
    for (const auto& o : plan.orders) longest = std::max(longest, o.size());

    double plan_seconds = 0.0;
    int planned = 0;
    // Algorithm-1 inner loop: round-robin over UAVs, one subtask at a time,
    // committing occupancy after each planned path.
    for (size_t i = 0; i < longest; ++i) {
        for (int n = 0; n < config.n_uavs; ++n) {
            if (i >= plan.orders[n].size()) continue;
            const alloc::Subtask& st = plan.orders[n][i];
            const double start = metrics.uav_times[n];

            const auto t0 = std::chrono::steady_clock::now();
            path::PlanResult r;
            switch (config.mode) {
                case DeliveryMode::Direct:
                    r = path::plan_direct(network, st, start);
                    break;
                case DeliveryMode::SingleHop:
                    r = path::plan_single_hop(network, st, occupancy, start);
                    break;
                case DeliveryMode::MultiHop:
                    r = path::plan_multi_hop_cabps(network, st, occupancy, start, limits);
                    break;
            }
            plan_seconds +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            ++planned;

            PackageOutcome out;
            out.package = st.package;
            out.uav = n;
            out.success = r.ok;
            out.delivery_time = r.ok ? r.path.total_time : 0.0;
            out.extra_wait = r.ok ? r.path.extra_wait : 0.0;
            out.failure_reason = r.reason;
            metrics.packages.push_back(out);
            if (r.ok) {
                metrics.uav_times[n] += r.path.total_time;
                ++metrics.successes;
                metrics.total_extra_wait += r.path.extra_wait;
            } else {
                ++metrics.failures;
            }
        }
    }

    metrics.max_time =
        metrics.uav_times.empty()
            ? 0.0
            : *std::max_element(metrics.uav_times.begin(), metrics.uav_times.end());
    const int total = metrics.successes + metrics.failures;
    metrics.failure_rate = total > 0 ? static_cast<double>(metrics.failures) / total : 0.0;
    metrics.avg_plan_time = planned > 0 ? plan_seconds / planned : 0.0;
    return metrics;
}

RunMetrics run_pipeline(const ExperimentConfig& config) {
    net::TrafficNetwork network = net::generate_network(config.gen, config.seed);
    apply_response_times(network, config);
    const alloc::AllocationPlan plan =
        alloc::allocate(network.allocation_subgraph(), config.n_uavs);
    return run_pipeline_on(network, config, plan);
}

std::string RunMetrics::to_csv() const {
    std::ostringstream os;
    os << "package,uav,success,delivery_time,extra_wait\n";
    char buf[128];
    for (const auto& p : packages) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.6f,%.6f", p.package, p.uav,
                      p.success ? 1 : 0, p.delivery_time, p.extra_wait);
        os << buf << "\n";
    }
    return os.str();
}

RoadModel::RoadModel(const net::TrafficNetwork& network) {
    const auto& nodes = network.nodes();
    const int n = static_cast<int>(nodes.size());
    speed_ = network.speeds().vehicle_speed;
    adj_.assign(n, {});

    auto l1 = [&](int u, int v) {
        return std::abs(nodes[u].x - nodes[v].x) + std::abs(nodes[u].y - nodes[v].y);
    };
    auto connect = [&](int u, int v) {
        for (const auto& [w, t] : adj_[u])
            if (w == v) return;
        adj_[u].emplace_back(v, l1(u, v) / speed_);
        adj_[v].emplace_back(u, l1(u, v) / speed_);
    };

    // sparse street graph: 3 nearest neighbours per node, plus an MST so the
    // graph is always connected
    constexpr int kNeighbours = 3;
    for (int u = 0; u < n; ++u) {
        std::vector<std::pair<double, int>> cand;
        for (int v = 0; v < n; ++v)
            if (v != u) cand.emplace_back(l1(u, v), v);
        std::sort(cand.begin(), cand.end());
        for (int k = 0; k < std::min<int>(kNeighbours, cand.size()); ++k)
            connect(u, cand[k].second);
    }
    // Prim over the L1 metric
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> best_from(n, -1);
    best[0] = 0.0;
    for (int step = 0; step < n; ++step) {
        int u = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            if (!in_tree[i] && best[i] < bd) { bd = best[i]; u = i; }
        if (u < 0) break;
        in_tree[u] = 1;
        if (best_from[u] >= 0) connect(u, best_from[u]);
        for (int v = 0; v < n; ++v)
            if (!in_tree[v] && l1(u, v) < best[v]) { best[v] = l1(u, v); best_from[v] = u; }
    }
}

double RoadModel::travel_time(int from, int to) const {
    const int n = static_cast<int>(adj_.size());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[from] = 0.0;
    pq.emplace(0.0, from);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (u == to) return d;
        if (d > dist[u] + 1e-12) continue;
        for (const auto& [v, t] : adj_[u])
            if (d + t < dist[v]) {
                dist[v] = d + t;
                pq.emplace(dist[v], v);
            }
    }
    return dist[to];
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

std::string experiment_failure_rate(const FailureRateSweep& sweep) {
    std::ostringstream os;
    os << "transit_edges,mode,failure_rate\n";
    const DeliveryMode modes[] = {DeliveryMode::Direct, DeliveryMode::SingleHop,
                                  DeliveryMode::MultiHop};
    for (int count : sweep.transit_counts) {
        std::vector<std::array<double, 3>> rates(sweep.trials);
#pragma omp parallel for schedule(dynamic) if (sweep.base.parallel)
        for (int trial = 0; trial < sweep.trials; ++trial) {
            ExperimentConfig cfg = sweep.base;
            cfg.gen.transit_routes = count;
            // per-trial common random numbers: same node layout at every
            // transit-edge count, and nested transit-route sets
            cfg.seed = derive_seed(sweep.base.seed, trial);
            net::TrafficNetwork network = net::generate_network(cfg.gen, cfg.seed);
            apply_response_times(network, cfg);
            const alloc::AllocationPlan plan =
                alloc::allocate(network.allocation_subgraph(), cfg.n_uavs);
            for (int m = 0; m < 3; ++m) {
                cfg.mode = modes[m];
                rates[trial][m] = run_pipeline_on(network, cfg, plan).failure_rate;
            }
        }
        for (int m = 0; m < 3; ++m) {
            double sum = 0.0;
            for (const auto& r : rates) sum += r[m];
            os << count << "," << mode_name(modes[m]) << ","
               << fmt(sum / sweep.trials) << "\n";
        }
    }
    return os.str();
}

std::string experiment_capacity(const CapacitySweep& sweep) {
    std::ostringstream os;
    os << "capacity,wait_max,mean_delivery_time\n";
    for (int cap : sweep.capacities) {
        for (double wmax : sweep.wait_maxes) {
            std::vector<double> cell(sweep.trials, 0.0);
#pragma omp parallel for schedule(dynamic) if (sweep.base.parallel)
            for (int trial = 0; trial < sweep.trials; ++trial) {
                ExperimentConfig cfg = sweep.base;
                cfg.capacity = cap;
                cfg.response_time_max = wmax;
                cfg.seed = derive_seed(sweep.base.seed, trial);
                const RunMetrics m = run_pipeline(cfg);
                std::vector<double> times;
                for (const auto& p : m.packages)
                    if (p.success) times.push_back(p.delivery_time);
                cell[trial] = mean(times);
            }
            os << cap << "," << fmt(wmax) << "," << fmt(mean(cell)) << "\n";
        }
    }
    return os.str();
}

std::string experiment_vs_vehicle(const VsVehicleSweep& sweep) {
    std::ostringstream os;
    os << "max_flight_time,multimodal_mean,multimodal_max,vehicle_mean,vehicle_max\n";
    for (double budget : sweep.flight_budgets) {
        std::vector<std::array<double, 4>> cell(sweep.trials);
#pragma omp parallel for schedule(dynamic) if (sweep.base.parallel)
        for (int trial = 0; trial < sweep.trials; ++trial) {
            ExperimentConfig cfg = sweep.base;
            cfg.gen.speeds.max_flight_time = budget;
            cfg.mode = DeliveryMode::MultiHop;
            cfg.seed = derive_seed(sweep.base.seed, trial);

            net::TrafficNetwork network = net::generate_network(cfg.gen, cfg.seed);
            apply_response_times(network, cfg);
            const alloc::AllocationPlan plan =
                alloc::allocate(network.allocation_subgraph(), cfg.n_uavs);
            const RunMetrics metrics = run_pipeline_on(network, cfg, plan);

            const RoadModel roads(network);
            std::vector<double> mm, veh;
            for (size_t n = 0; n < plan.orders.size(); ++n)
                for (const auto& st : plan.orders[n])
                    veh.push_back(roads.travel_time(st.start_depot, st.package) +
                                  roads.travel_time(st.package, st.end_depot));
            for (const auto& p : metrics.packages)
                if (p.success) mm.push_back(p.delivery_time);

            cell[trial] = {mean(mm), mm.empty() ? 0.0 : *std::max_element(mm.begin(), mm.end()),
                           mean(veh), veh.empty() ? 0.0 : *std::max_element(veh.begin(), veh.end())};
        }
        std::array<double, 4> avg{};
        for (const auto& c : cell)
            for (int i = 0; i < 4; ++i) avg[i] += c[i] / sweep.trials;
        os << fmt(budget) << "," << fmt(avg[0]) << "," << fmt(avg[1]) << ","
           << fmt(avg[2]) << "," << fmt(avg[3]) << "\n";
    }
    return os.str();
}

ScalingResult experiment_scaling(const ScalingSweep& sweep) {
    ScalingResult result;
    {
        std::ostringstream os;
        os << "packages,depots,seconds\n";
        for (int m : sweep.package_counts)
            for (int k : sweep.depot_counts_alloc) {
                double total = 0.0;
                for (int trial = 0; trial < sweep.trials; ++trial) {
                    ExperimentConfig cfg = sweep.base;
                    cfg.gen.packages = m;
                    cfg.gen.depots = k;
                    cfg.seed = derive_seed(sweep.base.seed, trial, 1000 + m * 31 + k);
                    net::TrafficNetwork network = net::generate_network(cfg.gen, cfg.seed);
                    apply_response_times(network, cfg);
                    const auto graph = network.allocation_subgraph();
                    const auto t0 = std::chrono::steady_clock::now();
                    (void)alloc::allocate(graph, cfg.n_uavs);
                    total += std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
                }
                os << m << "," << k << "," << fmt(total / sweep.trials) << "\n";
            }
        result.allocation_csv = os.str();
    }
    {
        std::ostringstream os;
        os << "uavs,depots,avg_calc,avg_delivery,max_delivery\n";
        for (int n : sweep.uav_counts)
            for (int k : sweep.depot_counts_fleet) {
                std::vector<std::array<double, 3>> cell(sweep.trials);
#pragma omp parallel for schedule(dynamic) if (sweep.base.parallel)
                for (int trial = 0; trial < sweep.trials; ++trial) {
                    ExperimentConfig cfg = sweep.base;
                    cfg.n_uavs = n;
                    cfg.gen.depots = k;
                    cfg.seed = derive_seed(sweep.base.seed, trial);
                    const RunMetrics m = run_pipeline(cfg);
                    std::vector<double> times;
                    for (const auto& p : m.packages)
                        if (p.success) times.push_back(p.delivery_time);
                    cell[trial] = {m.avg_plan_time, mean(times), m.max_time};
                }
                std::array<double, 3> avg{};
                for (const auto& c : cell)
                    for (int i = 0; i < 3; ++i) avg[i] += c[i] / sweep.trials;
                os << n << "," << k << "," << fmt(avg[0]) << "," << fmt(avg[1]) << ","
                   << fmt(avg[2]) << "\n";
            }
        result.fleet_csv = os.str();
    }
    return result;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("network")) {
        const auto& g = j.at("network");
        if (g.contains("depots")) cfg.gen.depots = g.at("depots").get<int>();
        if (g.contains("packages")) cfg.gen.packages = g.at("packages").get<int>();
        if (g.contains("interchanges")) cfg.gen.interchanges = g.at("interchanges").get<int>();
        if (g.contains("transit_routes"))
            cfg.gen.transit_routes = g.at("transit_routes").get<int>();
        if (g.contains("width")) cfg.gen.width = g.at("width").get<double>();
        if (g.contains("height")) cfg.gen.height = g.at("height").get<double>();
        if (g.contains("uav_speed")) cfg.gen.speeds.uav_speed = g.at("uav_speed").get<double>();
        if (g.contains("vehicle_speed"))
            cfg.gen.speeds.vehicle_speed = g.at("vehicle_speed").get<double>();
        if (g.contains("max_flight_time"))
            cfg.gen.speeds.max_flight_time = g.at("max_flight_time").get<double>();
    }
    if (j.contains("pricing")) {
        const auto& p = j.at("pricing");
        if (p.contains("alpha")) cfg.pricing.alpha = p.at("alpha").get<double>();
        if (p.contains("b")) cfg.pricing.b = p.at("b").get<double>();
        if (p.contains("rho")) cfg.pricing.rho = p.at("rho").get<double>();
        if (p.contains("horizon")) cfg.pricing.horizon = p.at("horizon").get<int>();
        if (p.contains("slot_seconds")) cfg.slot_seconds = p.at("slot_seconds").get<double>();
    }
    if (j.contains("use_pricing")) cfg.use_pricing = j.at("use_pricing").get<bool>();
    if (j.contains("response_time_max"))
        cfg.response_time_max = j.at("response_time_max").get<double>();
    if (j.contains("uavs")) cfg.n_uavs = j.at("uavs").get<int>();
    if (j.contains("mode")) cfg.mode = mode_from(j.at("mode").get<std::string>());
    if (j.contains("capacity")) cfg.capacity = j.at("capacity").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("budget_secs")) cfg.budget_secs = j.at("budget_secs").get<double>();
    if (j.contains("parallel")) cfg.parallel = j.at("parallel").get<bool>();
    if (cfg.n_uavs < 1 || cfg.capacity < 1)
        throw std::invalid_argument("uavs and capacity must be positive");
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["network"] = {{"depots", gen.depots},
                    {"packages", gen.packages},
                    {"interchanges", gen.interchanges},
                    {"transit_routes", gen.transit_routes},
                    {"width", gen.width},
                    {"height", gen.height},
                    {"uav_speed", gen.speeds.uav_speed},
                    {"vehicle_speed", gen.speeds.vehicle_speed},
                    {"max_flight_time", gen.speeds.max_flight_time}};
    j["pricing"] = {{"alpha", pricing.alpha},
                    {"b", pricing.b},
                    {"rho", pricing.rho},
                    {"horizon", pricing.horizon},
                    {"slot_seconds", slot_seconds}};
    j["use_pricing"] = use_pricing;
    if (response_time_max) j["response_time_max"] = *response_time_max;
    j["uavs"] = n_uavs;
    j["mode"] = mode_name(mode);
    j["capacity"] = capacity;
    j["seed"] = seed;
    j["budget_secs"] = budget_secs;
    j["parallel"] = parallel;
    return j.dump(2);
}

}  // namespace uavh::sim
