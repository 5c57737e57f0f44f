// Command-line front end: pricing schedules, task allocation, full planning
// runs, and the batch experiment suites.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "uavh/allocation.hpp"
#include "uavh/network.hpp"
#include "uavh/pricing.hpp"
#include "uavh/simulator.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

struct CommonArgs {
    std::string config_file;
    std::optional<std::int64_t> seed;
    std::string out_dir = ".";
    std::optional<double> budget_secs;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "JSON config file");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--budget-secs", args.budget_secs,
                    "per-subtask compute budget in seconds (overrides config)");
}

uavh::sim::ExperimentConfig load_config(const CommonArgs& args) {
    uavh::sim::ExperimentConfig cfg;
    if (!args.config_file.empty())
        cfg = uavh::sim::ExperimentConfig::from_json(read_file(args.config_file));
    if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
    if (args.budget_secs) cfg.budget_secs = *args.budget_secs;
    return cfg;
}

fs::path prepare_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

int run_price(const CommonArgs& args) {
    auto cfg = load_config(args);
    cfg.pricing.validate();
    auto coeffs = uavh::pricing::backward_recursion(cfg.pricing);
    auto schedule = uavh::pricing::optimal_schedule(cfg.pricing, coeffs);
    auto steady = uavh::pricing::steady_state(cfg.pricing);

    std::ostringstream csv;
    csv << "t,price,expected_wait\n";
    char buf[96];
    for (std::size_t t = 0; t < schedule.price.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", t, schedule.price[t],
                      schedule.expected_wait[t]);
        csv << buf;
    }
    write_file(prepare_out(args) / "pricing_schedule.csv", csv.str());

    std::printf("steady state: q=%.6f m=%.6f wait=%.6f price_limit=%.6f\n", steady.q_star,
                steady.m_star, steady.wait_star, steady.price_limit);
    if (schedule.clamped) std::printf("warning: price clamping was binding\n");
    return 0;
}

int run_allocate(const CommonArgs& args) {
    auto cfg = load_config(args);
    auto net = uavh::net::generate_network(cfg.gen, cfg.seed);
    uavh::sim::apply_response_times(net, cfg);
    auto plan = uavh::alloc::allocate(net.allocation_subgraph(), cfg.n_uavs);

    auto dir = prepare_out(args);
    write_file(dir / "allocation.json", plan.to_json());
    write_file(dir / "predicted_times.csv", plan.predicted_times_csv());
    std::printf("allocated %d merges, tour weight %.3f, %zu UAV orders\n", plan.merges,
                plan.tour_weight, plan.orders.size());
    return 0;
}

int run_plan(const CommonArgs& args, const std::string& network_file) {
    auto cfg = load_config(args);
    uavh::sim::RunMetrics metrics;
    auto dir = prepare_out(args);
    if (!network_file.empty()) {
        auto net = uavh::net::TrafficNetwork::load(network_file);
        uavh::sim::apply_response_times(net, cfg);
        auto plan = uavh::alloc::allocate(net.allocation_subgraph(), cfg.n_uavs);
        write_file(dir / "allocation.json", plan.to_json());
        metrics = uavh::sim::run_pipeline_on(net, cfg, plan);
    } else {
        metrics = uavh::sim::run_pipeline(cfg);
    }
    write_file(dir / "run_metrics.csv", metrics.to_csv());
    std::printf("delivered %d/%zu packages, max time %.3f s, failure rate %.3f\n",
                metrics.successes, metrics.packages.size(), metrics.max_time,
                metrics.failure_rate);
    return 0;  // delivery failures are reported, not fatal
}

int run_experiment(const CommonArgs& args, const std::string& name, int trials) {
    auto cfg = load_config(args);
    auto dir = prepare_out(args);
    if (name == "failure_rate") {
        uavh::sim::FailureRateSweep sweep;
        sweep.base = cfg;
        sweep.transit_counts = {10, 20, 30, 40, 50, 60, 70, 80};
        if (trials > 0) sweep.trials = trials;
        write_file(dir / "failure_rate.csv", uavh::sim::experiment_failure_rate(sweep));
    } else if (name == "capacity") {
        uavh::sim::CapacitySweep sweep;
        sweep.base = cfg;
        sweep.capacities = {1, 2, 3, 4, 5};
        sweep.wait_maxes = {60, 120, 180, 240, 300};
        if (trials > 0) sweep.trials = trials;
        write_file(dir / "capacity.csv", uavh::sim::experiment_capacity(sweep));
    } else if (name == "vs_vehicle") {
        uavh::sim::VsVehicleSweep sweep;
        sweep.base = cfg;
        sweep.flight_budgets = {400, 600, 800, 1000, 1200, 1400};
        if (trials > 0) sweep.trials = trials;
        write_file(dir / "vs_vehicle.csv", uavh::sim::experiment_vs_vehicle(sweep));
    } else if (name == "scaling") {
        uavh::sim::ScalingSweep sweep;
        sweep.base = cfg;
        sweep.package_counts = {10, 20, 40, 80};
        sweep.depot_counts_alloc = {1, 2, 4};
        sweep.uav_counts = {1, 2, 4, 8};
        sweep.depot_counts_fleet = {1, 2, 4};
        if (trials > 0) sweep.trials = trials;
        auto result = uavh::sim::experiment_scaling(sweep);
        write_file(dir / "scaling_allocation.csv", result.allocation_csv);
        write_file(dir / "scaling_fleet.csv", result.fleet_csv);
    } else {
        throw std::invalid_argument("unknown experiment: " + name);
    }
    std::printf("experiment '%s' written to %s\n", name.c_str(), dir.string().c_str());
    return 0;
}

int run_generate(const CommonArgs& args) {
    auto cfg = load_config(args);
    auto net = uavh::net::generate_network(cfg.gen, cfg.seed);
    auto dir = prepare_out(args);
    net.save((dir / "network.json").string());
    std::printf("network written to %s\n", (dir / "network.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crowdsourced air-ground delivery planner"};
    app.require_subcommand(1);

    CommonArgs price_args, alloc_args, plan_args, exp_args, gen_args;
    std::string network_file, experiment_name;
    int trials = 0;

    auto* price = app.add_subcommand("price", "optimal dynamic pricing schedule");
    add_common(price, price_args);

    auto* allocate = app.add_subcommand("allocate", "task allocation only");
    add_common(allocate, alloc_args);

    auto* plan = app.add_subcommand("plan", "full allocation + path-planning run");
    add_common(plan, plan_args);
    plan->add_option("--network", network_file, "network JSON file (else generated)");

    auto* experiment = app.add_subcommand("experiment", "batch experiment suite");
    experiment->add_option("name", experiment_name,
                           "failure_rate | capacity | vs_vehicle | scaling")
        ->required();
    experiment->add_option("--trials", trials, "trials per sweep point");
    add_common(experiment, exp_args);

    auto* generate = app.add_subcommand("generate", "write a random network file");
    add_common(generate, gen_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) return run_price(price_args);
        if (allocate->parsed()) return run_allocate(alloc_args);
        if (plan->parsed()) return run_plan(plan_args, network_file);
        if (experiment->parsed()) return run_experiment(exp_args, experiment_name, trials);
        if (generate->parsed()) return run_generate(gen_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
