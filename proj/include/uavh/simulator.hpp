#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uavh/allocation.hpp"
#include "uavh/network.hpp"
#include "uavh/pathfinding.hpp"
#include "uavh/pricing.hpp"

namespace uavh::sim {

enum class DeliveryMode { Direct, SingleHop, MultiHop };

const char* mode_name(DeliveryMode mode);
DeliveryMode mode_from(const std::string& name);

struct ExperimentConfig {
    net::GeneratorConfig gen;
    pricing::PricingParams pricing{1.0, 2.0, 0.9, 100};
    bool use_pricing = true;      // derive interchange waits from the steady state
    double slot_seconds = 60.0;   // pricing time slot length in seconds
    // when set, per-interchange waits are sampled uniformly from [0, max]
    std::optional<double> response_time_max;
    int n_uavs = 1;
    DeliveryMode mode = DeliveryMode::MultiHop;
    int capacity = 1;  // C-bar
    std::uint64_t seed = 0;
    double budget_secs = 300.0;  // per-subtask compute budget
    bool parallel = true;        // trial-level parallelism in experiments

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
};

struct PackageOutcome {
    int package;
    int uav;
    bool success;
    double delivery_time;
    double extra_wait;
    std::string failure_reason;
};

struct RunMetrics {
    std::vector<PackageOutcome> packages;
    std::vector<double> uav_times;  // Time(P_n)
    double max_time = 0.0;
    int successes = 0;
    int failures = 0;
    double failure_rate = 0.0;
    double avg_plan_time = 0.0;  // seconds of compute per subtask
    double total_extra_wait = 0.0;

    std::string to_csv() const;
};

// Prepares interchange response times on an existing network according to
// the config (pricing steady state or sampled waits).
void apply_response_times(net::TrafficNetwork& net, const ExperimentConfig& config);

// Full two-stage pipeline on a freshly generated network.
RunMetrics run_pipeline(const ExperimentConfig& config);
// Same, on a caller-provided network (response times already applied).
RunMetrics run_pipeline_on(const net::TrafficNetwork& net, const ExperimentConfig& config,
                           const alloc::AllocationPlan& plan);

// Ground vehicles drive a sparse rectilinear street graph; used by the
// vehicle-only comparison experiment.
class RoadModel {
  public:
    explicit RoadModel(const net::TrafficNetwork& net);
    double travel_time(int from, int to) const;

  private:
    std::vector<std::vector<std::pair<int, double>>> adj_;
    double speed_;
};

struct FailureRateSweep {
    ExperimentConfig base;
    std::vector<int> transit_counts;
    int trials = 50;
};
std::string experiment_failure_rate(const FailureRateSweep& sweep);

struct CapacitySweep {
    ExperimentConfig base;
    std::vector<int> capacities;
    std::vector<double> wait_maxes;
    int trials = 50;
};
std::string experiment_capacity(const CapacitySweep& sweep);

struct VsVehicleSweep {
    ExperimentConfig base;
    std::vector<double> flight_budgets;  // T-bar values, seconds
    int trials = 50;
};
std::string experiment_vs_vehicle(const VsVehicleSweep& sweep);

struct ScalingSweep {
    ExperimentConfig base;
    std::vector<int> package_counts;  // allocation-time table (M rows)
    std::vector<int> depot_counts_alloc;
    std::vector<int> uav_counts;  // fleet table (N rows)
    std::vector<int> depot_counts_fleet;
    int trials = 10;
};
struct ScalingResult {
    std::string allocation_csv;  // M,K,seconds
    std::string fleet_csv;       // N,K,avg_calc,avg_delivery,max_delivery
};
ScalingResult experiment_scaling(const ScalingSweep& sweep);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace uavh::sim
