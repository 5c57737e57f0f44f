#pragma once

#include <cstdint>
#include <vector>

namespace uavh::pricing {

// Control-problem constants for one interchange point.
struct PricingParams {
    double alpha;  // per-slot vehicle arrival probability, (0, 1]
    double b;      // upper bound of vehicles' private carrying cost
    double rho;    // discount factor, (0, 1)
    int horizon;   // number of time slots T_w, >= 1

    void validate() const;  // throws std::invalid_argument
};

// Backward-recursion coefficient sequences, indexed t = 0..T_w.
// Boundary: q[T_w] = 1, m[T_w] = 0.
struct RiccatiCoefficients {
    std::vector<double> q;
    std::vector<double> m;
};

// Price and expected-wait trajectories, indexed t = 0..T_w.
struct PricingSchedule {
    std::vector<double> price;
    std::vector<double> expected_wait;
    bool clamped = false;  // set when a price had to be clamped into [0, b]
};

struct SteadyState {
    double q_star;
    double m_star;
    double wait_star;
    double price_limit;  // b / alpha
};

RiccatiCoefficients backward_recursion(const PricingParams& params);

// Forward simulation of the wait dynamics under the optimal price rule.
// expected_wait[0] = 0 and price[T_w] = 0.
PricingSchedule optimal_schedule(const PricingParams& params,
                                 const RiccatiCoefficients& coeffs);

SteadyState steady_state(const PricingParams& params);

// Infinite-horizon price/wait trajectories using the steady coefficients,
// for t = 0..t_max.
PricingSchedule infinite_horizon_schedule(const PricingParams& params, int t_max);

// Monte-Carlo simulation of the waiting process. Returns the per-slot
// empirical mean of W(t), t = 0..T_w. Deterministic given seed, independent
// of thread count.
std::vector<double> simulate_waiting(const PricingParams& params,
                                     const PricingSchedule& schedule,
                                     int trials, std::uint64_t seed);

// Serial reference of simulate_waiting; bit-identical results.
std::vector<double> simulate_waiting_serial(const PricingParams& params,
                                            const PricingSchedule& schedule,
                                            int trials, std::uint64_t seed);

struct OracleResult {
    PricingSchedule schedule;
    double value;       // realized discounted objective along the greedy trajectory
    bool grid_warning;  // set when the grid is too coarse to trust
};

// Exhaustive backward value iteration over discretized wait/price grids.
// Independent verification route for the closed-form policy; intended for
// horizon <= 20.
OracleResult dp_oracle(const PricingParams& params, int price_grid_size);

// Discounted objective realized by a schedule (used to compare routes).
double schedule_objective(const PricingParams& params, const PricingSchedule& schedule);

}  // namespace uavh::pricing
