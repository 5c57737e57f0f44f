// Compares the OpenMP-parallel kernels against their serial references and
// verifies the outputs are bit-identical.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "uavh/pricing.hpp"
#include "uavh/simulator.hpp"

using Clock = std::chrono::steady_clock;

static double secs(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

int main() {
    using namespace uavh;

    // Monte-Carlo waiting simulation.
    pricing::PricingParams params{0.95, 2.0, 0.9, 200};
    auto coeffs = pricing::backward_recursion(params);
    auto schedule = pricing::optimal_schedule(params, coeffs);
    const int trials = 200000;

    auto t0 = Clock::now();
    auto serial = pricing::simulate_waiting_serial(params, schedule, trials, 42);
    auto t1 = Clock::now();
    auto parallel = pricing::simulate_waiting(params, schedule, trials, 42);
    auto t2 = Clock::now();

    bool identical = serial.size() == parallel.size() &&
                     std::memcmp(serial.data(), parallel.data(),
                                 serial.size() * sizeof(double)) == 0;
    double ts = secs(t0, t1), tp = secs(t1, t2);
    std::printf("simulate_waiting   serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
                ts, tp, ts / tp, identical ? "bit-identical" : "MISMATCH");

    // DP pricing oracle (grid sweep parallel over wait states).
    pricing::PricingParams small{1.0, 2.0, 0.9, 10};
    t0 = Clock::now();
    auto oracle = pricing::dp_oracle(small, 2001);
    t1 = Clock::now();
    std::printf("dp_oracle          grid 2001 horizon 10: %.3fs (value %.6f)\n",
                secs(t0, t1), oracle.value);

    // Experiment trial loop (independent seeded pipeline runs).
    sim::FailureRateSweep sweep;
    sweep.base.gen = {2, 8, 16, 40, 4000, 4000, {10.0, 10.0 / 1.3, 500.0}, 0.0};
    sweep.base.use_pricing = false;
    sweep.base.response_time_max = 60.0;
    sweep.transit_counts = {20, 40};
    sweep.trials = 16;

    sweep.base.parallel = false;
    t0 = Clock::now();
    auto csv_serial = sim::experiment_failure_rate(sweep);
    t1 = Clock::now();
    sweep.base.parallel = true;
    auto csv_parallel = sim::experiment_failure_rate(sweep);
    t2 = Clock::now();
    ts = secs(t0, t1);
    tp = secs(t1, t2);
    std::printf("experiment trials  serial %.3fs  parallel %.3fs  speedup %.2fx  %s\n",
                ts, tp, ts / tp,
                csv_serial == csv_parallel ? "bit-identical" : "MISMATCH");

    return (identical && csv_serial == csv_parallel) ? 0 : 1;
}
