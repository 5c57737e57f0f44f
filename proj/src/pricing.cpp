#include "uavh/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uavh::pricing {

void PricingParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("rho must be in (0, 1)");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

RiccatiCoefficients backward_recursion(const PricingParams& params) {
    params.validate();
    const int tw = params.horizon;
    const double ab = params.alpha / params.b;
    RiccatiCoefficients c;
    c.q.assign(tw + 1, 0.0);
    c.m.assign(tw + 1, 0.0);
    c.q[tw] = 1.0;
    c.m[tw] = 0.0;
    for (int t = tw - 1; t >= 0; --t) {
        const double den = 1.0 + params.rho * c.q[t + 1] * ab;
        c.q[t] = 1.0 + params.rho * c.q[t + 1] / den;
        c.m[t] = params.rho * (c.m[t + 1] + 2.0 * c.q[t + 1]) / den;
    }
    return c;
}

namespace {

// Price rule as a function of the current expected wait, before clamping.
double price_rule(const PricingParams& p, double q_next, double m_next, double wait) {
    const double num = p.rho * m_next + 2.0 * p.rho * q_next * (wait + 1.0);
    const double den = 2.0 + 2.0 * p.rho * q_next * p.alpha / p.b;
    return num / den;
}

}  // namespace

PricingSchedule optimal_schedule(const PricingParams& params,
                                 const RiccatiCoefficients& coeffs) {
    params.validate();
    const int tw = params.horizon;
    if (static_cast<int>(coeffs.q.size()) != tw + 1 ||
        static_cast<int>(coeffs.m.size()) != tw + 1)
        throw std::invalid_argument("coefficient length does not match horizon");

    PricingSchedule s;
    s.price.assign(tw + 1, 0.0);
    s.expected_wait.assign(tw + 1, 0.0);
    for (int t = 0; t < tw; ++t) {
        double p = price_rule(params, coeffs.q[t + 1], coeffs.m[t + 1],
                              s.expected_wait[t]);
        if (p < 0.0 || p > params.b) {
            s.clamped = true;
            p = std::clamp(p, 0.0, params.b);
        }
        s.price[t] = p;
        s.expected_wait[t + 1] =
            s.expected_wait[t] + 1.0 - params.alpha * p / params.b;
    }
    s.price[tw] = 0.0;
    return s;
}

SteadyState steady_state(const PricingParams& params) {
    params.validate();
    const double a = params.alpha, b = params.b, rho = params.rho;
    const double u = 1.0 - b * (1.0 - rho) / (rho * a);
    const double q = 0.5 * (u + std::sqrt(u * u + 4.0 * b / (rho * a)));
    const double m = 2.0 * rho * q / (1.0 - rho + rho * q * a / b);
    const double ab = a / b;
    const double wait = (1.0 - rho) * (1.0 + rho * q * ab) /
                        (rho * q * (ab * (1.0 - rho) + rho * q * ab * ab));
    return SteadyState{q, m, wait, b / a};
}

PricingSchedule infinite_horizon_schedule(const PricingParams& params, int t_max) {
    params.validate();
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    const SteadyState ss = steady_state(params);
    const double ab = params.alpha / params.b;
    const double r = 1.0 / (1.0 + params.rho * ss.q_star * ab);
    const double base =
        (2.0 - params.rho * ss.m_star * ab) / (2.0 + 2.0 * params.rho * ss.q_star * ab);

    PricingSchedule s;
    s.price.assign(t_max + 1, 0.0);
    s.expected_wait.assign(t_max + 1, 0.0);
    for (int t = 0; t <= t_max; ++t) {
        // geometric partial sum; empty at t = 0
        s.expected_wait[t] = base * (1.0 - std::pow(r, t)) / (1.0 - r);
        double p = price_rule(params, ss.q_star, ss.m_star, s.expected_wait[t]);
        if (p < 0.0 || p > params.b) {
            s.clamped = true;
            p = std::clamp(p, 0.0, params.b);
        }
        s.price[t] = p;
    }
    return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One trial of the waiting dynamics; out[t] += W(t).
void accumulate_trial(const PricingParams& params, const PricingSchedule& schedule,
                      std::uint64_t trial_seed, std::vector<double>& out) {
    std::mt19937_64 rng(trial_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> cost(0.0, params.b);
    const int tw = params.horizon;
    double w = 0.0;
    out[0] += w;
    for (int t = 0; t < tw; ++t) {
        const bool arrival = unit(rng) < params.alpha;
        const double c = cost(rng);
        if (!(arrival && c <= schedule.price[t])) w += 1.0;
        out[t + 1] += w;
    }
}

std::vector<double> simulate_impl(const PricingParams& params,
                                  const PricingSchedule& schedule, int trials,
                                  std::uint64_t seed, bool parallel) {
    params.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (static_cast<int>(schedule.price.size()) != params.horizon + 1)
        throw std::invalid_argument("schedule length does not match horizon");

    const int tw = params.horizon;
    constexpr int kBlock = 256;
    const int n_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> block_sums(
        n_blocks, std::vector<double>(tw + 1, 0.0));

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int blk = 0; blk < n_blocks; ++blk) {
        const int lo = blk * kBlock;
        const int hi = std::min(trials, lo + kBlock);
        for (int trial = lo; trial < hi; ++trial)
            accumulate_trial(params, schedule,
                             splitmix64(seed ^ (0x5deece66dULL * (trial + 1))),
                             block_sums[blk]);
    }

    // fixed-order reduction keeps the result independent of thread count
    std::vector<double> mean(tw + 1, 0.0);
    for (const auto& bs : block_sums)
        for (int t = 0; t <= tw; ++t) mean[t] += bs[t];
    for (double& v : mean) v /= trials;
    return mean;
}

}  // namespace

std::vector<double> simulate_waiting(const PricingParams& params,
                                     const PricingSchedule& schedule, int trials,
                                     std::uint64_t seed) {
    return simulate_impl(params, schedule, trials, seed, true);
}

std::vector<double> simulate_waiting_serial(const PricingParams& params,
                                            const PricingSchedule& schedule,
                                            int trials, std::uint64_t seed) {
    return simulate_impl(params, schedule, trials, seed, false);
}

double schedule_objective(const PricingParams& params, const PricingSchedule& schedule) {
    double j = 0.0;
    double disc = 1.0;
    for (int t = 0; t <= params.horizon; ++t) {
        const double w = schedule.expected_wait[t];
        const double p = schedule.price[t];
        j += disc * (w * w + params.alpha * p * p / params.b);
        disc *= params.rho;
    }
    return j;
}

namespace {

// Three-point Lagrange interpolation on a uniform grid. Exact for quadratics,
// which is what the value function is here.
double interp_quadratic(const std::vector<double>& v, double lo, double h, double x) {
    const int n = static_cast<int>(v.size());
    int i = static_cast<int>(std::lround((x - lo) / h));
    i = std::clamp(i, 1, n - 2);
    const double x0 = lo + (i - 1) * h, x1 = x0 + h, x2 = x1 + h;
    const double l0 = (x - x1) * (x - x2) / (2.0 * h * h);
    const double l1 = -(x - x0) * (x - x2) / (h * h);
    const double l2 = (x - x0) * (x - x1) / (2.0 * h * h);
    return l0 * v[i - 1] + l1 * v[i] + l2 * v[i + 1];
}

}  // namespace

OracleResult dp_oracle(const PricingParams& params, int price_grid_size) {
    params.validate();
    if (price_grid_size < 2)
        throw std::invalid_argument("price_grid_size must be >= 2");

    const int tw = params.horizon;
    const double ab = params.alpha / params.b;
    const int np = price_grid_size;
    const double hp = params.b / (np - 1);

    // The wait can grow by at most 1 per slot. The value function is
    // quadratic in the wait, so the three-point interpolation below is exact
    // and the wait grid can stay modest regardless of the price grid.
    const double w_lo = 0.0, w_hi = tw + 1.0;
    const int nw = 512;
    const double hw = (w_hi - w_lo) / (nw - 1);

    std::vector<double> v_next(nw), v_cur(nw);
    for (int i = 0; i < nw; ++i) {
        const double w = w_lo + i * hw;
        v_next[i] = w * w;  // terminal cost, p(T_w) = 0
    }

    std::vector<std::vector<double>> values(tw + 1);
    values[tw] = v_next;
    for (int t = tw - 1; t >= 0; --t) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < nw; ++i) {
            const double w = w_lo + i * hw;
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < np; ++k) {
                const double p = k * hp;
                const double w2 = w + 1.0 - ab * p;
                const double cost = w * w + ab * p * p +
                                    params.rho * interp_quadratic(v_next, w_lo, hw, w2);
                if (cost < best) best = cost;
            }
            v_cur[i] = best;
        }
        values[t] = v_cur;
        std::swap(v_next, v_cur);
    }

    // Greedy trajectory from W(0) = 0.
    OracleResult res;
    res.grid_warning = price_grid_size < 100;
    res.schedule.price.assign(tw + 1, 0.0);
    res.schedule.expected_wait.assign(tw + 1, 0.0);
    double w = 0.0;
    for (int t = 0; t < tw; ++t) {
        double best = std::numeric_limits<double>::infinity();
        double best_p = 0.0;
        for (int k = 0; k < np; ++k) {
            const double p = k * hp;
            const double w2 = w + 1.0 - ab * p;
            const double cost =
                ab * p * p + params.rho * interp_quadratic(values[t + 1], w_lo, hw, w2);
            if (cost < best) {
                best = cost;
                best_p = p;
            }
        }
        res.schedule.price[t] = best_p;
        res.schedule.expected_wait[t] = w;
        w += 1.0 - ab * best_p;
        res.schedule.expected_wait[t + 1] = w;
    }
    res.schedule.price[tw] = 0.0;
    res.value = schedule_objective(params, res.schedule);
    return res;
}

}  // namespace uavh::pricing
