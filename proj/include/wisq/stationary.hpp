#pragma once

#include <vector>

#include "wisq/model.hpp"

namespace wisq {

/// Buffer-to-rate regime; the stationary law has a different shape in each.
enum class BufferRegime { ShortBuffer, MidBuffer, LongBuffer };  // L<R, R<=L<2R, L>=2R

BufferRegime regime_of(int rate, int buffer);
const char* regime_name(BufferRegime r);

/// Stationary distribution of one queue under a threshold policy.
struct StationaryDist {
    std::vector<double> u;  // size L+1
    int threshold = -1;
    BufferRegime regime = BufferRegime::LongBuffer;
};

/// Closed-form stationary distribution under threshold policy `threshold`
/// (in [-1, L]). Exact case formulas; no linear solve involved.
StationaryDist stationary_closed_form(const ClassSpec& cls, int threshold, int buffer);

/// Stationary vector of an arbitrary row-stochastic kernel, by dense
/// elimination of (I - P^T) u = 0 with sum(u) = 1. States outside the
/// recurrent class come out as 0.
StationaryDist stationary_solve(const Kernel& kernel);

/// Stationary mean holding cost a_n = a * sum_q u^n(q) q.
double mean_cost(const ClassSpec& cls, int threshold, int buffer);

/// Stationary fraction of time spent at or below the threshold,
/// b_n = sum_{q<=n} u^n(q).
double passive_time(const ClassSpec& cls, int threshold, int buffer);

/// Holding-cost and passive-time curves over all thresholds n in [-1, L].
struct CostCurve {
    std::vector<double> holding;  // a_n at slot n+1
    std::vector<double> passive;  // b_n at slot n+1
    int buffer = 0;

    double holding_at(int n) const { return holding.at(static_cast<size_t>(n + 1)); }
    double passive_at(int n) const { return passive.at(static_cast<size_t>(n + 1)); }
};

CostCurve build_cost_curves(const ClassSpec& cls, int buffer);

}  // namespace wisq
