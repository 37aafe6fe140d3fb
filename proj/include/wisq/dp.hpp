#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wisq/model.hpp"

namespace wisq {

/// Converged relative value iteration for the one-queue subsidy problem.
struct DpSolution {
    std::vector<double> value;   // size L+1, value[0] == 0
    double average_cost = 0.0;   // optimal long-run cost per slot
    std::vector<int> policy;     // greedy action per state, 0 = idle
    double subsidy = 0.0;        // W
    int iterations = 0;
    double span_residual = 0.0;
};

/// One Bellman sweep: V'(q) = min_s [a q + W s + E V(next)], with ties
/// broken toward staying idle.
struct BellmanResult {
    std::vector<double> value;
    std::vector<int> policy;
};
BellmanResult bellman_operator(std::span<const double> value, const ClassSpec& cls,
                               double subsidy, int buffer);

/// Span-seminorm relative value iteration from V = 0, anchored at state 0.
/// `observer`, when set, sees every anchored iterate along with the span
/// of the sweep's increment (the convergence residual at that point).
DpSolution relative_value_iteration(
    const ClassSpec& cls, double subsidy, int buffer, double tol = 1e-9,
    int max_iter = 1000000,
    const std::function<void(int, std::span<const double>, double)>& observer = nullptr);

/// Structural certificate of a converged solution.
struct StructureReport {
    bool value_monotone = true;     // V nondecreasing in q
    bool value_batch_convex = true; // V(y+R)-V(x+R) >= V(y)-V(x) for x < y
    bool policy_monotone = true;    // threshold shape
    bool action_gap_monotone = true;// active-minus-idle gap nonincreasing
    int threshold = -1;             // last idle state, -1 when always active
    bool all_pass() const {
        return value_monotone && value_batch_convex && policy_monotone && action_gap_monotone;
    }
};
StructureReport verify_structure(const DpSolution& sol, const ClassSpec& cls, int buffer);

/// Monotonicity + batch convexity over every pair, strict up to rounding.
bool value_shape_ok(std::span<const double> value, int rate);

/// Same, but with pairs kept R states clear of the buffer limit. Transition
/// rows that far down never clip, so one Bellman sweep conserves this
/// restricted shape exactly; at the clipped corner it need not.
bool value_shape_ok_unclipped(std::span<const double> value, int rate);

/// Batch convexity up to an absolute slack, monotonicity strict. Meant for
/// iterates still `slack` away from the fixed point.
bool value_shape_ok_within(std::span<const double> value, int rate, double slack);

/// Average cost of the joint relaxed problem over a small set of queues
/// (transitions independent, costs additive). Throws model_error when the
/// product state space exceeds `max_states`.
double joint_value_iteration(const std::vector<ClassSpec>& queue_classes, double subsidy,
                             int buffer, double tol = 1e-9, int max_iter = 2000000,
                             long max_states = 100000);

}  // namespace wisq
