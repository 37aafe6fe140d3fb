#include "wisq/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wisq/errors.hpp"

namespace wisq {

namespace {

double expected_value(const Kernel& kernel, int from, std::span<const double> value) {
    const auto row = kernel.row(from);
    double acc = 0.0;
    for (size_t j = 0; j < row.size(); ++j) acc += row[j] * value[j];
    return acc;
}

struct SpanStats {
    double lo = 0.0;
    double hi = 0.0;
    double span() const { return hi - lo; }
    double mid() const { return 0.5 * (hi + lo); }
};

SpanStats span_of_difference(std::span<const double> a, std::span<const double> b) {
    SpanStats s;
    s.lo = s.hi = a[0] - b[0];
    for (size_t i = 1; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s.lo = std::min(s.lo, d);
        s.hi = std::max(s.hi, d);
    }
    return s;
}

}  // namespace

BellmanResult bellman_operator(std::span<const double> value, const ClassSpec& cls,
                               double subsidy, int buffer) {
    if (static_cast<int>(value.size()) != buffer + 1)
        throw std::invalid_argument("value vector must have L+1 entries");
    const Kernel idle = action_kernel(cls, 0, buffer);
    const Kernel transmit = action_kernel(cls, 1, buffer);
    BellmanResult out;
    out.value.resize(value.size());
    out.policy.resize(value.size());
    for (int q = 0; q <= buffer; ++q) {
        const double stay = cls.weight * q + expected_value(idle, q, value);
        const double send = cls.weight * q + subsidy + expected_value(transmit, q, value);
        if (stay <= send) {  // ties stay idle
            out.value[static_cast<size_t>(q)] = stay;
            out.policy[static_cast<size_t>(q)] = 0;
        } else {
            out.value[static_cast<size_t>(q)] = send;
            out.policy[static_cast<size_t>(q)] = 1;
        }
    }
    return out;
}

DpSolution relative_value_iteration(
    const ClassSpec& cls, double subsidy, int buffer, double tol, int max_iter,
    const std::function<void(int, std::span<const double>, double)>& observer) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const Kernel idle = action_kernel(cls, 0, buffer);
    const Kernel transmit = action_kernel(cls, 1, buffer);
    std::vector<double> value(static_cast<size_t>(buffer) + 1, 0.0);
    std::vector<double> raw(value.size());
    std::vector<int> policy(value.size(), 0);
    double span = 0.0, theta = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        for (int q = 0; q <= buffer; ++q) {
            const double stay = cls.weight * q + expected_value(idle, q, value);
            const double send = cls.weight * q + subsidy + expected_value(transmit, q, value);
            if (stay <= send) {
                raw[static_cast<size_t>(q)] = stay;
                policy[static_cast<size_t>(q)] = 0;
            } else {
                raw[static_cast<size_t>(q)] = send;
                policy[static_cast<size_t>(q)] = 1;
            }
        }
        const SpanStats stats = span_of_difference(raw, value);
        span = stats.span();
        theta = stats.mid();
        const double anchor = raw[0];
        for (size_t i = 0; i < raw.size(); ++i) value[i] = raw[i] - anchor;
        if (observer) observer(it, value, span);
        if (span < tol) {
            DpSolution sol;
            sol.value = value;
            sol.average_cost = theta;
            sol.policy = policy;
            sol.subsidy = subsidy;
            sol.iterations = it;
            sol.span_residual = span;
            return sol;
        }
    }
    throw convergence_error("value iteration did not converge within " +
                            std::to_string(max_iter) + " sweeps, span residual " +
                            std::to_string(span));
}

namespace {

double rounding_tol(std::span<const double> value) {
    double scale = 1.0;
    for (const double v : value) scale = std::max(scale, std::abs(v));
    return 1e-9 * scale;
}

bool shape_check(std::span<const double> value, int rate, int boundary_margin,
                 double convex_slack) {
    const int states = static_cast<int>(value.size());
    const double tol = rounding_tol(value);
    for (int q = 0; q + 1 < states; ++q)
        if (value[q + 1] < value[q] - tol) return false;
    const int top = states - 1 - boundary_margin;  // largest admissible y + R
    for (int x = 0; x < states; ++x)
        for (int y = x + 1; y + rate <= top; ++y)
            if (value[y + rate] - value[x + rate] <
                value[y] - value[x] - tol - convex_slack)
                return false;
    return true;
}

}  // namespace

bool value_shape_ok(std::span<const double> value, int rate) {
    return shape_check(value, rate, 0, 0.0);
}

bool value_shape_ok_unclipped(std::span<const double> value, int rate) {
    return shape_check(value, rate, rate, 0.0);
}

bool value_shape_ok_within(std::span<const double> value, int rate, double slack) {
    return shape_check(value, rate, 0, slack);
}

StructureReport verify_structure(const DpSolution& sol, const ClassSpec& cls, int buffer) {
    StructureReport report;
    constexpr double kTol = 1e-9;
    const int states = buffer + 1;
    for (int q = 0; q + 1 < states; ++q)
        if (sol.value[q + 1] < sol.value[q] - kTol) report.value_monotone = false;
    for (int x = 0; x < states; ++x)
        for (int y = x + 1; y + cls.rate < states; ++y)
            if (sol.value[y + cls.rate] - sol.value[x + cls.rate] <
                sol.value[y] - sol.value[x] - kTol)
                report.value_batch_convex = false;
    for (int q = 0; q + 1 < states; ++q)
        if (sol.policy[q] == 1 && sol.policy[q + 1] == 0) report.policy_monotone = false;
    // Active-minus-idle gap of the converged operator must shrink with q.
    // Idle rows clip at the buffer from q = L-R+1 on, which flattens their
    // expectation and lets the gap turn back up while staying on one side
    // of zero; the submodularity claim lives on the unclipped rows.
    const Kernel idle = action_kernel(cls, 0, buffer);
    const Kernel transmit = action_kernel(cls, 1, buffer);
    double prev_gap = 0.0;
    for (int q = 0; q <= buffer - cls.rate; ++q) {
        const double gap = sol.subsidy + expected_value(transmit, q, sol.value) -
                           expected_value(idle, q, sol.value);
        if (q > 0 && gap > prev_gap + kTol) report.action_gap_monotone = false;
        prev_gap = gap;
    }
    for (int q = 0; q < states; ++q)
        if (sol.policy[q] == 0) report.threshold = q;
    if (sol.policy[0] == 1) report.threshold = -1;
    return report;
}

double joint_value_iteration(const std::vector<ClassSpec>& queue_classes, double subsidy,
                             int buffer, double tol, int max_iter, long max_states) {
    if (queue_classes.empty()) throw std::invalid_argument("need at least one queue");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int q_count = static_cast<int>(queue_classes.size());
    const long side = buffer + 1;
    long states = 1;
    for (int k = 0; k < q_count; ++k) {
        states *= side;
        if (states > max_states)
            throw model_error("joint state space exceeds the cap of " +
                              std::to_string(max_states) + " states");
    }

    std::vector<Kernel> idle, transmit;
    for (const auto& cls : queue_classes) {
        idle.push_back(action_kernel(cls, 0, buffer));
        transmit.push_back(action_kernel(cls, 1, buffer));
    }

    // Holding cost per joint state (subsidy added per active queue later).
    std::vector<double> hold(static_cast<size_t>(states), 0.0);
    for (long s = 0; s < states; ++s) {
        long rest = s;
        double acc = 0.0;
        for (int k = 0; k < q_count; ++k) {
            acc += queue_classes[k].weight * static_cast<double>(rest % side);
            rest /= side;
        }
        hold[static_cast<size_t>(s)] = acc;
    }

    // Contract one queue axis with a kernel: out(.., q, ..) = sum_j P(q, j) in(.., j, ..).
    auto contract = [&](const std::vector<double>& in, const Kernel& kernel, int axis) {
        std::vector<double> out(in.size(), 0.0);
        long stride = 1;
        for (int k = 0; k < axis; ++k) stride *= side;
        const long block = stride * side;
        for (long base = 0; base < states; base += block) {
            for (long off = 0; off < stride; ++off) {
                for (long q = 0; q < side; ++q) {
                    double acc = 0.0;
                    const auto row = kernel.row(static_cast<int>(q));
                    for (long j = 0; j < side; ++j)
                        acc += row[static_cast<size_t>(j)] *
                               in[static_cast<size_t>(base + off + j * stride)];
                    out[static_cast<size_t>(base + off + q * stride)] = acc;
                }
            }
        }
        return out;
    };

    std::vector<double> value(static_cast<size_t>(states), 0.0);
    std::vector<double> raw(value.size());
    double span = 0.0, theta = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        // Expectation tensors for every action combination, one axis at a time.
        std::vector<std::vector<double>> expect{value};
        for (int axis = 0; axis < q_count; ++axis) {
            std::vector<std::vector<double>> next;
            next.reserve(expect.size() * 2);
            for (const auto& tensor : expect) {
                next.push_back(contract(tensor, idle[static_cast<size_t>(axis)], axis));
                next.push_back(contract(tensor, transmit[static_cast<size_t>(axis)], axis));
            }
            expect = std::move(next);
        }
        const int combos = 1 << q_count;
        for (long s = 0; s < states; ++s) {
            double best = 0.0;
            for (int mask = 0; mask < combos; ++mask) {
                const double candidate = subsidy * __builtin_popcount(mask) +
                                         expect[static_cast<size_t>(mask)][static_cast<size_t>(s)];
                if (mask == 0 || candidate < best) best = candidate;
            }
            raw[static_cast<size_t>(s)] = hold[static_cast<size_t>(s)] + best;
        }
        const SpanStats stats = span_of_difference(raw, value);
        span = stats.span();
        theta = stats.mid();
        const double anchor = raw[0];
        for (size_t i = 0; i < raw.size(); ++i) value[i] = raw[i] - anchor;
        if (span < tol) return theta;
    }
    throw convergence_error("joint value iteration did not converge, span residual " +
                            std::to_string(span));
}

}  // namespace wisq
