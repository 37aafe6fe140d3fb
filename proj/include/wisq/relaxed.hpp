#pragma once

#include <vector>

#include "wisq/whittle.hpp"

namespace wisq {

/// Optimal per-class threshold for a given subsidy. `upper` uses the weak
/// rule (index <= W), `lower` the strict one (index < W); they differ
/// exactly when W hits an index value, in which case both thresholds are
/// optimal and `indifferent` is set.
struct DualThreshold {
    int lower = -1;
    int upper = -1;
    bool indifferent = false;
};

DualThreshold dual_threshold(double subsidy, const WhittleTable& table);

/// Fraction of users scheduled under threshold vector l, with class
/// `randomized_class` mixing thresholds upper/lower with weights
/// theta / (1 - theta). Pass randomized_class = -1 for a pure threshold
/// vector.
double active_fraction(const std::vector<ClassSpec>& classes,
                       const std::vector<CostCurve>& curves, const std::vector<int>& thresholds,
                       double theta, int randomized_class, int lower_threshold);

/// Solution of the time-averaged-budget problem: thresholds per class, the
/// critical subsidy, the single randomized class and mixing weight, the
/// stationary proportions and the per-user cost (a lower bound for every
/// hard-budget policy).
struct RelaxedSolution {
    double w_star = 0.0;
    int pivot_class = 0;          // m
    int pivot_state = -1;         // p, with index(m, p) == w_star
    int pivot_lower = -1;         // partner threshold mixed with weight 1 - theta
    std::vector<int> thresholds;  // l_k, one per class
    double theta = 1.0;
    std::vector<std::vector<double>> z_star;  // [class][state], sums to gamma_k
    double cost_per_user = 0.0;
    int buffer = 0;
    double alpha = 0.0;
};

struct AssumptionCheck {
    bool buffer_ok = false;
    double buffer_floor = 0.0;  // L must exceed this
    bool alpha_ok = false;
    double alpha_floor = 0.0;  // alpha must reach this
};

AssumptionCheck check_assumptions(const SystemConfig& config);

/// Stationary proportions under the solved thresholds; class
/// `randomized_class` gets the theta-mixture of its two policies.
std::vector<std::vector<double>> optimal_proportions(const std::vector<ClassSpec>& classes,
                                                     int buffer,
                                                     const std::vector<int>& thresholds,
                                                     int randomized_class, int lower_threshold,
                                                     double theta);

/// Throws assumption_error when the structural bounds fail, model_error when
/// no budget crossing exists.
RelaxedSolution solve_relaxed(const SystemConfig& config);
RelaxedSolution solve_relaxed(const SystemConfig& config,
                              const std::vector<WhittleTable>& tables);

}  // namespace wisq
