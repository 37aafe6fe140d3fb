#pragma once

#include <span>
#include <vector>

#include "wisq/linalg.hpp"
#include "wisq/relaxed.hpp"

namespace wisq {

/// Affine map z~(t+1) = Q z~(t) + C approximating the drift of the
/// per-state population proportions under the index policy, in reduced
/// coordinates (state l_k dropped per class, recoverable from the class
/// masses). Full vectors are flattened as [class * (L+1) + state].
struct FluidSystem {
    Matrix map;                  // Q
    std::vector<double> offset;  // C
    std::vector<ClassSpec> classes;
    std::vector<int> removed;  // dropped state per class (the thresholds)
    int buffer = 0;
    double alpha = 0.0;
    double w_star = 0.0;
    std::vector<std::vector<double>> index;  // per class, per state
    RelaxedSolution solution;                // what the map was built from

    int reduced_dim() const { return static_cast<int>(classes.size()) * buffer; }
    int full_dim() const { return static_cast<int>(classes.size()) * (buffer + 1); }
    /// Coordinate of (class, state) in the reduced vector; -1 if dropped.
    int coord(int k, int state) const;

    std::vector<double> reduce(std::span<const double> full) const;
    std::vector<double> expand(std::span<const double> reduced) const;
};

FluidSystem build_fluid_map(const RelaxedSolution& solution,
                            const std::vector<ClassSpec>& classes, int buffer, double alpha,
                            const std::vector<WhittleTable>& tables);
FluidSystem build_fluid_map(const RelaxedSolution& solution,
                            const std::vector<ClassSpec>& classes, int buffer, double alpha);

/// Membership in the switching set: everyone priced above w* fits in the
/// budget, everyone priced at or above covers it.
bool in_switching_set(const FluidSystem& system, std::span<const double> full_z);

struct FluidTrajectory {
    std::vector<std::vector<double>> z;  // full coordinates, z[0] = start
    bool start_inside = true;
};

/// Iterate the affine map `steps` times from a full proportion vector.
/// A start outside the switching set only voids the contraction guarantee;
/// the iteration itself proceeds.
FluidTrajectory iterate_fluid(const FluidSystem& system, std::span<const double> z0_full,
                              int steps);

/// Fixed point of the affine map by dense solve of (I - Q) z~ = C,
/// expanded back to full coordinates.
std::vector<double> fluid_fixed_point(const FluidSystem& system);

/// Flatten the per-class z* of a relaxed solution into fluid layout.
std::vector<double> flatten_proportions(const std::vector<std::vector<double>>& z);

}  // namespace wisq
