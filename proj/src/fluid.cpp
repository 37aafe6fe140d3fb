#include "wisq/fluid.hpp"

#include <cmath>
#include <string>

#include "wisq/errors.hpp"

namespace wisq {

int FluidSystem::coord(int k, int state) const {
    if (state == removed[static_cast<size_t>(k)]) return -1;
    const int base = k * buffer;
    return state < removed[static_cast<size_t>(k)] ? base + state : base + state - 1;
}

std::vector<double> FluidSystem::reduce(std::span<const double> full) const {
    std::vector<double> out(static_cast<size_t>(reduced_dim()), 0.0);
    for (size_t k = 0; k < classes.size(); ++k)
        for (int i = 0; i <= buffer; ++i) {
            const int c = coord(static_cast<int>(k), i);
            if (c >= 0) out[static_cast<size_t>(c)] = full[k * (buffer + 1) + i];
        }
    return out;
}

std::vector<double> FluidSystem::expand(std::span<const double> reduced) const {
    std::vector<double> out(static_cast<size_t>(full_dim()), 0.0);
    for (size_t k = 0; k < classes.size(); ++k) {
        double rest = 0.0;
        for (int i = 0; i <= buffer; ++i) {
            const int c = coord(static_cast<int>(k), i);
            if (c >= 0) {
                out[k * (buffer + 1) + i] = reduced[static_cast<size_t>(c)];
                rest += reduced[static_cast<size_t>(c)];
            }
        }
        // The dropped coordinate carries the remaining class mass.
        out[k * (buffer + 1) + removed[k]] = classes[k].fraction - rest;
    }
    return out;
}

FluidSystem build_fluid_map(const RelaxedSolution& solution,
                            const std::vector<ClassSpec>& classes, int buffer, double alpha) {
    std::vector<WhittleTable> tables;
    tables.reserve(classes.size());
    for (const auto& cls : classes) tables.push_back(whittle_closed_form(cls, buffer));
    return build_fluid_map(solution, classes, buffer, alpha, tables);
}

FluidSystem build_fluid_map(const RelaxedSolution& solution,
                            const std::vector<ClassSpec>& classes, int buffer, double alpha,
                            const std::vector<WhittleTable>& tables) {
    const int K = static_cast<int>(classes.size());
    if (static_cast<int>(solution.thresholds.size()) != K)
        throw std::invalid_argument("solution and class list disagree on the class count");
    for (int k = 0; k < K; ++k)
        if (solution.thresholds[k] < 0 || solution.thresholds[k] > buffer)
            throw std::invalid_argument("fluid map needs thresholds inside [0, L]");

    FluidSystem sys;
    sys.classes = classes;
    sys.buffer = buffer;
    sys.alpha = alpha;
    sys.removed = solution.thresholds;
    sys.w_star = solution.w_star;
    sys.solution = solution;
    for (const auto& t : tables) sys.index.push_back(t.index);

    const int m = solution.pivot_class;
    const int dim = sys.reduced_dim();
    sys.map = Matrix(dim, dim);
    sys.offset.assign(static_cast<size_t>(dim), 0.0);

    std::vector<Kernel> idle, transmit;
    for (const auto& cls : classes) {
        idle.push_back(action_kernel(cls, 0, buffer));
        transmit.push_back(action_kernel(cls, 1, buffer));
    }

    for (int k = 0; k < K; ++k) {
        const int lk = sys.removed[static_cast<size_t>(k)];
        const double gamma = classes[static_cast<size_t>(k)].fraction;
        for (int i = 0; i <= buffer; ++i) {
            const int row = sys.coord(k, i);
            if (row < 0) continue;
            // Within-class block.
            for (int j = 0; j <= buffer; ++j) {
                const int col = sys.coord(k, j);
                if (col < 0) continue;
                double v;
                if (j < lk) {
                    v = idle[k].at(j, i) - idle[k].at(lk, i);
                } else if (k == m) {
                    v = transmit[k].at(j, i) - transmit[k].at(lk, i);
                } else {
                    v = transmit[k].at(j, i) - idle[k].at(lk, i);
                }
                sys.map.at(row, col) = v;
            }
            if (k != m) {
                sys.offset[static_cast<size_t>(row)] = gamma * idle[k].at(lk, i);
            }
        }
    }

    // The pivot class absorbs the leftover budget, which couples its rows to
    // every other class's above-threshold coordinates.
    const int lm = sys.removed[static_cast<size_t>(m)];
    for (int i = 0; i <= buffer; ++i) {
        const int row = sys.coord(m, i);
        if (row < 0) continue;
        const double swing = idle[m].at(lm, i) - transmit[m].at(lm, i);
        for (int h = 0; h < K; ++h) {
            if (h == m) continue;
            const int lh = sys.removed[static_cast<size_t>(h)];
            for (int j = lh + 1; j <= buffer; ++j) {
                const int col = sys.coord(h, j);
                if (col >= 0) sys.map.at(row, col) = swing;
            }
        }
        double g = 0.0;
        for (int h = 0; h < K; ++h) {
            if (h == m) continue;
            const int lh = sys.removed[static_cast<size_t>(h)];
            const bool above = sys.index[static_cast<size_t>(h)][static_cast<size_t>(lh)] >
                               solution.w_star;
            g += classes[static_cast<size_t>(h)].fraction *
                 (above ? transmit[m].at(lm, i) : idle[m].at(lm, i));
        }
        sys.offset[static_cast<size_t>(row)] =
            (1.0 - alpha) * idle[m].at(lm, i) + alpha * transmit[m].at(lm, i) - g;
    }
    return sys;
}

bool in_switching_set(const FluidSystem& system, std::span<const double> full_z) {
    double above = 0.0, at_or_above = 0.0;
    const int L = system.buffer;
    for (size_t k = 0; k < system.classes.size(); ++k)
        for (int i = 0; i <= L; ++i) {
            const double z = full_z[k * (L + 1) + i];
            const double w = system.index[k][static_cast<size_t>(i)];
            if (w > system.w_star) above += z;
            if (w >= system.w_star) at_or_above += z;
        }
    return above < system.alpha - 1e-12 && at_or_above >= system.alpha - 1e-12;
}

FluidTrajectory iterate_fluid(const FluidSystem& system, std::span<const double> z0_full,
                              int steps) {
    if (static_cast<int>(z0_full.size()) != system.full_dim())
        throw std::invalid_argument("start vector has the wrong dimension");
    FluidTrajectory out;
    out.start_inside = in_switching_set(system, z0_full);
    std::vector<double> reduced = system.reduce(z0_full);
    out.z.emplace_back(z0_full.begin(), z0_full.end());
    for (int t = 0; t < steps; ++t) {
        std::vector<double> next = mat_vec(system.map, reduced);
        for (size_t i = 0; i < next.size(); ++i) next[i] += system.offset[i];
        reduced = std::move(next);
        out.z.push_back(system.expand(reduced));
    }
    return out;
}

std::vector<double> fluid_fixed_point(const FluidSystem& system) {
    const int dim = system.reduced_dim();
    Matrix a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a.at(r, c) = (r == c ? 1.0 : 0.0) - system.map.at(r, c);
    std::vector<double> fixed = solve_dense(std::move(a), system.offset);
    return system.expand(fixed);
}

std::vector<double> flatten_proportions(const std::vector<std::vector<double>>& z) {
    std::vector<double> out;
    for (const auto& zk : z) out.insert(out.end(), zk.begin(), zk.end());
    return out;
}

}  // namespace wisq
