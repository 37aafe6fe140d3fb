#include "wisq/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wisq/errors.hpp"

namespace wisq {

DualThreshold dual_threshold(double subsidy, const WhittleTable& table) {
    DualThreshold out;
    for (int n = 0; n < table.states(); ++n) {
        if (table.at(n) <= subsidy) out.upper = n;
        if (table.at(n) < subsidy) out.lower = n;
    }
    out.indifferent = out.upper != out.lower;
    return out;
}

double active_fraction(const std::vector<ClassSpec>& classes,
                       const std::vector<CostCurve>& curves, const std::vector<int>& thresholds,
                       double theta, int randomized_class, int lower_threshold) {
    double total = 0.0;
    for (size_t k = 0; k < classes.size(); ++k) {
        const double active_upper = 1.0 - curves[k].passive_at(thresholds[k]);
        if (static_cast<int>(k) == randomized_class) {
            const double active_lower = 1.0 - curves[k].passive_at(lower_threshold);
            total += classes[k].fraction * (theta * active_upper + (1.0 - theta) * active_lower);
        } else {
            total += classes[k].fraction * active_upper;
        }
    }
    return total;
}

AssumptionCheck check_assumptions(const SystemConfig& config) {
    AssumptionCheck out;
    double weight_ratio = 1.0;
    double rate_term = 0.0;
    double alpha_floor = 0.5;
    int max_rate = 2;
    for (const auto& ci : config.classes) {
        rate_term = std::max(rate_term, (ci.rate - 1.0) * (ci.rate - 1.0) / 2.0);
        alpha_floor -= ci.fraction / (2.0 * ci.rate);
        max_rate = std::max(max_rate, ci.rate);
        for (const auto& cj : config.classes)
            weight_ratio = std::max(weight_ratio, cj.weight / ci.weight);
    }
    // The structural characterization needs the long-buffer regime for every
    // class on top of the printed bound.
    out.buffer_floor = std::max(weight_ratio * rate_term, 2.0 * max_rate - 1.0);
    out.buffer_ok = config.buffer > out.buffer_floor;
    out.alpha_floor = alpha_floor;
    out.alpha_ok = config.alpha >= alpha_floor - 1e-12;
    return out;
}

std::vector<std::vector<double>> optimal_proportions(const std::vector<ClassSpec>& classes,
                                                     int buffer,
                                                     const std::vector<int>& thresholds,
                                                     int randomized_class, int lower_threshold,
                                                     double theta) {
    std::vector<std::vector<double>> z(classes.size());
    for (size_t k = 0; k < classes.size(); ++k) {
        const StationaryDist upper = stationary_closed_form(classes[k], thresholds[k], buffer);
        z[k].assign(static_cast<size_t>(buffer) + 1, 0.0);
        if (static_cast<int>(k) == randomized_class && theta < 1.0) {
            const StationaryDist lower =
                stationary_closed_form(classes[k], lower_threshold, buffer);
            for (int i = 0; i <= buffer; ++i)
                z[k][static_cast<size_t>(i)] = classes[k].fraction *
                    (theta * upper.u[static_cast<size_t>(i)] +
                     (1.0 - theta) * lower.u[static_cast<size_t>(i)]);
        } else {
            for (int i = 0; i <= buffer; ++i)
                z[k][static_cast<size_t>(i)] =
                    classes[k].fraction * upper.u[static_cast<size_t>(i)];
        }
    }
    return z;
}

namespace {

RelaxedSolution assemble(const SystemConfig& config, const std::vector<CostCurve>& curves,
                         double w_star, int m, int p, int lower, double theta,
                         std::vector<int> thresholds) {
    for (size_t k = 0; k < config.classes.size(); ++k) {
        if (thresholds[k] >= config.classes[k].rate) {
            std::ostringstream msg;
            msg << "solved threshold " << thresholds[k] << " for class " << k
                << " is not below its rate " << config.classes[k].rate
                << "; the structural characterization does not apply";
            throw model_error(msg.str());
        }
    }
    RelaxedSolution sol;
    sol.w_star = w_star;
    sol.pivot_class = m;
    sol.pivot_state = p;
    sol.pivot_lower = lower;
    sol.theta = theta;
    sol.thresholds = std::move(thresholds);
    sol.buffer = config.buffer;
    sol.alpha = config.alpha;
    sol.z_star = optimal_proportions(config.classes, config.buffer, sol.thresholds,
                                     sol.pivot_class, sol.pivot_lower, sol.theta);
    double cost = 0.0;
    for (size_t k = 0; k < config.classes.size(); ++k) {
        const double upper_cost = curves[k].holding_at(sol.thresholds[k]);
        if (static_cast<int>(k) == sol.pivot_class) {
            const double lower_cost = curves[k].holding_at(sol.pivot_lower);
            cost += config.classes[k].fraction *
                    (sol.theta * upper_cost + (1.0 - sol.theta) * lower_cost);
        } else {
            cost += config.classes[k].fraction * upper_cost;
        }
    }
    sol.cost_per_user = cost;
    return sol;
}

}  // namespace

RelaxedSolution solve_relaxed(const SystemConfig& config) {
    std::vector<WhittleTable> tables;
    tables.reserve(config.classes.size());
    for (const auto& cls : config.classes)
        tables.push_back(whittle_closed_form(cls, config.buffer));
    return solve_relaxed(config, tables);
}

RelaxedSolution solve_relaxed(const SystemConfig& config,
                              const std::vector<WhittleTable>& tables) {
    config.validate_classes();  // the relaxed solution is per-user: N plays no role
    const AssumptionCheck chk = check_assumptions(config);
    if (!chk.buffer_ok) {
        std::ostringstream msg;
        msg << "assumption 1 (buffer size) violated: L = " << config.buffer
            << " must exceed " << chk.buffer_floor;
        throw assumption_error(msg.str());
    }
    if (!chk.alpha_ok) {
        std::ostringstream msg;
        msg << "assumption 2 (channel fraction) violated: alpha = " << config.alpha
            << " is below the floor " << chk.alpha_floor;
        throw assumption_error(msg.str());
    }

    const size_t K = config.classes.size();
    std::vector<CostCurve> curves;
    curves.reserve(K);
    for (const auto& t : tables) curves.push_back(t.curves);

    // Subsidy ladder: the distinct index values across all classes. Between
    // two rungs no threshold moves, so the scheduled fraction is a step
    // function that only drops at rungs.
    std::vector<double> rungs;
    for (const auto& t : tables) rungs.insert(rungs.end(), t.index.begin(), t.index.end());
    std::sort(rungs.begin(), rungs.end());
    rungs.erase(std::unique(rungs.begin(), rungs.end()), rungs.end());

    std::vector<int> thresholds(K, -1);
    double active = 1.0;  // everyone transmits below the lowest rung
    constexpr double kEq = 1e-12;

    if (std::abs(active - config.alpha) <= kEq) {
        // alpha = 1: the budget never binds and every queue always transmits.
        return assemble(config, curves, 0.0, 0, -1, -1, 1.0, std::move(thresholds));
    }

    // Recomputing the scheduled share from scratch on every jump keeps the
    // sweep free of accumulation drift across hundreds of rungs.
    auto share_of = [&](const std::vector<int>& l) {
        double total = 0.0;
        for (size_t k = 0; k < K; ++k)
            total += config.classes[k].fraction * (1.0 - curves[k].passive_at(l[k]));
        return total;
    };

    for (const double w : rungs) {
        // Classes whose threshold jumps at this rung, lowest class first.
        for (size_t k = 0; k < K; ++k) {
            const DualThreshold dt = dual_threshold(w, tables[k]);
            if (dt.upper <= thresholds[k]) continue;
            const int old_l = thresholds[k];
            const int new_l = dt.upper;
            const double delta = config.classes[k].fraction *
                                 (curves[k].passive_at(new_l) - curves[k].passive_at(old_l));
            std::vector<int> jumped = thresholds;
            jumped[k] = new_l;
            const double after = share_of(jumped);
            if (after > config.alpha + kEq) {  // still over budget, keep climbing
                thresholds[k] = new_l;
                active = after;
                continue;
            }
            thresholds[k] = new_l;
            if (after >= config.alpha - kEq) {
                // The rung lands on the budget exactly: degenerate mixture.
                return assemble(config, curves, w, static_cast<int>(k), new_l, old_l, 1.0,
                                std::move(thresholds));
            }
            // The budget is crossed inside this class's jump; mix the two
            // threshold policies so the constraint binds with equality.
            const double theta = (active - config.alpha) / delta;
            return assemble(config, curves, w, static_cast<int>(k), new_l, old_l, theta,
                            std::move(thresholds));
        }
    }
    throw model_error("no budget crossing found along the index ladder");
}

}  // namespace wisq
