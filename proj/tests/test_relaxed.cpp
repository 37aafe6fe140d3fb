#include <doctest.h>

#include <cmath>

#include "wisq/relaxed.hpp"

using namespace wisq;

namespace {

SystemConfig two_class_config() {
    SystemConfig cfg;
    cfg.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    cfg.buffer = 50;
    cfg.users = 200;
    cfg.alpha = 0.5;
    return cfg;
}

}  // namespace

TEST_CASE("dual thresholds from the index table") {
    const WhittleTable t5 = whittle_closed_form({5, 1.0, 1.0}, 50);
    SUBCASE("between two values") {
        const DualThreshold dt = dual_threshold(5.0, t5);
        CHECK(dt.upper == 2);  // 10/3 <= 5 < 7.5
        CHECK(dt.lower == 2);
        CHECK_FALSE(dt.indifferent);
    }
    SUBCASE("below every value") {
        const DualThreshold dt = dual_threshold(-1.0, t5);
        CHECK(dt.upper == -1);
        CHECK(dt.lower == -1);
    }
    SUBCASE("exactly on a value") {
        const WhittleTable t10 = whittle_closed_form({10, 1.0, 1.0}, 50);
        const DualThreshold dt = dual_threshold(10.0, t10);  // w_5 = 10 exactly
        CHECK(dt.upper == 5);
        CHECK(dt.lower == 4);
        CHECK(dt.indifferent);
    }
}

TEST_CASE("scheduled fraction under threshold vectors") {
    const std::vector<ClassSpec> classes{{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    const std::vector<CostCurve> curves{build_cost_curves(classes[0], 50),
                                        build_cost_curves(classes[1], 50)};
    SUBCASE("pure thresholds") {
        CHECK(active_fraction(classes, curves, {3, 5}, 1.0, 1, 4) == doctest::Approx(0.495));
    }
    SUBCASE("theta shifts the pivot class to the lower policy") {
        CHECK(active_fraction(classes, curves, {3, 5}, 0.0, 1, 4) == doctest::Approx(0.52));
    }
    SUBCASE("everyone transmitting") {
        CHECK(active_fraction(classes, curves, {-1, -1}, 1.0, -1, -1) == doctest::Approx(1.0));
    }
}

TEST_CASE("reference two-class solution") {
    const RelaxedSolution sol = solve_relaxed(two_class_config());
    CHECK(sol.w_star == doctest::Approx(10.0));
    CHECK(sol.pivot_class == 1);
    CHECK(sol.pivot_state == 5);
    CHECK(sol.pivot_lower == 4);
    REQUIRE(sol.thresholds.size() == 2);
    CHECK(sol.thresholds[0] == 3);
    CHECK(sol.thresholds[1] == 5);
    CHECK(sol.theta == doctest::Approx(0.8));
    CHECK(sol.cost_per_user == doctest::Approx(4.55));

    SUBCASE("constraint binds with equality") {
        const std::vector<CostCurve> curves{
            build_cost_curves(two_class_config().classes[0], 50),
            build_cost_curves(two_class_config().classes[1], 50)};
        const double active = active_fraction(two_class_config().classes, curves,
                                              sol.thresholds, sol.theta, sol.pivot_class,
                                              sol.pivot_lower);
        CHECK(active == doctest::Approx(0.5).epsilon(1e-10));
    }

    SUBCASE("proportions sum to the class masses and price the same cost") {
        double cost = 0.0;
        for (size_t k = 0; k < sol.z_star.size(); ++k) {
            double mass = 0.0;
            for (int i = 0; i <= sol.buffer; ++i) {
                const double z = sol.z_star[k][static_cast<size_t>(i)];
                CHECK(z >= -1e-12);
                mass += z;
                cost += two_class_config().classes[k].weight * z * i;
            }
            CHECK(mass == doctest::Approx(0.5).epsilon(1e-12));
        }
        CHECK(cost == doctest::Approx(sol.cost_per_user).epsilon(1e-12));
    }

    SUBCASE("pinned proportion entries") {
        CHECK(sol.z_star[0][3] == doctest::Approx(0.5 * 0.2));   // u^l(l) = rho below R
        CHECK(sol.z_star[1][5] == doctest::Approx(0.5 * 0.1));
        const SystemConfig cfg = two_class_config();
        for (size_t k = 0; k < sol.z_star.size(); ++k) {
            for (int h = sol.thresholds[k] + cfg.classes[k].rate; h <= sol.buffer; ++h)
                CHECK(sol.z_star[k][static_cast<size_t>(h)] == 0.0);
        }
    }
}

TEST_CASE("single class with an exact hit keeps theta degenerate") {
    SystemConfig cfg;
    cfg.classes = {{5, 1.0, 1.0}};
    cfg.buffer = 50;
    cfg.users = 100;
    cfg.alpha = 0.44;  // active(3) = 1 - 0.56 exactly
    const RelaxedSolution sol = solve_relaxed(cfg);
    CHECK(sol.thresholds[0] == 3);
    CHECK(sol.theta == doctest::Approx(1.0));
    CHECK(sol.cost_per_user == doctest::Approx(3.2));
}

TEST_CASE("a crossing at the very first rung") {
    // Large alpha binds while the thresholds are still at the bottom of the
    // ladder: the lowest class mixes threshold 0 with always-transmitting.
    SystemConfig cfg;
    cfg.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    cfg.buffer = 50;
    cfg.users = 100;
    cfg.alpha = 0.9;
    const RelaxedSolution sol = solve_relaxed(cfg);
    CHECK(sol.w_star == 0.0);
    CHECK(sol.pivot_class == 0);
    CHECK(sol.pivot_state == 0);
    CHECK(sol.pivot_lower == -1);
    // share(theta) = 0.5 [theta 0.8 + (1-theta)] + 0.5 = 0.9 at theta = 1
    CHECK(sol.theta == doctest::Approx(1.0));
    CHECK(sol.thresholds == std::vector<int>{0, -1});
}

TEST_CASE("alpha = 1 degenerates to everyone transmitting") {
    SystemConfig cfg;
    cfg.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    cfg.buffer = 50;
    cfg.users = 100;
    cfg.alpha = 1.0;
    const RelaxedSolution sol = solve_relaxed(cfg);
    CHECK(sol.thresholds == std::vector<int>{-1, -1});
    CHECK(sol.cost_per_user == doctest::Approx(0.5 * 2.0 + 0.5 * 4.5));
}

TEST_CASE("assumption violations are named") {
    SUBCASE("alpha below its floor") {
        SystemConfig cfg = two_class_config();
        cfg.alpha = 0.1;  // floor is 0.425 here
        const AssumptionCheck chk = check_assumptions(cfg);
        CHECK_FALSE(chk.alpha_ok);
        CHECK(chk.alpha_floor == doctest::Approx(0.425));
        CHECK_THROWS_WITH_AS(solve_relaxed(cfg), doctest::Contains("assumption 2"),
                             assumption_error);
    }
    SUBCASE("buffer below its floor") {
        SystemConfig cfg = two_class_config();
        cfg.buffer = 30;  // floor is 40.5 here
        const AssumptionCheck chk = check_assumptions(cfg);
        CHECK_FALSE(chk.buffer_ok);
        CHECK(chk.buffer_floor == doctest::Approx(40.5));
        CHECK_THROWS_WITH_AS(solve_relaxed(cfg), doctest::Contains("assumption 1"),
                             assumption_error);
    }
}

TEST_CASE("scheduled fraction is affine and nonincreasing in theta") {
    const std::vector<ClassSpec> classes{{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    const std::vector<CostCurve> curves{build_cost_curves(classes[0], 50),
                                        build_cost_curves(classes[1], 50)};
    const std::vector<int> thresholds{3, 5};
    const double at0 = active_fraction(classes, curves, thresholds, 0.0, 1, 4);
    const double at1 = active_fraction(classes, curves, thresholds, 1.0, 1, 4);
    CHECK(at1 <= at0);
    for (double theta = 0.0; theta <= 1.0; theta += 0.125) {
        const double measured = active_fraction(classes, curves, thresholds, theta, 1, 4);
        CHECK(measured == doctest::Approx(at0 + theta * (at1 - at0)).epsilon(1e-12));
    }
}

TEST_CASE("dual thresholds grow with the subsidy") {
    for (int rate : {2, 5, 10}) {
        const WhittleTable t = whittle_closed_form({rate, 1.0, 1.0}, 50);
        int prev = -1;
        for (double w = -1.0; w <= t.at(50) + 5.0; w += 0.37) {
            const DualThreshold dt = dual_threshold(w, t);
            CHECK(dt.upper >= prev);
            prev = dt.upper;
        }
    }
}

TEST_CASE("unequal weights and fractions solve cleanly") {
    SystemConfig cfg;
    cfg.classes = {{5, 2.0, 0.25}, {10, 1.0, 0.75}};
    cfg.buffer = 100;  // the weight ratio doubles the buffer floor
    cfg.users = 400;
    cfg.alpha = 0.5;
    const RelaxedSolution sol = solve_relaxed(cfg);
    const std::vector<CostCurve> curves{build_cost_curves(cfg.classes[0], cfg.buffer),
                                        build_cost_curves(cfg.classes[1], cfg.buffer)};
    CHECK(active_fraction(cfg.classes, curves, sol.thresholds, sol.theta, sol.pivot_class,
                          sol.pivot_lower) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(sol.theta >= 0.0);
    CHECK(sol.theta <= 1.0);
    for (size_t k = 0; k < cfg.classes.size(); ++k) {
        CHECK(sol.thresholds[k] < cfg.classes[k].rate);
        double mass = 0.0;
        for (int i = 0; i <= cfg.buffer; ++i) {
            CHECK(sol.z_star[k][static_cast<size_t>(i)] >= 0.0);
            mass += sol.z_star[k][static_cast<size_t>(i)];
        }
        CHECK(mass == doctest::Approx(cfg.classes[k].fraction).epsilon(1e-12));
    }
    double direct = 0.0;
    for (size_t k = 0; k < cfg.classes.size(); ++k)
        for (int i = 0; i <= cfg.buffer; ++i)
            direct += cfg.classes[k].weight * sol.z_star[k][static_cast<size_t>(i)] * i;
    CHECK(direct == doctest::Approx(sol.cost_per_user).epsilon(1e-10));
}

TEST_CASE("three cost computations agree") {
    // Ladder mixture, direct z* pricing, and the per-class curve mixture.
    for (double alpha : {0.45, 0.5, 0.6, 0.75}) {
        SystemConfig cfg = two_class_config();
        cfg.alpha = alpha;
        const RelaxedSolution sol = solve_relaxed(cfg);
        double direct = 0.0;
        for (size_t k = 0; k < sol.z_star.size(); ++k)
            for (int i = 0; i <= sol.buffer; ++i)
                direct += cfg.classes[k].weight * sol.z_star[k][static_cast<size_t>(i)] * i;
        CHECK(direct == doctest::Approx(sol.cost_per_user).epsilon(1e-10));
        double mixture = 0.0;
        for (size_t k = 0; k < cfg.classes.size(); ++k) {
            const CostCurve c = build_cost_curves(cfg.classes[k], cfg.buffer);
            if (static_cast<int>(k) == sol.pivot_class)
                mixture += cfg.classes[k].fraction *
                           (sol.theta * c.holding_at(sol.thresholds[k]) +
                            (1.0 - sol.theta) * c.holding_at(sol.pivot_lower));
            else
                mixture += cfg.classes[k].fraction * c.holding_at(sol.thresholds[k]);
        }
        CHECK(mixture == doctest::Approx(sol.cost_per_user).epsilon(1e-10));
    }
}
