#include <doctest.h>

#include <cmath>

#include "wisq/dp.hpp"
#include "wisq/relaxed.hpp"
#include "wisq/rng.hpp"

using namespace wisq;

TEST_CASE("single Bellman sweep") {
    const ClassSpec cls{5, 1.0, 1.0};
    SUBCASE("zero value, zero subsidy: one-step cost, always transmit-tied") {
        const std::vector<double> zero(31, 0.0);
        const BellmanResult r = bellman_operator(zero, cls, 0.0, 30);
        for (int q = 0; q <= 30; ++q) {
            CHECK(r.value[static_cast<size_t>(q)] == doctest::Approx(q));
            CHECK(r.policy[static_cast<size_t>(q)] == 0);  // ties go idle
        }
    }
    SUBCASE("positive subsidy keeps small queues idle") {
        const std::vector<double> zero(31, 0.0);
        const BellmanResult r = bellman_operator(zero, cls, 3.0, 30);
        CHECK(r.policy[2] == 0);
        CHECK(r.value[2] == doctest::Approx(2.0));
    }
    SUBCASE("length mismatch is rejected") {
        const std::vector<double> wrong(7, 0.0);
        CHECK_THROWS_AS(bellman_operator(wrong, cls, 0.0, 30), std::invalid_argument);
    }
}

TEST_CASE("the sweep conserves monotonicity and batch convexity") {
    // Random increasing functions whose increments satisfy g(x+R) >= g(x);
    // that is exactly batch convexity by the telescoping argument.
    for (int instance = 0; instance < 100; ++instance) {
        const int rate = 2 + static_cast<int>(draw_below(7, 1, instance, 0, 5));
        const int buffer = 10 + static_cast<int>(draw_below(7, 2, instance, 0, 30));
        const double subsidy = 5.0 * draw_unit(7, 3, instance, 0);
        const ClassSpec cls{rate, 1.0, 1.0};
        std::vector<double> value(static_cast<size_t>(buffer) + 1, 0.0);
        std::vector<double> inc(static_cast<size_t>(buffer), 0.0);
        for (int x = 0; x < buffer; ++x) {
            if (x < rate) inc[static_cast<size_t>(x)] = draw_unit(7, 4, instance, x);
            else
                inc[static_cast<size_t>(x)] =
                    inc[static_cast<size_t>(x - rate)] + 0.5 * draw_unit(7, 5, instance, x);
            value[static_cast<size_t>(x + 1)] = value[static_cast<size_t>(x)] +
                                                inc[static_cast<size_t>(x)];
        }
        REQUIRE(value_shape_ok(value, rate));
        const BellmanResult r = bellman_operator(value, cls, subsidy, buffer);
        CAPTURE(instance);
        // Exact conservation holds wherever the transition rows do not clip
        // at the buffer; the corner pairs can genuinely dip.
        CHECK(value_shape_ok_unclipped(r.value, rate));
    }
}

TEST_CASE("value iteration finds the predicted thresholds") {
    const ClassSpec cls{5, 1.0, 1.0};
    SUBCASE("subsidy inside an index gap") {
        const DpSolution sol = relative_value_iteration(cls, 10.0, 30);
        const StructureReport report = verify_structure(sol, cls, 30);
        CHECK(report.all_pass());
        CHECK(report.threshold == 3);  // between w_3 = 7.5 and w_4 = 20
    }
    SUBCASE("free transmission") {
        // At W = 0 the empty state is exactly indifferent (its index is 0)
        // and the tie rule keeps it passive; any W < 0 forces transmission
        // everywhere.
        const DpSolution at_zero = relative_value_iteration(cls, 0.0, 30);
        CHECK(verify_structure(at_zero, cls, 30).threshold == 0);
        const DpSolution negative = relative_value_iteration(cls, -0.5, 30);
        CHECK(verify_structure(negative, cls, 30).threshold == -1);
    }
    SUBCASE("overwhelming subsidy") {
        const DpSolution sol = relative_value_iteration(cls, 1e6, 30);
        CHECK(verify_structure(sol, cls, 30).threshold == 30);
    }
    SUBCASE("bad tolerance") {
        CHECK_THROWS_AS(relative_value_iteration(cls, 1.0, 30, 0.0), std::invalid_argument);
    }
}

TEST_CASE("structure report flags a fabricated dip") {
    const ClassSpec cls{2, 1.0, 1.0};
    DpSolution sol = relative_value_iteration(cls, 1.5, 6);
    REQUIRE(verify_structure(sol, cls, 6).all_pass());
    sol.value[3] = sol.value[4] + 1.0;  // plant a non-monotone bump
    CHECK_FALSE(verify_structure(sol, cls, 6).value_monotone);
}

TEST_CASE("extracted threshold matches the dual threshold across gaps") {
    for (int rate : {2, 5}) {
        const ClassSpec cls{rate, 1.0, 1.0};
        const int buffer = 12;
        const WhittleTable table = whittle_closed_form(cls, buffer);
        std::vector<double> probes{-0.5};
        for (int n = 0; n < buffer; ++n)
            if (table.at(n + 1) > table.at(n) + 1e-12)
                probes.push_back(0.5 * (table.at(n) + table.at(n + 1)));
        probes.push_back(table.at(buffer) + 1.0);
        for (const double w : probes) {
            const DpSolution sol = relative_value_iteration(cls, w, buffer);
            const StructureReport report = verify_structure(sol, cls, buffer);
            CAPTURE(rate);
            CAPTURE(w);
            CHECK(report.threshold == dual_threshold(w, table).upper);
            CHECK(report.value_monotone);
            if (w < table.at(buffer)) {
                CHECK(report.all_pass());
            } else {
                // Above the top index value every queue idles into the buffer
                // limit. The average cost pins at a L; the greedy may still
                // transmit at transient mid states (a bias tie), so only the
                // average cost is contractual here.
                CHECK(sol.average_cost == doctest::Approx(1.0 * buffer).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("at an index value the pivot state is indifferent") {
    const ClassSpec cls{5, 1.0, 1.0};
    const int buffer = 30;
    const double tol = 1e-9;
    for (int n : {1, 2, 3}) {
        const double w = 5.0 * n / (5 - n);  // w_n exactly
        const DpSolution sol = relative_value_iteration(cls, w, buffer, tol);
        const Kernel idle = action_kernel(cls, 0, buffer);
        const Kernel transmit = action_kernel(cls, 1, buffer);
        double e_idle = 0.0, e_tx = 0.0;
        for (int j = 0; j <= buffer; ++j) {
            e_idle += idle.at(n, j) * sol.value[static_cast<size_t>(j)];
            e_tx += transmit.at(n, j) * sol.value[static_cast<size_t>(j)];
        }
        const double gap = w + e_tx - e_idle;
        CAPTURE(n);
        CHECK(std::abs(gap) < 10.0 * tol);
    }
}

TEST_CASE("running out of sweeps raises a convergence error") {
    const ClassSpec cls{5, 1.0, 1.0};
    CHECK_THROWS_AS(relative_value_iteration(cls, 3.0, 30, 1e-12, 3), convergence_error);
}

TEST_CASE("joint relaxed cost decomposes into per-queue costs") {
    SUBCASE("two identical queues") {
        const ClassSpec cls{2, 1.0, 1.0};
        const double joint = joint_value_iteration({cls, cls}, 1.0, 4, 1e-10);
        const double solo = relative_value_iteration(cls, 1.0, 4, 1e-12).average_cost;
        CHECK(joint == doctest::Approx(2.0 * solo).epsilon(1e-6));
    }
    SUBCASE("one queue degenerates to the scalar problem") {
        const ClassSpec cls{3, 1.0, 1.0};
        const double joint = joint_value_iteration({cls}, 2.0, 6, 1e-10);
        const double solo = relative_value_iteration(cls, 2.0, 6, 1e-12).average_cost;
        CHECK(joint == doctest::Approx(solo).epsilon(1e-8));
    }
    SUBCASE("two different classes") {
        const ClassSpec a{2, 1.0, 1.0};
        const ClassSpec b{3, 1.0, 1.0};
        const double joint = joint_value_iteration({a, b}, 2.0, 5, 1e-10);
        const double solo = relative_value_iteration(a, 2.0, 5, 1e-12).average_cost +
                            relative_value_iteration(b, 2.0, 5, 1e-12).average_cost;
        CHECK(joint == doctest::Approx(solo).epsilon(1e-6));
    }
    SUBCASE("three queues") {
        const ClassSpec cls{2, 1.0, 1.0};
        const double joint = joint_value_iteration({cls, cls, cls}, 1.5, 5, 1e-10);
        const double solo = relative_value_iteration(cls, 1.5, 5, 1e-12).average_cost;
        CHECK(joint == doctest::Approx(3.0 * solo).epsilon(1e-6));
    }
    SUBCASE("the state-space cap holds") {
        const ClassSpec cls{2, 1.0, 1.0};
        CHECK_THROWS_AS(joint_value_iteration({cls, cls, cls}, 1.0, 100), model_error);
    }
}

TEST_CASE("shape conservation along the whole iteration path") {
    // The shape emerges with convergence: iterates may dip near the clipped
    // buffer corner by no more than a multiple of their remaining span
    // residual, and the converged function is clean outright.
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const int rate = 2 + static_cast<int>(draw_below(13, 1, seed, 0, 4));
        const double w = 8.0 * draw_unit(13, 2, seed, 0);
        const ClassSpec cls{rate, 1.0, 1.0};
        int bad = 0;
        const DpSolution sol = relative_value_iteration(
            cls, w, 25, 1e-8, 1000000, [&](int, std::span<const double> v, double span) {
                if (!value_shape_ok_within(v, rate, 20.0 * span)) ++bad;
            });
        CAPTURE(seed);
        CHECK(bad == 0);
        CHECK(value_shape_ok(sol.value, rate));
    }
}
