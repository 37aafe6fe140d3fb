#include <doctest.h>

#include "oracles.hpp"
#include "wisq/model.hpp"

using namespace wisq;

TEST_CASE("arrival law is uniform on {0..R-1}") {
    CHECK(arrival_pmf({5, 1.0, 1.0}) == std::vector<double>(5, 0.2));
    CHECK(arrival_pmf({2, 1.0, 1.0}) == std::vector<double>(2, 0.5));
    const auto ten = arrival_pmf({10, 1.0, 1.0});
    REQUIRE(ten.size() == 10);
    double sum = 0.0;
    for (double p : ten) {
        CHECK(p == doctest::Approx(0.1));
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("one-slot queue update") {
    const ClassSpec cls{5, 1.0, 1.0};
    CHECK(step_queue(7, 1, 3, cls, 50) == 5);
    CHECK(step_queue(2, 1, 4, cls, 50) == 4);  // drains below zero, clamped
    CHECK(step_queue(49, 0, 4, cls, 50) == 50);
    CHECK_THROWS_AS(step_queue(51, 0, 0, cls, 50), std::invalid_argument);
    CHECK_THROWS_AS(step_queue(3, 0, 5, cls, 50), std::invalid_argument);
    CHECK_THROWS_AS(step_queue(-1, 1, 0, cls, 50), std::invalid_argument);
}

TEST_CASE("action kernel rows follow the update law") {
    const ClassSpec cls{5, 1.0, 1.0};
    SUBCASE("idle row spreads over the arrival band") {
        const Kernel k = action_kernel(cls, 0, 50);
        for (int i = 2; i <= 6; ++i) CHECK(k.at(2, i) == doctest::Approx(0.2));
        CHECK(k.at(2, 1) == 0.0);
        CHECK(k.at(2, 7) == 0.0);
    }
    SUBCASE("clipping folds the band into the last state") {
        const Kernel k = action_kernel(cls, 0, 6);
        for (int i = 2; i <= 5; ++i) CHECK(k.at(2, i) == doctest::Approx(0.2));
        CHECK(k.at(2, 6) == doctest::Approx(0.2));
    }
    SUBCASE("a transmitting queue below R drains fully") {
        const Kernel tx = action_kernel(cls, 1, 50);
        const Kernel idle = action_kernel(cls, 0, 50);
        for (int i = 0; i <= 50; ++i) CHECK(tx.at(3, i) == idle.at(0, i));
    }
}

TEST_CASE("transmit rows equal idle rows shifted by the service batch") {
    for (const int rate : {2, 3, 5, 10}) {
        const ClassSpec cls{rate, 1.0, 1.0};
        for (const int buffer : {3, 7, 20}) {
            const Kernel tx = action_kernel(cls, 1, buffer);
            const Kernel idle = action_kernel(cls, 0, buffer);
            for (int j = 0; j <= buffer; ++j) {
                const int drained = std::max(j - rate, 0);
                for (int i = 0; i <= buffer; ++i)
                    CHECK(tx.at(j, i) == doctest::Approx(idle.at(drained, i)));
            }
        }
    }
}

TEST_CASE("threshold kernel matches the printed transition law") {
    const ClassSpec cls{5, 1.0, 1.0};
    SUBCASE("idle side") {
        const Kernel k = threshold_kernel(cls, 3, 50);
        CHECK(k.at(2, 4) == doctest::Approx(0.2));  // i - j = 2 within the band
    }
    SUBCASE("transmitting side") {
        const Kernel k = threshold_kernel(cls, 3, 50);
        CHECK(k.at(7, 3) == doctest::Approx(0.2));  // i - (j - R)^+ = 1
    }
    SUBCASE("clipped corner entry") {
        const Kernel k = threshold_kernel(cls, 2, 6);
        CHECK(k.at(2, 6) == doctest::Approx((5 - 6 + 2) * 0.2));
    }
    CHECK_THROWS_AS(threshold_kernel(cls, -2, 50), std::invalid_argument);
    CHECK_THROWS_AS(threshold_kernel(cls, 51, 50), std::invalid_argument);
}

TEST_CASE("threshold kernel equals the arrival-enumeration oracle on a grid") {
    for (const int rate : {2, 3, 5, 7, 10}) {
        const ClassSpec cls{rate, 1.0, 1.0};
        for (const int buffer : {3, 5, 11, 24, 50}) {
            for (int n = -1; n <= buffer; ++n) {
                const Kernel fast = threshold_kernel(cls, n, buffer);
                const Kernel slow = oracle::brute_force_threshold_kernel(cls, n, buffer);
                fast.require_stochastic(1e-12);
                for (int j = 0; j <= buffer; ++j)
                    for (int i = 0; i <= buffer; ++i)
                        REQUIRE(fast.at(j, i) == doctest::Approx(slow.at(j, i)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("every kernel row sums to one across the full size grid") {
    for (const int rate : {2, 5, 10}) {
        const ClassSpec cls{rate, 1.0, 1.0};
        for (int buffer = 3; buffer <= 100; buffer += 7)
            for (int n = -1; n <= buffer; n += 3)
                CHECK_NOTHROW(threshold_kernel(cls, n, buffer).require_stochastic(1e-12));
    }
}

TEST_CASE("config validation") {
    SystemConfig cfg;
    cfg.classes = {{5, 1.0, 0.5}, {10, 1.0, 0.5}};
    cfg.buffer = 50;
    cfg.users = 100;
    cfg.alpha = 0.5;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.budget() == 50);
    CHECK(cfg.class_count(0) == 50);

    SUBCASE("rate below two") {
        cfg.classes[0].rate = 1;
        CHECK_THROWS_AS(cfg.validate(), model_error);
    }
    SUBCASE("fractions must sum to one") {
        cfg.classes[0].fraction = 0.6;
        CHECK_THROWS_AS(cfg.validate(), model_error);
    }
    SUBCASE("population must be realizable") {
        cfg.users = 101;
        CHECK_THROWS_AS(cfg.validate(), model_error);
    }
    SUBCASE("budget must stay below N") {
        cfg.alpha = 1.0;
        CHECK_THROWS_AS(cfg.validate(), model_error);
    }
}
