#pragma once

#include <stdexcept>
#include <string>

namespace wisq {

/// Structural violation in a model object (bad class spec, non-stochastic
/// kernel, unrealizable population, ...).
struct model_error : std::runtime_error {
    explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

/// One of the structural assumptions required by the relaxed-problem solver
/// does not hold for the given configuration. The message names the bound.
struct assumption_error : std::runtime_error {
    explicit assumption_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine ran out of its iteration budget.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wisq
