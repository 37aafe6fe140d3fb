#pragma once

#include <span>
#include <vector>

#include "wisq/errors.hpp"

namespace wisq {

/// One class of users. A scheduled class-k queue drains up to `rate` packets
/// per slot; arrivals are uniform on {0, ..., rate-1}.
struct ClassSpec {
    int rate = 2;           // R, maximum packets served per slot (R >= 2)
    double weight = 1.0;    // a, holding-cost weight (> 0)
    double fraction = 1.0;  // gamma, share of the user population (0, 1]

    double rho() const { return 1.0 / static_cast<double>(rate); }

    void validate() const;
};

/// The N-user system: class mix, common buffer size and per-slot channel
/// budget M = round(alpha * N).
struct SystemConfig {
    std::vector<ClassSpec> classes;
    int buffer = 0;      // L, same for every queue
    int users = 0;       // N
    double alpha = 0.0;  // M / N

    int budget() const;            // M
    int class_count(int k) const;  // gamma_k * N, exact integer

    /// Class mix, buffer and alpha only; enough for the per-user analysis,
    /// which never looks at N.
    void validate_classes() const;
    /// Everything, including population realizability and 1 <= M < N.
    void validate() const;

    double class_weight(int k) const { return classes.at(k).weight; }
};

/// Dense one-queue transition matrix. Row = origin state, column =
/// destination state; states run 0..L.
class Kernel {
  public:
    Kernel() = default;
    Kernel(int states) : states_(states), p_(static_cast<size_t>(states) * states, 0.0) {}

    int states() const { return states_; }
    double at(int from, int to) const { return p_[static_cast<size_t>(from) * states_ + to]; }
    double& at(int from, int to) { return p_[static_cast<size_t>(from) * states_ + to]; }
    std::span<const double> row(int from) const {
        return {p_.data() + static_cast<size_t>(from) * states_, static_cast<size_t>(states_)};
    }

    /// Throws model_error unless every row sums to 1 within tol and all
    /// entries lie in [0, 1].
    void require_stochastic(double tol = 1e-9) const;

  private:
    int states_ = 0;
    std::vector<double> p_;
};

/// Uniform arrival law on {0, ..., R-1}: every entry 1/R.
std::vector<double> arrival_pmf(const ClassSpec& cls);

/// One-slot queue update: min{(q - R s)^+ + arrival, L}.
/// Throws std::invalid_argument if q or arrival is out of range.
int step_queue(int q, int action, int arrival, const ClassSpec& cls, int buffer);

/// Transition law of a queue that always takes `action` (0 = idle,
/// 1 = transmit), including the clipped mass at state L.
Kernel action_kernel(const ClassSpec& cls, int action, int buffer);

/// Transition law under the threshold policy "idle at q <= threshold,
/// transmit above". threshold = -1 always transmits, threshold = L never.
Kernel threshold_kernel(const ClassSpec& cls, int threshold, int buffer);

}  // namespace wisq
