#include "wisq/model.hpp"

#include <cmath>
#include <string>

namespace wisq {

void ClassSpec::validate() const {
    if (rate < 2) throw model_error("class rate must be at least 2, got " + std::to_string(rate));
    if (!(weight > 0.0)) throw model_error("class weight must be positive");
    if (!(fraction > 0.0) || fraction > 1.0) throw model_error("class fraction must lie in (0, 1]");
    if (std::abs(rho() * rate - 1.0) > 1e-15) throw model_error("rho * rate must equal 1");
}

int SystemConfig::budget() const { return static_cast<int>(std::lround(alpha * users)); }

int SystemConfig::class_count(int k) const {
    return static_cast<int>(std::lround(classes.at(k).fraction * users));
}

void SystemConfig::validate_classes() const {
    if (classes.empty()) throw model_error("at least one class is required");
    double total = 0.0;
    for (const auto& c : classes) {
        c.validate();
        total += c.fraction;
    }
    if (std::abs(total - 1.0) > 1e-12) throw model_error("class fractions must sum to 1");
    if (buffer < 1) throw model_error("buffer size must be positive");
    if (!(alpha > 0.0) || alpha > 1.0) throw model_error("alpha must lie in (0, 1]");
}

void SystemConfig::validate() const {
    validate_classes();
    if (users < 2) throw model_error("need at least two users");
    const int m = budget();
    if (m < 1 || m >= users)
        throw model_error("budget M = round(alpha N) = " + std::to_string(m) +
                          " must satisfy 1 <= M < N");
    int assigned = 0;
    for (size_t k = 0; k < classes.size(); ++k) {
        const double exact = classes[k].fraction * users;
        const int count = class_count(static_cast<int>(k));
        if (std::abs(exact - count) > 1e-9)
            throw model_error("class " + std::to_string(k) +
                              " population fraction * N is not an integer");
        assigned += count;
    }
    if (assigned != users) throw model_error("class populations do not add up to N");
}

void Kernel::require_stochastic(double tol) const {
    for (int j = 0; j < states_; ++j) {
        double sum = 0.0;
        for (int i = 0; i < states_; ++i) {
            const double v = at(j, i);
            if (v < -tol || v > 1.0 + tol)
                throw model_error("kernel entry out of [0,1] at row " + std::to_string(j));
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw model_error("kernel row " + std::to_string(j) + " sums to " +
                              std::to_string(sum));
    }
}

std::vector<double> arrival_pmf(const ClassSpec& cls) {
    cls.validate();
    return std::vector<double>(static_cast<size_t>(cls.rate), cls.rho());
}

int step_queue(int q, int action, int arrival, const ClassSpec& cls, int buffer) {
    if (q < 0 || q > buffer) throw std::invalid_argument("queue state out of [0, L]");
    if (arrival < 0 || arrival > cls.rate - 1)
        throw std::invalid_argument("arrival out of [0, R-1]");
    if (action != 0 && action != 1) throw std::invalid_argument("action must be 0 or 1");
    const int drained = std::max(q - cls.rate * action, 0);
    return std::min(drained + arrival, buffer);
}

Kernel action_kernel(const ClassSpec& cls, int action, int buffer) {
    const int states = buffer + 1;
    const double rho = cls.rho();
    Kernel kernel(states);
    for (int j = 0; j < states; ++j) {
        const int base = std::max(j - cls.rate * action, 0);
        // Uniform band below the buffer limit, clipped tail mass at L.
        for (int i = base; i <= std::min(base + cls.rate - 1, buffer - 1); ++i)
            kernel.at(j, i) = rho;
        const int clipped = base + cls.rate - buffer;  // arrivals landing at or past L
        if (clipped > 0) kernel.at(j, buffer) += clipped * rho;
    }
    return kernel;
}

Kernel threshold_kernel(const ClassSpec& cls, int threshold, int buffer) {
    if (threshold < -1 || threshold > buffer)
        throw std::invalid_argument("threshold out of [-1, L]");
    const Kernel idle = action_kernel(cls, 0, buffer);
    const Kernel transmit = action_kernel(cls, 1, buffer);
    Kernel kernel(buffer + 1);
    for (int j = 0; j <= buffer; ++j) {
        const Kernel& src = (j <= threshold) ? idle : transmit;
        for (int i = 0; i <= buffer; ++i) kernel.at(j, i) = src.at(j, i);
    }
    return kernel;
}

}  // namespace wisq
