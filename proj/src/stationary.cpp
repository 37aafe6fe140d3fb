#include "wisq/stationary.hpp"

#include <cassert>
#include <cmath>

#include "wisq/linalg.hpp"

namespace wisq {

BufferRegime regime_of(int rate, int buffer) {
    if (buffer < rate) return BufferRegime::ShortBuffer;
    if (buffer < 2 * rate) return BufferRegime::MidBuffer;
    return BufferRegime::LongBuffer;
}

const char* regime_name(BufferRegime r) {
    switch (r) {
        case BufferRegime::ShortBuffer: return "L<R";
        case BufferRegime::MidBuffer: return "R<=L<2R";
        case BufferRegime::LongBuffer: return "L>=2R";
    }
    return "?";
}

namespace {

// Writers for the recurring stationary-law pieces. Ranges may be empty;
// every state is written at most once, which set() asserts.
struct Dist {
    std::vector<double> u;
    std::vector<bool> seen;

    explicit Dist(int states) : u(states, 0.0), seen(states, false) {}

    void set(int i, double v) {
        assert(i >= 0 && i < static_cast<int>(u.size()));
        assert(!seen[i]);
        seen[i] = true;
        u[i] = v;
    }
};

double pow_q(double base, int e) { return std::pow(base, e); }

}  // namespace

StationaryDist stationary_closed_form(const ClassSpec& cls, int threshold, int buffer) {
    if (threshold < -1 || threshold > buffer)
        throw std::invalid_argument("threshold out of [-1, L]");
    const int R = cls.rate;
    const int L = buffer;
    const int n = threshold;
    const double rho = cls.rho();
    const double q = 1.0 - rho;
    const BufferRegime regime = regime_of(R, L);
    Dist d(L + 1);

    if (n == L) {
        d.set(L, 1.0);  // never transmit: the buffer fills and stays full
    } else if (regime == BufferRegime::ShortBuffer) {
        for (int i = 0; i <= n; ++i) d.set(i, rho * pow_q(q, n - i));
        for (int i = n + 1; i <= L - 1; ++i) d.set(i, rho);
        d.set(L, pow_q(q, n + 1) - (L - n - 1) * rho);
    } else if (regime == BufferRegime::MidBuffer) {
        if (n <= L - R - 1) {
            for (int i = 0; i <= n; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = n + 1; i <= R - 1; ++i) d.set(i, rho);
            for (int i = R; i <= n + R; ++i) d.set(i, rho - (i - n) * rho * rho);
        } else if (n <= R - 1) {  // L-R <= n <= R-1
            for (int i = 0; i <= L - R - 1; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = L - R; i <= n; ++i) d.set(i, rho * pow_q(q, n - i));
            for (int i = n + 1; i <= R - 1; ++i) d.set(i, rho);
            for (int i = R; i <= L - 1; ++i) d.set(i, rho - (i - n) * rho * rho);
            d.set(L, pow_q(q, n - L + R + 1) - rho * (L - 1 - n));
        } else {  // R <= n <= L-1
            for (int i = n - R + 1; i <= L - R - 1; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = std::max(L - R, n - R + 1); i <= n; ++i)
                d.set(i, rho * pow_q(q, n - i));
            for (int i = n + 1; i <= L - 1; ++i) d.set(i, rho - (i - n) * rho * rho);
            d.set(L, pow_q(q, n - L + R + 1) - rho * (L - 1 - n));
        }
    } else {  // LongBuffer, L >= 2R
        if (n <= R - 1) {
            for (int i = 0; i <= n; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = n + 1; i <= R - 1; ++i) d.set(i, rho);
            for (int i = R; i <= n + R; ++i) d.set(i, rho - (i - n) * rho * rho);
        } else if (n <= L - R - 1) {  // R <= n < L-R: tent centered at n
            for (int i = n - R + 1; i <= n; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = n + 1; i <= n + R - 1; ++i) d.set(i, rho - (i - n) * rho * rho);
        } else {  // L-R <= n <= L-1
            for (int i = n - R + 1; i <= L - R - 1; ++i) d.set(i, rho - (n - i) * rho * rho);
            for (int i = std::max(L - R, n - R + 1); i <= n; ++i)
                d.set(i, rho * pow_q(q, n - i));
            for (int i = n + 1; i <= L - 1; ++i) d.set(i, rho - (i - n) * rho * rho);
            d.set(L, pow_q(q, n - L + R + 1) - rho * (L - 1 - n));
        }
    }

    StationaryDist out;
    out.u = std::move(d.u);
    out.threshold = n;
    out.regime = regime;
    for (double& v : out.u) {
        assert(v >= -1e-12);
        if (v < 0.0) v = 0.0;  // rounding dust where the clipped atom vanishes
    }
    return out;
}

StationaryDist stationary_solve(const Kernel& kernel) {
    kernel.require_stochastic();
    const int states = kernel.states();
    // (I - P^T) u = 0 has a one-dimensional kernel when there is a single
    // recurrent class; trading the last balance row for the normalization
    // sum(u) = 1 makes the system square and regular.
    Matrix a(states, states);
    for (int i = 0; i < states; ++i)
        for (int j = 0; j < states; ++j)
            a.at(i, j) = (i == j ? 1.0 : 0.0) - kernel.at(j, i);
    std::vector<double> b(states, 0.0);
    for (int j = 0; j < states; ++j) a.at(states - 1, j) = 1.0;
    b[states - 1] = 1.0;

    std::vector<double> u = solve_dense(std::move(a), std::move(b));
    for (double& v : u)
        if (std::abs(v) < 1e-12) v = 0.0;

    StationaryDist out;
    out.u = std::move(u);
    out.threshold = -2;  // unknown, came from a raw kernel
    out.regime = BufferRegime::LongBuffer;
    return out;
}

double mean_cost(const ClassSpec& cls, int threshold, int buffer) {
    const StationaryDist d = stationary_closed_form(cls, threshold, buffer);
    double acc = 0.0;
    for (int i = 0; i <= buffer; ++i) acc += d.u[i] * i;
    return cls.weight * acc;
}

double passive_time(const ClassSpec& cls, int threshold, int buffer) {
    if (threshold == -1) return 0.0;
    const StationaryDist d = stationary_closed_form(cls, threshold, buffer);
    double acc = 0.0;
    for (int i = 0; i <= threshold; ++i) acc += d.u[i];
    return acc;
}

CostCurve build_cost_curves(const ClassSpec& cls, int buffer) {
    CostCurve curve;
    curve.buffer = buffer;
    curve.holding.resize(static_cast<size_t>(buffer) + 2);
    curve.passive.resize(static_cast<size_t>(buffer) + 2);
    for (int n = -1; n <= buffer; ++n) {
        const StationaryDist d = stationary_closed_form(cls, n, buffer);
        double hold = 0.0, pass = 0.0;
        for (int i = 0; i <= buffer; ++i) {
            hold += d.u[i] * i;
            if (i <= n) pass += d.u[i];
        }
        curve.holding[static_cast<size_t>(n + 1)] = cls.weight * hold;
        curve.passive[static_cast<size_t>(n + 1)] = pass;
    }
    return curve;
}

}  // namespace wisq
