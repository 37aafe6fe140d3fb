#include "wisq/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "wisq/errors.hpp"

namespace wisq {

std::vector<double> solve_dense(Matrix m, std::vector<double> b) {
    const int n = m.rows;
    if (n != m.cols || static_cast<int>(b.size()) != n)
        throw model_error("solve_dense: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(m.at(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(m.at(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-300) throw convergence_error("solve_dense: singular matrix");
        if (pivot != col) {
            for (int c = col; c < n; ++c) std::swap(m.at(col, c), m.at(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / m.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double factor = m.at(r, col) * inv;
            if (factor == 0.0) continue;
            for (int c = col; c < n; ++c) m.at(r, c) -= factor * m.at(col, c);
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= m.at(r, c) * x[c];
        x[r] = acc / m.at(r, r);
    }
    return x;
}

std::vector<double> mat_vec(const Matrix& m, std::span<const double> x) {
    std::vector<double> y(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.a.data() + static_cast<size_t>(r) * m.cols;
        for (int c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SpectralEstimate spectral_radius(const Matrix& m, double tol, int max_iter) {
    if (m.rows != m.cols) throw model_error("spectral_radius: matrix must be square");
    const int n = m.rows;
    SpectralEstimate est;
    if (n == 0) {
        est.converged = true;
        return est;
    }
    // All-ones start with a sloped perturbation so we do not sit in an
    // invariant subspace orthogonal to the dominant eigenvector.
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 1.0 + 1e-3 * (i + 1) / n;
    double prev = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> y = mat_vec(m, x);
        const double norm = max_abs(y);
        est.iterations = it;
        if (norm < 1e-200) {  // iterate collapsed: nilpotent direction
            est.radius = 0.0;
            est.converged = true;
            return est;
        }
        est.radius = norm / max_abs(x);
        for (double& v : y) v /= norm;
        x = std::move(y);
        if (prev >= 0.0 && std::abs(est.radius - prev) <= tol * std::max(1.0, est.radius)) {
            est.converged = true;
            return est;
        }
        prev = est.radius;
    }
    est.converged = false;
    return est;
}

}  // namespace wisq
