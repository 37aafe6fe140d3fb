#pragma once

#include <span>
#include <vector>

namespace wisq {

/// Row-major dense matrix, just big enough for the solver and fluid code.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
};

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
/// Throws convergence_error on a (numerically) singular system.
std::vector<double> solve_dense(Matrix a, std::vector<double> b);

/// y = A x.
std::vector<double> mat_vec(const Matrix& m, std::span<const double> x);

struct SpectralEstimate {
    double radius = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Dominant |eigenvalue| by power iteration, seeded with the all-ones
/// vector plus a deterministic perturbation. A vanishing iterate (nilpotent
/// matrix) reports radius 0.
SpectralEstimate spectral_radius(const Matrix& m, double tol = 1e-10, int max_iter = 100000);

}  // namespace wisq
