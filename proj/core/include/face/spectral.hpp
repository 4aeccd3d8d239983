#pragma once

#include <functional>

#include "face/linalg.hpp"
#include "face/solver.hpp"

namespace face {

inline constexpr int kDefaultGridSize = 101;

// G equispaced points 0, 1/(G-1), ..., 1.
Vector unit_grid(int G = kDefaultGridSize);

// C~[a,b] = b(grid_a)^T Theta b(grid_b), exactly symmetric.
Matrix eval_cov_grid(const SplineBasis& basis, const Matrix& Theta, const Vector& grid);
Matrix eval_cov_grid(const FitResult& fit, const Vector& grid);
Matrix eval_cov_grid(const std::function<double(double, double)>& C, const Vector& grid);

struct EigenOptions {
    // Drop eigenvalues not exceeding G * eps * max|eigenvalue|.
    bool trim_negative = true;
    // Maximum number of components kept; 0 keeps all that survive trimming.
    int max_components = 0;
};

// Eigen-analysis of a gridded covariance with rectangle-rule weight 1/G.
// Eigenfunctions satisfy (1/G) Psi^T Psi = I; each column's largest-magnitude
// entry is positive.
struct EigenResult {
    Vector grid;
    Vector eigenvalues;      // retained, descending
    Matrix eigenfunctions;   // G x k
    Vector raw_eigenvalues;  // full spectrum of (1/G) C, descending
    int k() const { return static_cast<int>(eigenvalues.size()); }
};

EigenResult eigendecompose(const Matrix& C_grid, const Vector& grid, const EigenOptions& opts = {});

}  // namespace face
