#pragma once

#include <vector>

#include <Eigen/Dense>

namespace face {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);

// Copies the lower triangle onto the upper one so the result is exactly symmetric.
Matrix symmetrize_from_lower(const Matrix& m);

// Kronecker product of two column vectors, a (x) b, with b varying fastest.
Vector kron(const Vector& a, const Vector& b);

// Sample quantile with linear interpolation between order statistics
// (Hyndman & Fan type 7). `sorted` must be non-decreasing and non-empty.
double quantile_sorted(const std::vector<double>& sorted, double p);

// True when the factorization succeeded and no pivot is negligible relative
// to the largest one.
bool ldlt_invertible(const Eigen::LDLT<Matrix>& ldlt);

}  // namespace face
