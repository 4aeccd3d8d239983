#pragma once

#include <functional>
#include <span>

#include "face/linalg.hpp"

namespace face {

inline constexpr double kDefaultBeta = 0.05;

using CovarianceFn = std::function<double(double, double)>;

// Cov(C_hat_i) for Gaussian residuals with latent covariance `C` (the m x m
// matrix C(t_j, t_k)) and noise variance sigma2. Rows and columns follow the
// product stacking order (j1 <= j2, j1 outermost).
//
//   Cov(r_j r_j', r_k r_k') = C_jk C_j'k' + C_jk' C_j'k
//                           + (d_jk d_j'k' + d_jk' d_j'k) sigma^4
//                           + (C_jk d_j'k' + C_jk' d_j'k + C_j'k d_jk' + C_j'k' d_jk) sigma^2
Matrix covariance_of_products(const Matrix& C, double sigma2);
Matrix covariance_of_products(const CovarianceFn& C, double sigma2, std::span<const double> times);

// W_i = [(1 - beta) Cov + beta diag(diag(Cov))]^{-1}. Throws DomainError when a
// diagonal entry of `cov` is not strictly positive.
Matrix blend_weights(const Matrix& cov, double beta = kDefaultBeta);

}  // namespace face
