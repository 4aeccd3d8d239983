#pragma once

// Slow, literal reference computations used by the test and validation
// suites. Dense linear algebra runs in 113-bit floating point so comparisons
// against the fast paths stay meaningful for badly conditioned systems.

#include <cstdint>
#include <vector>

#include "face/linalg.hpp"
#include "face/smoother.hpp"

namespace face::oracle {

inline constexpr Index kMaxDenseRows = 5000;

struct DenseProblem {
    Matrix X;  // N x p
    Matrix W;  // N x N block diagonal
    Matrix Q;  // p x p
    Vector C;  // N
    std::vector<Index> boundaries;  // subject i owns rows [boundaries[i], boundaries[i+1])
    double ridge = 0.0;  // added to X^T W X, matching the fast path's stabilization

    std::size_t subjects() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
    Index rows() const { return X.rows(); }
    void validate() const;
};

DenseProblem make_dense(const GroupedProblem& problem, double ridge = 0.0);

struct DenseSmoother {
    Matrix S;  // N x N
    // Row block S_i (n_i x N) and diagonal block S_ii (n_i x n_i) per subject.
    std::vector<Matrix> S_i;
    std::vector<Matrix> S_ii;
};

// S = X (X^T W X + ridge I + lambda Q)^{-1} X^T W.
DenseSmoother dense_smoother(const DenseProblem& problem, double lambda);

// ||C - S C||^2 + 2 sum_i (S_i C - C_i)^T S_ii (S_i C - C_i).
double dense_igcv(const DenseProblem& problem, double lambda);

// Sum over subjects of the squared error of predicting C_i from a fit that
// leaves subject i out.
double refit_icv(const DenseProblem& problem, double lambda);

// Penalized solution alpha of the dense system.
Vector dense_solve(const DenseProblem& problem, double lambda);

// Exact Cov(Y_j Y_k, Y_j' Y_k') for Y ~ N(0, C + sigma2 I), pairs (j <= k)
// ordered row by row, via enumeration of all perfect matchings.
Matrix isserlis_cov(const Matrix& C, double sigma2);

// E[prod_r Y_{idx_r}] for zero-mean Gaussian Y with covariance Sigma.
double gaussian_moment(const Matrix& Sigma, const std::vector<int>& idx);

struct MonteCarloCov {
    Matrix cov;  // empirical covariance of the products
    Matrix se;   // standard error of each entry
    Index draws = 0;
};

MonteCarloCov mc_cov_products(const Matrix& C, double sigma2, Index draws, std::uint64_t seed);

struct Conditional {
    Vector mean;
    Matrix cov;
};

// Distribution of the unobserved block given the observed one.
Conditional mvn_condition(const Vector& joint_mean, const Matrix& joint_cov, const std::vector<Index>& observed,
                          const Vector& observed_values);

}  // namespace face::oracle
