#pragma once

#include <vector>

#include "face/linalg.hpp"

namespace face {

// Penalized weighted least squares problem whose rows are grouped by subject:
//   min_alpha sum_i (y_i - X_i alpha)^T W_i (y_i - X_i alpha) + lambda alpha^T Q alpha.
// An empty `W` means W_i = I for every subject.
struct GroupedProblem {
    std::vector<Matrix> X;
    std::vector<Vector> y;
    std::vector<Matrix> W;
    Matrix Q;

    std::size_t groups() const { return X.size(); }
    Index params() const { return Q.rows(); }
    Index total_rows() const;
    bool weighted() const { return !W.empty(); }
    void validate() const;
};

struct CrossProducts {
    Matrix XtWX;
    Vector XtWy;
};

CrossProducts cross_products(const GroupedProblem& problem);

// Simultaneous diagonalization of (X^T W X + ridge I) and Q:
//   A^T (X^T W X + ridge I) A = I,  A^T Q A = diag(s),
// so that the smoother is S = X A (I + lambda diag s)^{-1} (X A)^T W.
struct Diagonalization {
    Matrix A;
    Vector s;  // descending, >= 0; exact zeros on the null space of Q
    double ridge = 0.0;
    Index null_dim = 0;
};

// The ridge starts at 1e-8 * trace / p and grows tenfold, up to 1e-4 * trace / p,
// until X^T W X + ridge I admits a Cholesky factor.
Diagonalization diagonalize(const Matrix& XtWX, const Matrix& Q);

// Solves (X^T W X + lambda Q) alpha = X^T W y, adding the escalating ridge only
// when the system is not positive definite.
Vector fit_pwls(const Matrix& XtWX, const Vector& XtWy, const Matrix& Q, double lambda);
Vector fit_pwls(const GroupedProblem& problem, double lambda);

struct LambdaGrid {
    double lo = 1e-6;
    double hi = 1e6;
    int count = 100;

    std::vector<double> values() const;
};

}  // namespace face
