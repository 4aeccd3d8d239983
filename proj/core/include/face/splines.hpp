#pragma once

#include <span>
#include <utility>
#include <vector>

#include "face/linalg.hpp"

namespace face {

// B-spline basis on [0,1] with boundary knots replicated `order` times.
class SplineBasis {
public:
    SplineBasis() = default;
    SplineBasis(int order, std::vector<double> interior_knots);

    int order() const { return order_; }
    int degree() const { return order_ - 1; }
    // Basis dimension c = #interior knots + order.
    int dim() const { return static_cast<int>(interior_.size()) + order_; }
    const std::vector<double>& interior_knots() const { return interior_; }
    const std::vector<double>& full_knots() const { return knots_; }

    // b(t), length dim(). Right-continuous; t = 1 belongs to the last span.
    Vector eval(double t) const;

    // The `order` possibly-nonzero values of b(t) starting at basis index `first`.
    void eval_nonzero(double t, int& first, std::span<double> values) const;

    // Rows b(t_k)^T for each t_k.
    Matrix eval_matrix(std::span<const double> times) const;

private:
    int find_span(double t) const;

    int order_ = 4;
    std::vector<double> interior_;
    std::vector<double> knots_;
};

// Interior knots at the k/(n_interior+1) quantiles of the pooled times.
SplineBasis make_basis(std::span<const double> times, int n_interior = 10, int order = 4);

// D with c rows and c-2 columns; (D^T theta)_k = theta_k - 2 theta_{k+1} + theta_{k+2}.
Matrix difference_matrix(int c);

// Position of (i, j), i >= j, in vech: lower triangle stacked column by column.
inline Index vech_index(Index i, Index j, Index c) {
    if (i < j) std::swap(i, j);
    return j * c - j * (j - 1) / 2 + (i - j);
}

Vector vech(const Matrix& sym);
Matrix unvech(const Vector& v, Index c);

// G_c with G_c vech(Theta) = vec(Theta) for symmetric Theta; shape c^2 x c(c+1)/2.
Matrix duplication_matrix(int c);

// P = G_c^T (I_c (x) D D^T) G_c, so vech(Theta)^T P vech(Theta) = tr(Theta D D^T Theta^T).
Matrix penalty_P(const Matrix& D, const Matrix& G);

// blockdiag(P, 0): the trailing coordinate (the noise variance) is unpenalized.
Matrix embed_Q(const Matrix& P);

}  // namespace face
