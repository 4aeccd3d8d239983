#include "face/spectral.hpp"

#include <algorithm>
#include <limits>

#include "face/error.hpp"

namespace face {

Vector unit_grid(int G) {
    if (G < 2) throw DomainError("grid needs at least two points");
    return Vector::LinSpaced(G, 0.0, 1.0);
}

Matrix eval_cov_grid(const SplineBasis& basis, const Matrix& Theta, const Vector& grid) {
    if (Theta.rows() != basis.dim() || Theta.cols() != basis.dim()) {
        throw DomainError("coefficient matrix does not match the basis");
    }
    const Matrix B = basis.eval_matrix(std::span<const double>(grid.data(), static_cast<std::size_t>(grid.size())));
    return symmetrize_from_lower(B * Theta * B.transpose());
}

Matrix eval_cov_grid(const FitResult& fit, const Vector& grid) { return eval_cov_grid(fit.basis, fit.Theta, grid); }

Matrix eval_cov_grid(const std::function<double(double, double)>& C, const Vector& grid) {
    const Index G = grid.size();
    Matrix out(G, G);
    for (Index a = 0; a < G; ++a) {
        for (Index b = 0; b <= a; ++b) {
            out(a, b) = C(grid(a), grid(b));
            out(b, a) = out(a, b);
        }
    }
    return out;
}

EigenResult eigendecompose(const Matrix& C_grid, const Vector& grid, const EigenOptions& opts) {
    const Index G = grid.size();
    if (C_grid.rows() != G || C_grid.cols() != G) throw DomainError("covariance grid does not match the grid");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize_from_lower(C_grid) / static_cast<double>(G));
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Vector vals = es.eigenvalues().reverse();
    const Matrix vecs = es.eigenvectors().rowwise().reverse();

    EigenResult out;
    out.grid = grid;
    out.raw_eigenvalues = vals;
    Index k = G;
    if (opts.trim_negative) {
        // Eigenvalues below rounding level count as zero.
        const double tol = static_cast<double>(G) * std::numeric_limits<double>::epsilon() *
                           std::max(vals.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        k = 0;
        while (k < G && vals(k) > tol) ++k;
    }
    if (opts.max_components > 0) k = std::min<Index>(k, opts.max_components);
    out.eigenvalues = vals.head(k);
    out.eigenfunctions = vecs.leftCols(k) * std::sqrt(static_cast<double>(G));
    for (Index j = 0; j < k; ++j) {
        Index arg = 0;
        out.eigenfunctions.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.eigenfunctions(arg, j) < 0.0) out.eigenfunctions.col(j) *= -1.0;
    }
    return out;
}

}  // namespace face
