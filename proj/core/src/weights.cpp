#include "face/weights.hpp"

#include "face/design.hpp"
#include "face/error.hpp"

namespace face {

Matrix covariance_of_products(const Matrix& C, double sigma2) {
    if (C.rows() != C.cols()) throw DomainError("covariance matrix must be square");
    if (sigma2 < 0.0) throw DomainError("noise variance must be non-negative");
    const auto pairs = product_pairs(static_cast<int>(C.rows()));
    const auto n = static_cast<Index>(pairs.size());
    const double s2 = sigma2;
    const double s4 = sigma2 * sigma2;
    Matrix out(n, n);
    for (Index a = 0; a < n; ++a) {
        const auto [j, jp] = pairs[static_cast<std::size_t>(a)];
        for (Index b = 0; b <= a; ++b) {
            const auto [k, kp] = pairs[static_cast<std::size_t>(b)];
            const double d_jk = j == k, d_jkp = j == kp, d_jpk = jp == k, d_jpkp = jp == kp;
            const double v = C(j, k) * C(jp, kp) + C(j, kp) * C(jp, k) + (d_jk * d_jpkp + d_jkp * d_jpk) * s4 +
                             (C(j, k) * d_jpkp + C(j, kp) * d_jpk + C(jp, k) * d_jkp + C(jp, kp) * d_jk) * s2;
            out(a, b) = v;
            out(b, a) = v;
        }
    }
    return out;
}

Matrix covariance_of_products(const CovarianceFn& C, double sigma2, std::span<const double> times) {
    const auto m = static_cast<Index>(times.size());
    Matrix Cm(m, m);
    for (Index j = 0; j < m; ++j) {
        for (Index k = 0; k <= j; ++k) {
            Cm(j, k) = C(times[j], times[k]);
            Cm(k, j) = Cm(j, k);
        }
    }
    return covariance_of_products(Cm, sigma2);
}

Matrix blend_weights(const Matrix& cov, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0,1]");
    for (Index k = 0; k < cov.rows(); ++k) {
        if (!(cov(k, k) > 0.0)) {
            throw DomainError("covariance of raw products has a non-positive diagonal entry");
        }
    }
    Matrix blended = (1.0 - beta) * cov;
    blended.diagonal() = cov.diagonal();
    blended = symmetrize_from_lower(blended);
    const Matrix I = Matrix::Identity(cov.rows(), cov.cols());
    Eigen::LLT<Matrix> llt(blended);
    if (llt.info() == Eigen::Success) return symmetrize_from_lower(llt.solve(I));
    Eigen::LDLT<Matrix> ldlt(blended);
    if (!ldlt_invertible(ldlt)) {
        throw NumericalError("blended covariance of raw products is singular");
    }
    return symmetrize_from_lower(ldlt.solve(I));
}

}  // namespace face
