#include "face/linalg.hpp"

#include <limits>

#include <cmath>
#include <vector>

#include "face/error.hpp"

namespace face {

double min_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix symmetrize_from_lower(const Matrix& m) {
    Matrix out = m;
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < j; ++i) out(i, j) = out(j, i);
    }
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bool ldlt_invertible(const Eigen::LDLT<Matrix>& ldlt) {
    if (ldlt.info() != Eigen::Success) return false;
    const Vector d = ldlt.vectorD().cwiseAbs();
    if (d.size() == 0) return true;
    return d.minCoeff() > 1e2 * std::numeric_limits<double>::epsilon() * d.maxCoeff();
}

}  // namespace face
