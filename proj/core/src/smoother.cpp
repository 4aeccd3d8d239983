#include "face/smoother.hpp"

#include <cmath>
#include <string>

#include "face/error.hpp"

namespace face {

namespace {

constexpr double kRidgeStart = 1e-8;
constexpr double kRidgeMax = 1e-4;

}  // namespace

Index GroupedProblem::total_rows() const {
    Index n = 0;
    for (const auto& x : X) n += x.rows();
    return n;
}

void GroupedProblem::validate() const {
    if (X.size() != y.size()) throw DomainError("design blocks and responses differ in count");
    if (weighted() && W.size() != X.size()) throw DomainError("weight blocks and design blocks differ in count");
    if (Q.rows() != Q.cols()) throw DomainError("penalty matrix must be square");
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].cols() != Q.rows()) throw DomainError("design block width does not match the penalty");
        if (X[i].rows() != y[i].size()) throw DomainError("design block height does not match its response");
        if (weighted() && (W[i].rows() != y[i].size() || W[i].cols() != y[i].size())) {
            throw DomainError("weight block shape does not match its response");
        }
    }
}

CrossProducts cross_products(const GroupedProblem& problem) {
    problem.validate();
    const Index p = problem.params();
    CrossProducts out{Matrix::Zero(p, p), Vector::Zero(p)};
    for (std::size_t i = 0; i < problem.groups(); ++i) {
        const Matrix& X = problem.X[i];
        if (problem.weighted()) {
            const Matrix WX = problem.W[i] * X;
            out.XtWX.noalias() += X.transpose() * WX;
            out.XtWy.noalias() += WX.transpose() * problem.y[i];
        } else {
            out.XtWX.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
            out.XtWy.noalias() += X.transpose() * problem.y[i];
        }
    }
    out.XtWX = symmetrize_from_lower(out.XtWX);
    return out;
}

Diagonalization diagonalize(const Matrix& XtWX, const Matrix& Q) {
    const Index p = XtWX.rows();
    if (XtWX.cols() != p || Q.rows() != p || Q.cols() != p) {
        throw DomainError("diagonalize: shape mismatch");
    }
    const double scale = std::max(XtWX.trace() / static_cast<double>(p), 1e-300);

    Diagonalization out;
    Matrix K;
    bool ok = false;
    for (double rel = kRidgeStart; rel <= kRidgeMax * 1.0001; rel *= 10.0) {
        K = XtWX;
        K.diagonal().array() += rel * scale;
        Eigen::LLT<Matrix> llt(K);
        if (llt.info() == Eigen::Success) {
            out.ridge = rel * scale;
            ok = true;
            break;
        }
    }
    if (!ok) throw NumericalError("cross-product matrix is not positive definite even after ridge; use fewer knots");

    // Split the parameter space into the null space Z of Q and its complement R
    // so that the zero generalized eigenvalues come out exactly zero.
    Eigen::SelfAdjointEigenSolver<Matrix> qes(symmetrize_from_lower(Q));
    const Vector& qval = qes.eigenvalues();
    const double qmax = qval.cwiseAbs().maxCoeff();
    const double tol = 1e-9 * qmax;
    std::vector<Index> null_idx, range_idx;
    for (Index k = 0; k < p; ++k) (qmax == 0.0 || std::abs(qval(k)) <= tol ? null_idx : range_idx).push_back(k);
    const auto nz = static_cast<Index>(null_idx.size());
    const auto nr = static_cast<Index>(range_idx.size());
    Matrix Z(p, nz), R(p, nr);
    Vector lambda_R(nr);
    for (Index k = 0; k < nz; ++k) Z.col(k) = qes.eigenvectors().col(null_idx[static_cast<std::size_t>(k)]);
    for (Index k = 0; k < nr; ++k) {
        R.col(k) = qes.eigenvectors().col(range_idx[static_cast<std::size_t>(k)]);
        lambda_R(k) = std::max(qval(range_idx[static_cast<std::size_t>(k)]), 0.0);
    }

    out.A.resize(p, p);
    out.s = Vector::Zero(p);
    out.null_dim = nz;

    Matrix V = R;  // complement directions made K-orthogonal to span(Z)
    if (nz > 0) {
        const Matrix Kzz = symmetrize_from_lower(Z.transpose() * K * Z);
        Eigen::LLT<Matrix> lz(Kzz);
        if (lz.info() != Eigen::Success) throw NumericalError("diagonalize: null-space block is singular");
        const Matrix Kzr = Z.transpose() * K * R;
        V.noalias() -= Z * lz.solve(Kzr);
        // A_Z = Z L_Z^{-T}
        const Matrix Lz = lz.matrixL();
        out.A.rightCols(nz) =
            Lz.triangularView<Eigen::Lower>().solve(Z.transpose()).transpose();
    }
    if (nr > 0) {
        const Matrix Sc = symmetrize_from_lower(V.transpose() * K * V);
        Eigen::LLT<Matrix> ls(Sc);
        if (ls.info() != Eigen::Success) throw NumericalError("diagonalize: penalized block is singular");
        const Matrix L = ls.matrixL();
        // M = L^{-1} diag(lambda_R) L^{-T}
        const Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(nr, nr));
        const Matrix M = symmetrize_from_lower(Linv * lambda_R.asDiagonal() * Linv.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> mes(M);
        // Eigen sorts ascending; store descending.
        const Matrix U = mes.eigenvectors().rowwise().reverse();
        const Vector s = mes.eigenvalues().reverse();
        out.A.leftCols(nr) = V * Linv.transpose() * U;
        out.s.head(nr) = s.cwiseMax(0.0);
    }
    return out;
}

Vector fit_pwls(const Matrix& XtWX, const Vector& XtWy, const Matrix& Q, double lambda) {
    if (lambda < 0.0) throw DomainError("lambda must be non-negative");
    Matrix K = XtWX + lambda * Q;
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() == Eigen::Success) return llt.solve(XtWy);
    const double scale = std::max(XtWX.trace() / static_cast<double>(XtWX.rows()), 1e-300);
    for (double rel = kRidgeStart; rel <= kRidgeMax * 1.0001; rel *= 10.0) {
        Matrix Kr = K;
        Kr.diagonal().array() += rel * scale;
        Eigen::LLT<Matrix> lr(Kr);
        if (lr.info() == Eigen::Success) return lr.solve(XtWy);
    }
    throw NumericalError("penalized normal equations are singular; use fewer knots");
}

Vector fit_pwls(const GroupedProblem& problem, double lambda) {
    const auto cp = cross_products(problem);
    return fit_pwls(cp.XtWX, cp.XtWy, problem.Q, lambda);
}

std::vector<double> LambdaGrid::values() const {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw DomainError("invalid lambda grid");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int k = 0; k < count; ++k) out[k] = std::exp(a + (b - a) * k / (count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace face
