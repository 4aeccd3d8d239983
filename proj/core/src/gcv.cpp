#include "face/gcv.hpp"

#include <cmath>
#include <limits>

#include "face/error.hpp"

namespace face {

Matrix row_khatri_rao(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw DomainError("row_khatri_rao: operands must have equal shapes");
    }
    const Index k = A.cols();
    Matrix out(A.rows(), k * k);
    for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) out.col(a * k + b) = A.col(a).cwiseProduct(B.col(b));
    }
    return out;
}

GcvPrecomp precompute(const GroupedProblem& problem, const Diagonalization& diag) {
    problem.validate();
    const Index p = problem.params();
    if (diag.A.rows() != p || diag.A.cols() != p) throw DomainError("precompute: diagonalization shape mismatch");

    GcvPrecomp pre;
    pre.f = Vector::Zero(p);
    pre.f_tilde = Vector::Zero(p);
    pre.FtF = Matrix::Zero(p, p);
    pre.g = Vector::Zero(p);
    pre.G2 = Matrix::Zero(p, p * p);
    // H(a,b) = sum_i J_ia (F_i^T F_i)(a,b); G1 = H o (1 f_tilde^T). Likewise for the cross term.
    Matrix H = Matrix::Zero(p, p);
    Matrix Hx = Matrix::Zero(p, p);

    Matrix FtFi(p, p), Li(p, p);
    for (std::size_t i = 0; i < problem.groups(); ++i) {
        const Vector& y = problem.y[i];
        const Matrix F = problem.X[i] * diag.A;
        const Vector fi = F.transpose() * y;
        FtFi.setZero();
        FtFi.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose());
        FtFi = symmetrize_from_lower(FtFi);
        Vector Ji;
        if (problem.weighted()) {
            const Matrix WF = problem.W[i] * F;
            Ji = WF.transpose() * y;
            Li = symmetrize_from_lower(F.transpose() * WF);
        } else {
            Ji = fi;
            Li = FtFi;
        }
        pre.norm_C2 += y.squaredNorm();
        pre.f += fi;
        pre.f_tilde += Ji;
        pre.FtF += FtFi;
        pre.g += Ji.cwiseProduct(fi);
        H += Ji.asDiagonal() * FtFi;
        Hx += fi.asDiagonal() * Li;
        for (Index b = 0; b < p; ++b) {
            for (Index c = 0; c < p; ++c) pre.G2.col(b * p + c) += Li.col(b).cwiseProduct(FtFi.col(c));
        }
    }
    pre.G1 = H * pre.f_tilde.asDiagonal();
    pre.G1_cross = Hx * pre.f_tilde.asDiagonal();
    return pre;
}

double igcv_value(const GcvPrecomp& pre, const Vector& s, double lambda) {
    if (lambda < 0.0) throw DomainError("lambda must be non-negative");
    const Index p = s.size();
    if (pre.f.size() != p) throw DomainError("igcv_value: precomputation and spectrum differ in size");
    const Vector d = (1.0 + lambda * s.array()).inverse().matrix();
    const Vector v = pre.f_tilde.cwiseProduct(d);
    const double term_fit = -2.0 * d.dot(pre.f_tilde.cwiseProduct(pre.f));
    const double term_quad = v.dot(pre.FtF * v);
    const double term_g = 2.0 * d.dot(pre.g);
    const double term_g1 = -2.0 * d.dot((pre.G1 + pre.G1_cross) * d);
    const double term_g2 = 2.0 * d.dot(pre.G2 * kron(v, v));
    return pre.norm_C2 + term_fit + term_quad + term_g + term_g1 + term_g2;
}

double exact_icv(const GroupedProblem& problem, double lambda, double ridge) {
    if (lambda < 0.0) throw DomainError("lambda must be non-negative");
    const auto cp = cross_products(problem);
    Matrix K = cp.XtWX + lambda * problem.Q;
    K.diagonal().array() += ridge;
    Eigen::LDLT<Matrix> ldlt(K);
    if (!ldlt_invertible(ldlt)) {
        throw NumericalError("exact_icv: penalized normal equations are singular");
    }
    const Vector alpha = ldlt.solve(cp.XtWy);
    double total = 0.0;
    for (std::size_t i = 0; i < problem.groups(); ++i) {
        const Matrix& X = problem.X[i];
        const Vector r = X * alpha - problem.y[i];
        Matrix Sii = X * ldlt.solve(X.transpose());
        if (problem.weighted()) Sii = Sii * problem.W[i];
        const Matrix I_minus = Matrix::Identity(X.rows(), X.rows()) - Sii;
        Eigen::FullPivLU<Matrix> lu(I_minus);
        if (!lu.isInvertible()) throw NumericalError("exact_icv: I - S_ii is singular for a subject");
        total += lu.solve(r).squaredNorm();
    }
    return total;
}

LambdaSelection select_lambda(const std::vector<double>& grid, const std::vector<double>& scores) {
    if (grid.empty() || grid.size() != scores.size()) throw DomainError("select_lambda: bad grid");
    LambdaSelection sel;
    sel.grid = grid;
    sel.scores = scores;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(scores[k])) continue;
        if (!found || scores[k] < best || (scores[k] == best && grid[k] < sel.lambda)) {
            best = scores[k];
            sel.lambda = grid[k];
            sel.index = k;
            found = true;
        }
    }
    if (!found) throw NumericalError("criterion is not finite anywhere on the lambda grid");
    sel.on_boundary = grid.size() > 1 && (sel.index == 0 || sel.index + 1 == grid.size());
    return sel;
}

}  // namespace face
