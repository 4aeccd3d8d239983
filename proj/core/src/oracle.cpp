#include "face/oracle.hpp"

#include <cmath>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "face/design.hpp"
#include "face/error.hpp"
#include "face/random.hpp"

namespace face::oracle {

namespace {

using Real = boost::multiprecision::float128;
using QMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using QVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

QMatrix to_quad(const Matrix& m) { return m.cast<Real>(); }
QVector to_quad(const Vector& v) { return v.cast<Real>(); }

Matrix to_double(const QMatrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) out(i, j) = static_cast<double>(m(i, j));
    return out;
}

Vector to_double(const QVector& v) {
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out(i) = static_cast<double>(v(i));
    return out;
}

QMatrix system_matrix(const QMatrix& X, const QMatrix& W, const QMatrix& Q, double ridge, double lambda) {
    QMatrix M = X.transpose() * W * X + Real(lambda) * Q;
    M.diagonal().array() += Real(ridge);
    return M;
}

// Solves M Z = B, failing loudly when M is numerically singular.
QMatrix checked_solve(const QMatrix& M, const QMatrix& B) {
    Eigen::FullPivLU<QMatrix> lu(M);
    lu.setThreshold(Real(1e-28));
    if (!lu.isInvertible()) throw NumericalError("oracle: singular penalized system");
    return lu.solve(B);
}

struct QuadSmoother {
    QMatrix S;
};

QMatrix quad_smoother(const DenseProblem& p, double lambda) {
    const QMatrix X = to_quad(p.X);
    const QMatrix W = to_quad(p.W);
    const QMatrix M = system_matrix(X, W, to_quad(p.Q), p.ridge, lambda);
    const QMatrix XtW = X.transpose() * W;
    return X * checked_solve(M, XtW);
}

}  // namespace

void DenseProblem::validate() const {
    const Index N = X.rows();
    if (N > kMaxDenseRows) throw DomainError("oracle: problem exceeds the dense size limit");
    if (W.rows() != N || W.cols() != N || C.size() != N) throw DomainError("oracle: inconsistent row dimensions");
    if (Q.rows() != X.cols() || Q.cols() != X.cols()) throw DomainError("oracle: penalty shape mismatch");
    if (boundaries.size() < 2 || boundaries.front() != 0 || boundaries.back() != N)
        throw DomainError("oracle: subject boundaries do not cover the rows");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (boundaries[i] <= boundaries[i - 1]) throw DomainError("oracle: empty or unordered subject block");
}

DenseProblem make_dense(const GroupedProblem& problem, double ridge) {
    problem.validate();
    const Index N = problem.total_rows();
    if (N > kMaxDenseRows) throw DomainError("oracle: problem exceeds the dense size limit");
    const Index p = problem.params();
    DenseProblem d;
    d.X = Matrix::Zero(N, p);
    d.W = Matrix::Zero(N, N);
    d.C = Vector::Zero(N);
    d.Q = problem.Q;
    d.ridge = ridge;
    d.boundaries.push_back(0);
    Index r = 0;
    for (std::size_t i = 0; i < problem.groups(); ++i) {
        const Index ni = problem.X[i].rows();
        d.X.middleRows(r, ni) = problem.X[i];
        d.C.segment(r, ni) = problem.y[i];
        d.W.block(r, r, ni, ni) = problem.weighted() ? problem.W[i] : Matrix::Identity(ni, ni);
        r += ni;
        d.boundaries.push_back(r);
    }
    return d;
}

DenseSmoother dense_smoother(const DenseProblem& problem, double lambda) {
    problem.validate();
    DenseSmoother out;
    out.S = to_double(quad_smoother(problem, lambda));
    for (std::size_t i = 0; i < problem.subjects(); ++i) {
        const Index a = problem.boundaries[i];
        const Index ni = problem.boundaries[i + 1] - a;
        out.S_i.push_back(out.S.middleRows(a, ni));
        out.S_ii.push_back(out.S.block(a, a, ni, ni));
    }
    return out;
}

double dense_igcv(const DenseProblem& problem, double lambda) {
    problem.validate();
    const QMatrix S = quad_smoother(problem, lambda);
    const QVector C = to_quad(problem.C);
    const QVector SC = S * C;
    Real total = (C - SC).squaredNorm();
    for (std::size_t i = 0; i < problem.subjects(); ++i) {
        const Index a = problem.boundaries[i];
        const Index ni = problem.boundaries[i + 1] - a;
        const QVector e = SC.segment(a, ni) - C.segment(a, ni);
        total += Real(2) * e.dot(S.block(a, a, ni, ni) * e);
    }
    return static_cast<double>(total);
}

Vector dense_solve(const DenseProblem& problem, double lambda) {
    problem.validate();
    const QMatrix X = to_quad(problem.X);
    const QMatrix W = to_quad(problem.W);
    const QMatrix M = system_matrix(X, W, to_quad(problem.Q), problem.ridge, lambda);
    const QMatrix rhs = X.transpose() * W * to_quad(problem.C);
    return to_double(QVector(checked_solve(M, rhs)));
}

double refit_icv(const DenseProblem& problem, double lambda) {
    problem.validate();
    const QMatrix X = to_quad(problem.X);
    const QMatrix W = to_quad(problem.W);
    const QMatrix Q = to_quad(problem.Q);
    const QVector C = to_quad(problem.C);
    const Index N = problem.rows();
    Real total = 0;
    for (std::size_t i = 0; i < problem.subjects(); ++i) {
        const Index a = problem.boundaries[i];
        const Index b = problem.boundaries[i + 1];
        // Drop subject i's rows and columns of W; W is block diagonal so the
        // remaining blocks are untouched.
        std::vector<Index> keep;
        for (Index r = 0; r < N; ++r)
            if (r < a || r >= b) keep.push_back(r);
        const auto K = static_cast<Index>(keep.size());
        QMatrix Xk(K, X.cols()), Wk(K, K);
        QVector Ck(K);
        for (Index r = 0; r < K; ++r) {
            Xk.row(r) = X.row(keep[r]);
            Ck(r) = C(keep[r]);
            for (Index s = 0; s < K; ++s) Wk(r, s) = W(keep[r], keep[s]);
        }
        const QMatrix M = system_matrix(Xk, Wk, Q, problem.ridge, lambda);
        const QVector alpha = checked_solve(M, QMatrix(Xk.transpose() * Wk * Ck));
        const QVector err = X.middleRows(a, b - a) * alpha - C.segment(a, b - a);
        total += err.squaredNorm();
    }
    return static_cast<double>(total);
}

double gaussian_moment(const Matrix& Sigma, const std::vector<int>& idx) {
    if (idx.empty()) return 1.0;
    if (idx.size() % 2 == 1) return 0.0;
    // Pair the first index with each remaining one and recurse.
    double sum = 0.0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        std::vector<int> rest;
        for (std::size_t r = 1; r < idx.size(); ++r)
            if (r != k) rest.push_back(idx[r]);
        sum += Sigma(idx[0], idx[k]) * gaussian_moment(Sigma, rest);
    }
    return sum;
}

Matrix isserlis_cov(const Matrix& C, double sigma2) {
    const auto m = static_cast<int>(C.rows());
    Matrix Sigma = C;
    Sigma.diagonal().array() += sigma2;
    const auto pairs = product_pairs(m);
    const auto n = static_cast<Index>(pairs.size());
    Matrix out(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) {
            const auto [j, k] = pairs[static_cast<std::size_t>(a)];
            const auto [jp, kp] = pairs[static_cast<std::size_t>(b)];
            out(a, b) = gaussian_moment(Sigma, {j, k, jp, kp}) -
                        gaussian_moment(Sigma, {j, k}) * gaussian_moment(Sigma, {jp, kp});
        }
    }
    return out;
}

MonteCarloCov mc_cov_products(const Matrix& C, double sigma2, Index draws, std::uint64_t seed) {
    if (draws < 2) throw DomainError("mc_cov_products: need at least two draws");
    const Index m = C.rows();
    Matrix Sigma = C;
    Sigma.diagonal().array() += sigma2;
    Eigen::LDLT<Matrix> ldlt(Sigma);
    if (ldlt.info() != Eigen::Success) throw NumericalError("mc_cov_products: covariance is not factorizable");
    // Sigma = P^T L D L^T P, so P^T L sqrt(D) z has covariance Sigma.
    Matrix root = ldlt.matrixL();
    root = root * ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    root = ldlt.transpositionsP().transpose() * root;

    const auto pairs = product_pairs(static_cast<int>(m));
    const auto n = static_cast<Index>(pairs.size());
    Matrix P(draws, n);
    RandomStream rng(seed, 0);
    Vector z(m);
    for (Index d = 0; d < draws; ++d) {
        for (Index a = 0; a < m; ++a) z(a) = rng.normal();
        const Vector y = root * z;
        for (Index a = 0; a < n; ++a) P(d, a) = y(pairs[a].first) * y(pairs[a].second);
    }
    const Vector mean = P.colwise().mean();
    P.rowwise() -= mean.transpose();

    MonteCarloCov out;
    out.draws = draws;
    out.cov = (P.transpose() * P) / static_cast<double>(draws - 1);
    out.se = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b <= a; ++b) {
            const Vector prod = P.col(a).cwiseProduct(P.col(b));
            const double mu = prod.mean();
            const double var = (prod.array() - mu).square().sum() / static_cast<double>(draws - 1);
            out.se(a, b) = out.se(b, a) = std::sqrt(var / static_cast<double>(draws));
        }
    }
    return out;
}

Conditional mvn_condition(const Vector& joint_mean, const Matrix& joint_cov, const std::vector<Index>& observed,
                          const Vector& observed_values) {
    const Index N = joint_mean.size();
    if (joint_cov.rows() != N || joint_cov.cols() != N) throw DomainError("mvn_condition: shape mismatch");
    if (static_cast<Index>(observed.size()) != observed_values.size())
        throw DomainError("mvn_condition: observed values do not match indices");
    std::vector<bool> is_obs(static_cast<std::size_t>(N), false);
    for (Index o : observed) {
        if (o < 0 || o >= N || is_obs[o]) throw DomainError("mvn_condition: bad observed index");
        is_obs[o] = true;
    }
    std::vector<Index> rest;
    for (Index r = 0; r < N; ++r)
        if (!is_obs[r]) rest.push_back(r);
    const auto no = static_cast<Index>(observed.size());
    const auto nr = static_cast<Index>(rest.size());

    QMatrix S11(nr, nr), S12(nr, no), S22(no, no);
    QVector mu1(nr), d2(no);
    for (Index a = 0; a < nr; ++a) {
        mu1(a) = joint_mean(rest[a]);
        for (Index b = 0; b < nr; ++b) S11(a, b) = joint_cov(rest[a], rest[b]);
        for (Index b = 0; b < no; ++b) S12(a, b) = joint_cov(rest[a], observed[b]);
    }
    for (Index a = 0; a < no; ++a) {
        d2(a) = Real(observed_values(a)) - Real(joint_mean(observed[a]));
        for (Index b = 0; b < no; ++b) S22(a, b) = joint_cov(observed[a], observed[b]);
    }
    const QMatrix K = checked_solve(S22, S12.transpose()).transpose();  // S12 S22^{-1}
    Conditional out;
    out.mean = to_double(QVector(mu1 + K * d2));
    out.cov = to_double(QMatrix(S11 - K * S12.transpose()));
    return out;
}

}  // namespace face::oracle
