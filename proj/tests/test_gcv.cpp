#include <gtest/gtest.h>

#include <face/error.hpp>
#include <face/gcv.hpp>
#include <face/oracle.hpp>
#include <face/sim.hpp>

#include "test_support.hpp"

using namespace face;
using namespace face::testing;

TEST(KhatriRao, RowwiseKronecker) {
    Matrix A(1, 2), B(1, 2);
    A << 1, 2;
    B << 1, 2;
    EXPECT_EQ(row_khatri_rao(A, B), (Matrix(1, 4) << 1, 2, 2, 4).finished());
    const Matrix I = Matrix::Identity(2, 2);
    const Matrix ones = Matrix::Ones(2, 2);
    EXPECT_EQ(row_khatri_rao(I, ones), (Matrix(2, 4) << 1, 1, 0, 0, 0, 0, 1, 1).finished());
    const Vector a = (Vector(3) << 1, 2, 3).finished(), b = (Vector(3) << 4, 5, 6).finished();
    EXPECT_EQ(Vector(row_khatri_rao(a, b)), Vector(a.cwiseProduct(b)));
    EXPECT_THROW(row_khatri_rao(Matrix(2, 2), Matrix(3, 2)), DomainError);
}

namespace {

GcvPrecomp naive_precompute(const GroupedProblem& p, const Diagonalization& d) {
    const Index q = p.params();
    GcvPrecomp pre;
    pre.f = Vector::Zero(q);
    pre.f_tilde = Vector::Zero(q);
    pre.FtF = Matrix::Zero(q, q);
    pre.g = Vector::Zero(q);
    pre.G1 = Matrix::Zero(q, q);
    pre.G1_cross = Matrix::Zero(q, q);
    pre.G2 = Matrix::Zero(q, q * q);
    std::vector<Vector> f, J;
    std::vector<Matrix> FF, L;
    for (std::size_t i = 0; i < p.groups(); ++i) {
        const Matrix F = p.X[i] * d.A;
        const Matrix W = p.weighted() ? p.W[i] : Matrix::Identity(F.rows(), F.rows());
        f.push_back(F.transpose() * p.y[i]);
        J.push_back(F.transpose() * W * p.y[i]);
        FF.push_back(F.transpose() * F);
        L.push_back(F.transpose() * W * F);
        pre.norm_C2 += p.y[i].squaredNorm();
        pre.f += f.back();
        pre.f_tilde += J.back();
        pre.FtF += FF.back();
    }
    for (std::size_t i = 0; i < p.groups(); ++i) {
        pre.g += J[i].cwiseProduct(f[i]);
        pre.G1 += (J[i] * pre.f_tilde.transpose()).cwiseProduct(FF[i]);
        pre.G1_cross += (f[i] * pre.f_tilde.transpose()).cwiseProduct(L[i]);
        for (Index r = 0; r < q; ++r)
            for (Index a = 0; a < q; ++a)
                for (Index b = 0; b < q; ++b) pre.G2(r, a * q + b) += L[i](r, a) * FF[i](r, b);
    }
    return pre;
}

void expect_close(const GcvPrecomp& a, const GcvPrecomp& b, double tol) {
    EXPECT_NEAR(a.norm_C2, b.norm_C2, tol * std::abs(b.norm_C2));
    EXPECT_LT((a.f - b.f).norm(), tol * (1 + b.f.norm()));
    EXPECT_LT((a.f_tilde - b.f_tilde).norm(), tol * (1 + b.f_tilde.norm()));
    EXPECT_LT((a.g - b.g).norm(), tol * (1 + b.g.norm()));
    EXPECT_LT((a.FtF - b.FtF).norm(), tol * (1 + b.FtF.norm()));
    EXPECT_LT((a.G1 - b.G1).norm(), tol * (1 + b.G1.norm()));
    EXPECT_LT((a.G1_cross - b.G1_cross).norm(), tol * (1 + b.G1_cross.norm()));
    EXPECT_LT((a.G2 - b.G2).norm(), tol * (1 + b.G2.norm()));
}

Diagonalization diag_of(const GroupedProblem& p) { return diagonalize(cross_products(p).XtWX, p.Q); }

}  // namespace

TEST(Precompute, MatchesNaiveLoops) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto inst = random_instance(seed, seed % 2 == 0);
        const auto d = diag_of(inst.problem);
        expect_close(precompute(inst.problem, d), naive_precompute(inst.problem, d), 1e-12);
    }
}

TEST(Precompute, SingleSubjectCollapses) {
    const auto inst = random_instance(3, false, 1, 1, 4, 3);
    const auto d = diag_of(inst.problem);
    const GcvPrecomp pre = precompute(inst.problem, d);
    EXPECT_LT((pre.g - pre.f.cwiseProduct(pre.f)).norm(), 1e-12 * (1 + pre.g.norm()));
    EXPECT_LT((pre.G1 - (pre.f * pre.f.transpose()).cwiseProduct(pre.FtF)).norm(), 1e-12 * (1 + pre.G1.norm()));
    EXPECT_LT((pre.G2 - row_khatri_rao(pre.FtF, pre.FtF)).norm(), 1e-12 * (1 + pre.G2.norm()));
    EXPECT_LT((pre.G1 - pre.G1_cross).norm(), 1e-12 * (1 + pre.G1.norm()));
}

TEST(Precompute, DuplicatedSubjectsDouble) {
    auto inst = random_instance(4, true);
    const auto d = diag_of(inst.problem);
    GroupedProblem twice = inst.problem;
    for (std::size_t i = 0; i < inst.problem.groups(); ++i) {
        twice.X.push_back(inst.problem.X[i]);
        twice.y.push_back(inst.problem.y[i]);
        twice.W.push_back(inst.problem.W[i]);
    }
    const GcvPrecomp one = precompute(inst.problem, d);
    const GcvPrecomp two = precompute(twice, d);
    EXPECT_NEAR(two.norm_C2, 2 * one.norm_C2, 1e-12 * one.norm_C2);
    EXPECT_LT((two.f - 2 * one.f).norm(), 1e-12 * (1 + one.f.norm()));
    EXPECT_LT((two.FtF - 2 * one.FtF).norm(), 1e-12 * (1 + one.FtF.norm()));
    EXPECT_LT((two.g - 2 * one.g).norm(), 1e-12 * (1 + one.g.norm()));
    EXPECT_LT((two.G2 - 2 * one.G2).norm(), 1e-12 * (1 + one.G2.norm()));
    // G1 also picks up the doubled f_tilde.
    EXPECT_LT((two.G1 - 4 * one.G1).norm(), 1e-12 * (1 + one.G1.norm()));
}

TEST(Igcv, MatchesLiteralDenseFormula) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto inst = random_instance(1000 + seed, seed % 2 == 0);
        const auto d = diag_of(inst.problem);
        const GcvPrecomp pre = precompute(inst.problem, d);
        const auto dense = oracle::make_dense(inst.problem, d.ridge);
        for (double lambda : {0.0, 0.37, 10.0, 1e3, 1e12}) {
            const double fast = igcv_value(pre, d.s, lambda);
            const double slow = oracle::dense_igcv(dense, lambda);
            EXPECT_LE(rel_err(fast, slow), 1e-8) << "seed " << seed << " lambda " << lambda;
        }
    }
}

TEST(Igcv, ZeroSmootherDiagonalGivesIcv) {
    // Every X_i = 0, so S_ii = 0 and both criteria reduce to ||C||^2.
    RandomStream rng(1);
    GroupedProblem p;
    for (int i = 0; i < 3; ++i) {
        p.X.push_back(Matrix::Zero(3, 4));
        p.y.push_back(random_vector(3, rng));
    }
    p.Q = Matrix::Identity(4, 4);
    double norm2 = 0.0;
    for (const auto& y : p.y) norm2 += y.squaredNorm();
    const auto dense = oracle::make_dense(p);
    EXPECT_NEAR(oracle::dense_igcv(dense, 1.0), norm2, 1e-12 * norm2);
    EXPECT_NEAR(exact_icv(p, 1.0), norm2, 1e-12 * norm2);
}

TEST(Igcv, ContinuousAlongGrid) {
    RandomStream rng(3, 0);
    const auto sim = gen_case1(100, MSet::I1, 2.0, rng);
    const Design design = build_design(sim.data, make_basis(sim.data.pooled_times()),
                                       raw_covariances(sim.data, MeanFit::zero()));
    const GroupedProblem p = covariance_problem(design);
    const auto d = diag_of(p);
    const GcvPrecomp pre = precompute(p, d);
    const auto grid = LambdaGrid{}.values();
    double prev = igcv_value(pre, d.s, grid[0]);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double cur = igcv_value(pre, d.s, grid[k]);
        EXPECT_LT(std::abs(cur - prev), 0.1 * std::abs(prev)) << grid[k];
        prev = cur;
    }
}

TEST(ExactIcv, MatchesRefitOracle) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto inst = random_instance(2000 + seed, seed % 2 == 1, 3, 6);
        const auto d = diag_of(inst.problem);
        const auto dense = oracle::make_dense(inst.problem, d.ridge);
        for (double lambda : {0.05, 1.0, 30.0}) {
            const double fast = exact_icv(inst.problem, lambda, d.ridge);
            const double slow = oracle::refit_icv(dense, lambda);
            EXPECT_LE(rel_err(fast, slow), 1e-6) << "seed " << seed << " lambda " << lambda;
        }
    }
}

TEST(ExactIcv, UnpenalizedLeaveOutError) {
    const auto inst = random_instance(2100, false, 8, 8, 4, 3);
    const auto dense = oracle::make_dense(inst.problem);
    EXPECT_LE(rel_err(exact_icv(inst.problem, 0.0), oracle::refit_icv(dense, 0.0)), 1e-6);
}

TEST(ExactIcv, SingleSubjectEqualsNorm) {
    const auto inst = random_instance(5, false, 1, 1, 4, 3);
    const double ridge = 0.5;  // keeps I - S invertible on the unpenalized directions
    const double norm2 = inst.problem.y[0].squaredNorm();
    EXPECT_NEAR(exact_icv(inst.problem, 2.0, ridge), norm2, 1e-9 * norm2);
}

TEST(SelectLambda, TiesGoToSmallest) {
    const auto sel = select_lambda({0.1, 1.0, 10.0}, {2.0, 1.0, 1.0});
    EXPECT_EQ(sel.lambda, 1.0);
    EXPECT_EQ(sel.index, 1u);
    EXPECT_FALSE(sel.on_boundary);
    const auto edge = select_lambda({0.1, 1.0, 10.0}, {0.5, 1.0, std::nan("")});
    EXPECT_EQ(edge.lambda, 0.1);
    EXPECT_TRUE(edge.on_boundary);
}
