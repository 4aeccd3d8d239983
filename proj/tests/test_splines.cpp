#include <gtest/gtest.h>

#include <face/error.hpp>
#include <face/splines.hpp>

#include "test_support.hpp"

using namespace face;
using namespace face::testing;

namespace {

// Textbook Cox-de Boor recursion with the 0/0 = 0 convention; the last
// non-degenerate span is closed on the right.
double cox_de_boor(const std::vector<double>& knots, int i, int order, double t) {
    if (order == 1) {
        const double a = knots[i], b = knots[i + 1];
        if (a < b && t >= a && (t < b || (t == b && b == knots.back()))) return 1.0;
        return 0.0;
    }
    double v = 0.0;
    const double d1 = knots[i + order - 1] - knots[i];
    const double d2 = knots[i + order] - knots[i + 1];
    if (d1 > 0) v += (t - knots[i]) / d1 * cox_de_boor(knots, i, order - 1, t);
    if (d2 > 0) v += (knots[i + order] - t) / d2 * cox_de_boor(knots, i + 1, order - 1, t);
    return v;
}

}  // namespace

TEST(Splines, MatchesRecursiveDefinition) {
    const SplineBasis basis(4, {0.1, 0.3, 0.35, 0.8});
    for (int k = 0; k <= 200; ++k) {
        const double t = k / 200.0;
        const Vector b = basis.eval(t);
        for (int i = 0; i < basis.dim(); ++i) EXPECT_NEAR(b(i), cox_de_boor(basis.full_knots(), i, 4, t), 1e-13);
    }
}

TEST(Splines, PartitionOfUnityOnFineGrid) {
    for (int order : {2, 3, 4, 5}) {
        const SplineBasis basis(order, {0.05, 0.2, 0.21, 0.5, 0.77, 0.9});
        for (int k = 0; k <= 1000; ++k) {
            const Vector b = basis.eval(k / 1000.0);
            EXPECT_NEAR(b.sum(), 1.0, 1e-10);
            EXPECT_GE(b.minCoeff(), 0.0);
            EXPECT_LE((b.array() != 0.0).count(), order);
        }
    }
}

TEST(Splines, BoundaryValues) {
    const SplineBasis basis(4, {0.25, 0.5, 0.75});
    EXPECT_EQ(basis.dim(), 7);
    const Vector b0 = basis.eval(0.0), b1 = basis.eval(1.0);
    EXPECT_DOUBLE_EQ(b0(0), 1.0);
    EXPECT_DOUBLE_EQ(b0.tail(6).cwiseAbs().sum(), 0.0);
    EXPECT_DOUBLE_EQ(b1(6), 1.0);
    EXPECT_DOUBLE_EQ(b1.head(6).cwiseAbs().sum(), 0.0);
}

TEST(Splines, RejectsOutOfRange) {
    const SplineBasis basis(4, {0.5});
    EXPECT_THROW(basis.eval(-1e-9), DomainError);
    EXPECT_THROW(basis.eval(1.0 + 1e-9), DomainError);
}

TEST(Splines, QuantileKnotsForUniformTimes) {
    std::vector<double> t;
    for (int k = 0; k <= 10000; ++k) t.push_back(k / 10000.0);
    const SplineBasis basis = make_basis(t, 3, 4);
    ASSERT_EQ(basis.interior_knots().size(), 3u);
    EXPECT_NEAR(basis.interior_knots()[0], 0.25, 1e-6);
    EXPECT_NEAR(basis.interior_knots()[1], 0.5, 1e-6);
    EXPECT_NEAR(basis.interior_knots()[2], 0.75, 1e-6);
    EXPECT_EQ(basis.dim(), 7);
    EXPECT_EQ(make_basis(t, 10, 4).dim(), 14);
}

TEST(Splines, SingleKnotIsMedian) {
    const std::vector<double> t{0.1, 0.05, 0.4, 0.2, 0.5};
    const SplineBasis basis = make_basis(t, 1, 4);
    EXPECT_DOUBLE_EQ(basis.interior_knots()[0], 0.2);
}

TEST(Splines, TiedQuantilesBecomeDistinct) {
    std::vector<double> t(50, 0.3);
    for (double x : {0.0, 0.1, 0.2, 0.6, 0.9, 1.0}) t.push_back(x);
    const SplineBasis basis = make_basis(t, 4, 4);
    const auto& k = basis.interior_knots();
    for (std::size_t i = 0; i < k.size(); ++i) {
        EXPECT_GT(k[i], 0.0);
        EXPECT_LT(k[i], 1.0);
        if (i > 0) EXPECT_GT(k[i], k[i - 1]);
    }
}

TEST(Splines, TooFewDistinctTimes) {
    const std::vector<double> t{0.2, 0.2, 0.7};
    EXPECT_THROW(make_basis(t, 5, 4), DomainError);
}

TEST(Splines, DifferenceMatrix) {
    const Matrix D = difference_matrix(4);
    Matrix expected(2, 4);
    expected << 1, -2, 1, 0, 0, 1, -2, 1;
    EXPECT_EQ(Matrix(D.transpose()), expected);
    const Vector ones = Vector::Ones(9);
    const Vector lin = Vector::LinSpaced(9, -3.0, 5.0);
    EXPECT_LT((difference_matrix(9).transpose() * ones).norm(), 1e-14);
    EXPECT_LT((difference_matrix(9).transpose() * lin).norm(), 1e-13);
    Eigen::FullPivLU<Matrix> lu(difference_matrix(9).transpose());
    EXPECT_EQ(lu.dimensionOfKernel(), 2);
    EXPECT_THROW(difference_matrix(2), DomainError);
}

TEST(Splines, VechRoundTripAndIndex) {
    RandomStream rng(3);
    const Matrix A = random_symmetric(5, rng);
    const Vector v = vech(A);
    ASSERT_EQ(v.size(), 15);
    EXPECT_EQ(unvech(v, 5), A);
    // Lower-triangle columns stacked: (0,0),(1,0),...,(4,0),(1,1),...
    EXPECT_EQ(v(1), A(1, 0));
    EXPECT_EQ(v(5), A(1, 1));
    EXPECT_EQ(vech_index(2, 1, 5), 6);
    EXPECT_EQ(vech_index(1, 2, 5), 6);
}

TEST(Splines, DuplicationMatrix) {
    Matrix G2(4, 3);
    G2 << 1, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1;
    EXPECT_EQ(duplication_matrix(2), G2);
    EXPECT_EQ(duplication_matrix(1), Matrix::Ones(1, 1));
    RandomStream rng(5);
    for (int c : {3, 5, 8}) {
        const Matrix A = random_symmetric(c, rng);
        const Vector vecA = Eigen::Map<const Vector>(A.data(), c * c);
        EXPECT_LT((duplication_matrix(c) * vech(A) - vecA).norm(), 1e-14);
    }
}

TEST(Splines, PenaltyTraceIdentity) {
    RandomStream rng(11);
    for (int c : {3, 5, 8}) {
        const Matrix D = difference_matrix(c);
        const Matrix P = penalty_P(D, duplication_matrix(c));
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix Theta = random_symmetric(c, rng);
            const Vector th = vech(Theta);
            const double lhs = th.dot(P * th);
            const double rhs = (Theta * D * D.transpose() * Theta.transpose()).trace();
            EXPECT_LT(rel_err(lhs, rhs), 1e-10);
        }
    }
}

TEST(Splines, PenaltyIsSymmetricPsdAndKillsConstantRows) {
    const int c = 6;
    const Matrix P = penalty_P(difference_matrix(c), duplication_matrix(c));
    EXPECT_EQ(P, Matrix(P.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
    const Matrix ones = Matrix::Ones(c, c);
    EXPECT_NEAR(vech(ones).dot(P * vech(ones)), 0.0, 1e-12);
}

TEST(Splines, QEmbedsZeroBlock) {
    const int c = 4;
    const Matrix P = penalty_P(difference_matrix(c), duplication_matrix(c));
    const Matrix Q = embed_Q(P);
    const Index q = P.rows();
    ASSERT_EQ(Q.rows(), q + 1);
    EXPECT_EQ(Q.topLeftCorner(q, q), P);
    EXPECT_EQ(Q.row(q).cwiseAbs().sum(), 0.0);
    EXPECT_EQ(Q.col(q).cwiseAbs().sum(), 0.0);
    Vector a = Vector::LinSpaced(q + 1, 0.0, 1.0);
    Vector b = a;
    b(q) = 123.0;
    EXPECT_DOUBLE_EQ(a.dot(Q * a), b.dot(Q * b));
}
