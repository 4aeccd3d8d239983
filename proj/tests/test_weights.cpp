#include <gtest/gtest.h>

#include <face/error.hpp>
#include <face/oracle.hpp>
#include <face/sim.hpp>
#include <face/weights.hpp>

#include "test_support.hpp"

using namespace face;
using namespace face::testing;

TEST(Weights, DiagonalPairVariance) {
    Matrix C(1, 1);
    C << 1.3;
    const Matrix V = covariance_of_products(C, 0.2);
    EXPECT_NEAR(V(0, 0), 2.0 * 1.5 * 1.5, 1e-14);
}

TEST(Weights, IndependentDistinctIndices) {
    const Matrix V = covariance_of_products(Matrix::Zero(4, 4), 0.0);
    // pairs (0,1) and (2,3)
    const auto pairs = product_pairs(4);
    Index a = 0, b = 0;
    for (Index k = 0; k < static_cast<Index>(pairs.size()); ++k) {
        if (pairs[k] == std::pair<int, int>{0, 1}) a = k;
        if (pairs[k] == std::pair<int, int>{2, 3}) b = k;
    }
    EXPECT_EQ(V(a, b), 0.0);
}

TEST(Weights, NoiseOnlyDiagonalVarianceIsTwo) {
    const Matrix V = oracle::isserlis_cov(Matrix::Zero(2, 2), 1.0);
    EXPECT_DOUBLE_EQ(V(0, 0), 2.0);
}

TEST(Weights, MatchesIsserlisEnumeration) {
    RandomStream rng(99);
    for (int rep = 0; rep < 30; ++rep) {
        const int m = rng.uniform_int(1, 4);
        const Matrix C = random_spd(m, rng);
        const double s2 = rng.uniform();
        const Matrix fast = covariance_of_products(C, s2);
        const Matrix slow = oracle::isserlis_cov(C, s2);
        EXPECT_LE(max_abs_diff(fast, slow), 1e-10 * slow.cwiseAbs().maxCoeff());
        EXPECT_EQ(fast, Matrix(fast.transpose()));
    }
}

TEST(Weights, EvaluatorOverloadUsesTimes) {
    const auto C = truth_covariance(SimCase::Case1);
    const std::vector<double> t{0.1, 0.35, 0.8};
    Matrix Cm(3, 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) Cm(a, b) = C(t[a], t[b]);
    EXPECT_LT(max_abs_diff(covariance_of_products(C, 0.5, t), covariance_of_products(Cm, 0.5)), 1e-13);
}

TEST(Weights, BlendOfDiagonalIsInverse) {
    const Matrix V = Vector(Vector::LinSpaced(4, 1.0, 4.0)).asDiagonal();
    for (double beta : {0.05, 0.5, 0.9}) EXPECT_LT(max_abs_diff(blend_weights(V, beta), V.inverse()), 1e-14);
}

TEST(Weights, BetaOneKeepsOnlyDiagonal) {
    Matrix V(2, 2);
    V << 2, 1, 1, 4;
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 0.5;
    expected(1, 1) = 0.25;
    EXPECT_LT(max_abs_diff(blend_weights(V, 1.0), expected), 1e-15);
}

TEST(Weights, TwoByTwoArithmetic) {
    Matrix V(2, 2);
    V << 2, 1, 1, 2;
    Matrix M(2, 2);
    M << 2, 0.95, 0.95, 2;
    EXPECT_LT(max_abs_diff(blend_weights(V, 0.05), M.inverse()), 1e-14);
}

TEST(Weights, BlendIsPositiveDefinite) {
    RandomStream rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const int m = rng.uniform_int(2, 5);
        const Matrix V = covariance_of_products(random_symmetric(m, rng), 0.0);  // possibly indefinite
        if (V.diagonal().minCoeff() <= 0) continue;
        Eigen::SelfAdjointEigenSolver<Matrix> es((1 - 0.05) * V + 0.05 * Matrix(V.diagonal().asDiagonal()));
        if (es.eigenvalues().minCoeff() <= 0) continue;
        const Matrix W = blend_weights(V, 0.05);
        EXPECT_EQ(W, Matrix(W.transpose()));
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(W).eigenvalues().minCoeff(), 0.0);
    }
}

TEST(Weights, NonPositiveDiagonalRejected) {
    EXPECT_THROW(blend_weights(Matrix::Zero(2, 2), 0.05), DomainError);
}

TEST(Weights, MonteCarloAgreesOnCase1) {
    const auto C = truth_covariance(SimCase::Case1);
    const std::vector<double> t{0.15, 0.4, 0.72};
    Matrix Cm(3, 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) Cm(a, b) = C(t[a], t[b]);
    const Matrix exact = covariance_of_products(Cm, 0.5);
    const auto mc = oracle::mc_cov_products(Cm, 0.5, 1000000, 2024);
    for (Index a = 0; a < exact.rows(); ++a)
        for (Index b = 0; b < exact.cols(); ++b)
            EXPECT_LE(std::abs(mc.cov(a, b) - exact(a, b)), 4.0 * mc.se(a, b)) << a << "," << b;
}
