#include <gtest/gtest.h>

#include <algorithm>

#include <face/error.hpp>
#include <face/gcv.hpp>
#include <face/oracle.hpp>
#include <face/sim.hpp>
#include <face/solver.hpp>
#include <face/spectral.hpp>

#include "test_support.hpp"

using namespace face;
using namespace face::testing;

TEST(Diagonalize, AlreadyDiagonalSystem) {
    const Vector q = (Vector(4) << 0.5, 3.0, 0.0, 1.5).finished();
    const Diagonalization d = diagonalize(Matrix::Identity(4, 4), q.asDiagonal());
    EXPECT_LT((d.s - Vector((Vector(4) << 3.0, 1.5, 0.5, 0.0).finished())).norm(), 1e-7);
    EXPECT_EQ(d.null_dim, 1);
    // A is a signed permutation up to the ridge scaling.
    const Matrix absA = d.A.cwiseAbs();
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(absA.col(j).maxCoeff(), 1.0, 1e-7);
}

TEST(Diagonalize, SimultaneousDiagonalization) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = random_instance(seed, seed % 2 == 1);
        const auto cp = cross_products(inst.problem);
        const Diagonalization d = diagonalize(cp.XtWX, inst.problem.Q);
        Matrix K = cp.XtWX;
        K.diagonal().array() += d.ridge;
        const Index p = K.rows();
        EXPECT_LT(max_abs_diff(d.A.transpose() * K * d.A, Matrix::Identity(p, p)), 1e-8);
        EXPECT_LT(max_abs_diff(d.A.transpose() * inst.problem.Q * d.A, Matrix(d.s.asDiagonal())),
                  1e-8 * std::max(1.0, d.s.maxCoeff()));
        EXPECT_GE(d.s.minCoeff(), -1e-10);
        EXPECT_GE(d.null_dim, 1);
        EXPECT_EQ(d.s(p - 1), 0.0);
        for (Index k = 1; k < p; ++k) EXPECT_GE(d.s(k - 1), d.s(k));
    }
}

TEST(Diagonalize, SmootherMatchesDenseOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = random_instance(100 + seed, true);
        const auto cp = cross_products(inst.problem);
        const Diagonalization d = diagonalize(cp.XtWX, inst.problem.Q);
        const auto dense = oracle::make_dense(inst.problem, d.ridge);
        const Matrix F = dense.X * d.A;
        for (double lambda : {0.1, 10.0}) {
            const Vector dt = (1.0 + lambda * d.s.array()).inverse().matrix();
            const Vector fast = F * dt.asDiagonal() * F.transpose() * dense.W * dense.C;
            const Vector slow = oracle::dense_smoother(dense, lambda).S * dense.C;
            EXPECT_LT((fast - slow).norm(), 1e-8 * slow.norm());
        }
    }
}

TEST(Pwls, InterpolatesSquareSystem) {
    RandomStream rng(8);
    GroupedProblem p;
    p.X = {random_matrix(5, 5, rng)};
    p.y = {random_vector(5, rng)};
    p.Q = random_spd(5, rng);
    const Vector alpha = fit_pwls(p, 0.0);
    EXPECT_LT((alpha - p.X[0].lu().solve(p.y[0])).norm(), 1e-10 * alpha.norm());
}

TEST(Pwls, RecoversNoiselessCoefficients) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto inst = random_instance(200 + seed, seed % 2 == 0);
        RandomStream rng(seed);
        const Vector alpha0 = random_vector(inst.problem.params(), rng);
        for (std::size_t i = 0; i < inst.problem.groups(); ++i) inst.problem.y[i] = inst.problem.X[i] * alpha0;
        EXPECT_LT((fit_pwls(inst.problem, 0.0) - alpha0).norm(), 1e-8 * alpha0.norm());
    }
}

TEST(Pwls, MatchesDenseNormalEquations) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = random_instance(300 + seed, true, 6, 6, 4, 5);
        const auto dense = oracle::make_dense(inst.problem);
        for (double lambda : {0.01, 1.0, 100.0}) {
            const Vector fast = fit_pwls(inst.problem, lambda);
            const Vector slow = oracle::dense_solve(dense, lambda);
            EXPECT_LT((fast - slow).norm(), 1e-8 * slow.norm());
        }
    }
}

TEST(Pwls, IdentityWeightsReproduceUnweighted) {
    auto inst = random_instance(7, false);
    const Vector a0 = fit_smoother(inst.problem, LambdaGrid{}).alpha;
    for (const auto& X : inst.problem.X) inst.problem.W.push_back(Matrix::Identity(X.rows(), X.rows()));
    const Vector a1 = fit_smoother(inst.problem, LambdaGrid{}).alpha;
    EXPECT_LT((a0 - a1).norm(), 1e-12 * a0.norm());
}

TEST(Pwls, FitPenaltyTradeOffIsMonotone) {
    const auto inst = random_instance(12, true);
    const auto cp = cross_products(inst.problem);
    double prev_fit = -1.0, prev_pen = std::numeric_limits<double>::infinity();
    for (double lambda : LambdaGrid{1e-4, 1e4, 30}.values()) {
        const Vector a = fit_pwls(inst.problem, lambda);
        double fit = 0.0;
        for (std::size_t i = 0; i < inst.problem.groups(); ++i) {
            const Vector r = inst.problem.y[i] - inst.problem.X[i] * a;
            fit += r.dot(inst.problem.W[i] * r);
        }
        const double pen = a.dot(inst.problem.Q * a);
        EXPECT_GE(fit, prev_fit - 1e-9 * std::abs(fit));
        EXPECT_LE(pen, prev_pen + 1e-9 * std::abs(pen));
        prev_fit = fit;
        prev_pen = pen;
    }
}

TEST(LambdaGridTest, LogSpacedInclusive) {
    const auto v = LambdaGrid{}.values();
    ASSERT_EQ(v.size(), 100u);
    EXPECT_DOUBLE_EQ(v.front(), 1e-6);
    EXPECT_NEAR(v.back(), 1e6, 1e-6);
    EXPECT_NEAR(v[1] / v[0], std::pow(1e12, 1.0 / 99.0), 1e-12);
}

namespace {

SparseFunctionalDataset from_function(int n, int m, std::uint64_t seed, double (*f)(double)) {
    RandomStream rng(seed);
    std::vector<SubjectRecord> subs;
    for (int i = 0; i < n; ++i) {
        SubjectRecord r{"s" + std::to_string(i), {}, {}};
        for (int j = 0; j < m; ++j) r.times.push_back(rng.uniform());
        std::sort(r.times.begin(), r.times.end());
        for (double t : r.times) r.values.push_back(f(t));
        subs.push_back(r);
    }
    return SparseFunctionalDataset(subs, TimeDomain{0, 1}, true);
}

}  // namespace

TEST(MeanFitTest, ConstantsAndLinesAreUnpenalized) {
    const auto three = fit_mean_pspline(from_function(30, 4, 1, [](double) { return 3.0; }));
    const auto line = fit_mean_pspline(from_function(30, 4, 2, [](double t) { return t; }));
    for (int k = 0; k <= 50; ++k) {
        const double t = k / 50.0;
        EXPECT_NEAR(three(t), 3.0, 1e-8);
        EXPECT_NEAR(line(t), t, 1e-6);
    }
}

TEST(MeanFitTest, ZeroMeanCase1StaysSmall) {
    std::vector<double> sups;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream rng(seed, 0);
        const auto sim = gen_case1(400, MSet::I1, 2.0, rng);
        const MeanFit f = fit_mean_pspline(sim.data);
        double sup = 0.0;
        for (int k = 0; k <= 200; ++k) sup = std::max(sup, std::abs(f(k / 200.0)));
        EXPECT_LE(sup, 0.6) << "seed " << seed;
        sups.push_back(sup);
    }
    std::nth_element(sups.begin(), sups.begin() + 10, sups.end());
    EXPECT_LE(sups[10], 0.2);
}

TEST(MeanFitTest, SelectionAgreesWithExactCv) {
    RandomStream rng(2, 0);
    const auto sim = gen_case1(400, MSet::I1, 2.0, rng);
    const MeanFit f = fit_mean_pspline(sim.data);
    GroupedProblem p;
    const Matrix D = difference_matrix(f.basis.dim());
    p.Q = D * D.transpose();
    for (const auto& r : sim.data.subjects()) {
        p.X.push_back(f.basis.eval_matrix(r.times));
        p.y.emplace_back(Eigen::Map<const Vector>(r.values.data(), static_cast<Index>(r.values.size())));
    }
    const auto d = diagonalize(cross_products(p).XtWX, p.Q);
    const auto grid = LambdaGrid{}.values();
    std::vector<double> scores;
    for (double l : grid) scores.push_back(exact_icv(p, l, d.ridge));
    EXPECT_EQ(select_lambda(grid, scores).lambda, f.lambda);
}

TEST(TwoStep, SingleObservationIsUnidentifiable) {
    std::vector<SubjectRecord> subs{{"a", {0.5}, {1.0}}};
    EXPECT_THROW(fit_two_step(SparseFunctionalDataset(subs)), IdentifiabilityError);
}

TEST(TwoStep, ConstantCovarianceRecovered) {
    RandomStream rng(77);
    std::vector<SubjectRecord> subs;
    for (int i = 0; i < 400; ++i) {
        SubjectRecord r{"s" + std::to_string(i), {}, {}};
        const double a = rng.normal();
        const int m = rng.uniform_int(3, 7);
        for (int j = 0; j < m; ++j) r.times.push_back(rng.uniform());
        r.values.assign(r.times.size(), a);
        subs.push_back(r);
    }
    // Times span [0,1] exactly so rescaling is the identity.
    subs[0].times[0] = 0.0;
    subs[1].times[0] = 1.0;
    FitOptions opts;
    opts.mean_override = MeanFit::zero();
    const FitResult fit = fit_two_step(SparseFunctionalDataset(subs), opts);
    double sample_var = 0.0;
    for (const auto& s : subs) sample_var += s.values[0] * s.values[0];
    sample_var /= static_cast<double>(subs.size());
    const Matrix C = eval_cov_grid(fit, unit_grid(51));
    // Target: the constant surface at the realized second moment of a_i (about 1).
    EXPECT_LT((C.array() - sample_var).abs().maxCoeff(), 0.05) << "sample second moment " << sample_var;
    EXPECT_LT((C.array() - 1.0).abs().maxCoeff(), 0.05);
    EXPECT_LE(fit.sigma2, 0.02);
    EXPECT_GE(fit.sigma2, 0.0);
}

TEST(TwoStep, ThetaSymmetricAndSurfaceSymmetric) {
    RandomStream rng(5, 0);
    const auto sim = gen_case1(60, MSet::I1, 2.0, rng);
    const FitResult fit = fit_two_step(sim.data);
    EXPECT_EQ(fit.Theta, Matrix(fit.Theta.transpose()));
    const Matrix C = eval_cov_grid(fit, unit_grid(41));
    EXPECT_EQ(C, Matrix(C.transpose()));
    EXPECT_GT(fit.lambda_step1, 0.0);
    EXPECT_GT(fit.lambda_step2, 0.0);
}

TEST(TwoStep, ScalingDataScalesEstimatesQuadratically) {
    RandomStream rng(9, 0);
    const auto sim = gen_case1(60, MSet::I1, 2.0, rng);
    std::vector<SubjectRecord> scaled = sim.data.subjects();
    const double k = 3.0;
    for (auto& s : scaled)
        for (double& v : s.values) v *= k;
    FitOptions opts;
    opts.fixed_lambda = 0.5;
    opts.mean.fixed_lambda = 0.1;
    const FitResult a = fit_two_step(sim.data, opts);
    const FitResult b = fit_two_step(SparseFunctionalDataset(scaled, TimeDomain{0, 1}, true), opts);
    EXPECT_LT((b.theta - k * k * a.theta).norm(), 1e-8 * (k * k * a.theta).norm());
    EXPECT_NEAR(b.sigma2, k * k * a.sigma2, 1e-8 * k * k * a.sigma2);
}

TEST(TwoStep, OlsOnlyKeepsStepOneEstimate) {
    RandomStream rng(10, 0);
    const auto sim = gen_case1(40, MSet::I1, 2.0, rng);
    FitOptions opts;
    opts.gls = false;
    const FitResult fit = fit_two_step(sim.data, opts);
    EXPECT_EQ(fit.lambda_step1, fit.lambda_step2);
}
