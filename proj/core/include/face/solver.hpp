#pragma once

#include <optional>
#include <string>
#include <vector>

#include "face/dataset.hpp"
#include "face/design.hpp"
#include "face/gcv.hpp"
#include "face/linalg.hpp"
#include "face/mean.hpp"
#include "face/smoother.hpp"
#include "face/splines.hpp"
#include "face/weights.hpp"

namespace face {

// Largest N for which exact leave-one-subject-out CV may be used as the selector.
inline constexpr Index kExactIcvMaxRows = 5000;

enum class Criterion { IGCV, ExactICV };

// Result of selecting lambda on a grid and solving at the selected value.
struct SmootherFit {
    Vector alpha;
    LambdaSelection selection;
    Diagonalization diag;
};

// Selects lambda by iGCV (or exact iCV) over `grid`, then solves the PWLS
// system. `fixed_lambda` skips the search.
SmootherFit fit_smoother(const GroupedProblem& problem, const LambdaGrid& grid,
                         Criterion criterion = Criterion::IGCV,
                         std::optional<double> fixed_lambda = std::nullopt);

struct MeanOptions {
    int n_interior = 10;
    int order = 4;
    LambdaGrid grid;
    std::optional<double> fixed_lambda;
};

// Univariate P-spline fit of y on t, rows grouped by subject, lambda chosen by
// leave-one-subject-out iGCV. Requires a rescaled dataset.
MeanFit fit_mean_pspline(const SparseFunctionalDataset& ds, const MeanOptions& opts = {});

struct FitOptions {
    int n_interior = 10;
    int order = 4;
    double beta = kDefaultBeta;
    LambdaGrid grid;
    Criterion criterion = Criterion::IGCV;
    MeanOptions mean;
    // Replaces the estimated mean (e.g. a known zero mean).
    std::optional<MeanFit> mean_override;
    // Skips the lambda search in both steps.
    std::optional<double> fixed_lambda;
    // When false the second step reuses W = I (degenerate two-step).
    bool gls = true;
};

struct FitDiagnostics {
    LambdaSelection step1;
    LambdaSelection step2;
    double sigma2_step1 = 0.0;      // unconstrained OLS estimate
    double sigma2_working = 0.0;    // clamped value used to build the weights
    double sigma2_unclamped = 0.0;  // unconstrained final estimate
    bool sigma2_clamped = false;
    int steps = 2;
    std::vector<std::string> warnings;
};

struct FitResult {
    SplineBasis basis;
    Vector theta;  // vech(Theta_hat)
    Matrix Theta;  // symmetric c x c, expanded from `theta`
    double sigma2 = 0.0;
    double lambda_step1 = 0.0;
    double lambda_step2 = 0.0;
    MeanFit mean;
    TimeDomain domain;
    FitDiagnostics diagnostics;

    // C~(s, t) = b(s)^T Theta b(t) on the unit interval.
    double covariance(double s, double t) const;
};

// Two-step estimator: mean fit and raw products, OLS with lambda by iGCV,
// plug-in weights from the OLS fit, then GLS with lambda re-selected.
FitResult fit_two_step(const SparseFunctionalDataset& ds, const SplineBasis& basis, const FitOptions& opts = {});
FitResult fit_two_step(const SparseFunctionalDataset& ds, const FitOptions& opts = {});

// Grouped problem for the covariance smoother (W = I).
GroupedProblem covariance_problem(const Design& design);

}  // namespace face
