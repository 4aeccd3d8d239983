#pragma once

#include <span>

#include "face/dataset.hpp"
#include "face/linalg.hpp"
#include "face/solver.hpp"

namespace face {

struct PredictOptions {
    double level = 0.95;
    // Drop sigma^2 I from the new-point block: bands for the noise-free curve.
    bool latent = false;
};

struct PredictionResult {
    Vector new_times;
    Vector x_hat;
    Matrix cov;
    Vector band_lo;
    Vector band_hi;
    double level = 0.95;
};

// Conditional mean and covariance of the subject's curve at `new_times`
// (unit scale) given its observations, with plug-in Theta, sigma^2 and mean.
PredictionResult predict_subject(const FitResult& fit, const SubjectRecord& record,
                                 std::span<const double> new_times, const PredictOptions& opts = {});

// Same computation from the raw pieces.
PredictionResult predict_subject(const SplineBasis& basis, const Matrix& Theta, double sigma2, const MeanFit& mean,
                                 const SubjectRecord& record, std::span<const double> new_times,
                                 const PredictOptions& opts = {});

// x_hat -/+ z_{(1+level)/2} sqrt(diag cov), diagonal clipped at 0.
void confidence_bands(PredictionResult& pred, double level);

// Standard normal quantile z with P(|Z| <= z) = level.
double two_sided_normal_quantile(double level);

}  // namespace face
