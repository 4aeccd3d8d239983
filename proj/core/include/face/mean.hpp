#pragma once

#include <span>

#include "face/linalg.hpp"
#include "face/splines.hpp"

namespace face {

// Penalized B-spline estimate of the mean function on [0,1].
struct MeanFit {
    SplineBasis basis;
    Vector coefficients;
    double lambda = 0.0;

    double operator()(double t) const { return basis.eval(t).dot(coefficients); }
    Vector eval(std::span<const double> times) const { return basis.eval_matrix(times) * coefficients; }

    // f == 0, useful when data are already centered.
    static MeanFit zero(int order = 4);
};

}  // namespace face
