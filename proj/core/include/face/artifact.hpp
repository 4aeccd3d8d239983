#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "face/dataset.hpp"
#include "face/linalg.hpp"
#include "face/mean.hpp"
#include "face/solver.hpp"
#include "face/splines.hpp"

namespace face {

inline constexpr const char* kArtifactFormat = "face-fit/1";

// Serializable fit: the spline model when one exists, plus the covariance on
// a G x G unit grid. Artifacts describing a known truth carry only the grid.
struct FitArtifact {
    TimeDomain domain;
    std::optional<SplineBasis> basis;
    std::optional<Vector> theta;  // vech(Theta)
    double sigma2 = 0.0;
    double lambda_step1 = 0.0;
    double lambda_step2 = 0.0;
    MeanFit mean = MeanFit::zero();
    Vector grid;      // unit scale
    Matrix cov_grid;  // G x G
    std::vector<std::string> warnings;

    bool has_model() const { return basis.has_value() && theta.has_value(); }
    // Rebuilds the fit; requires has_model().
    FitResult to_fit() const;
};

FitArtifact make_artifact(const FitResult& fit, int G);
FitArtifact make_truth_artifact(const std::function<double(double, double)>& C, double sigma2, int G);

void write_artifact(std::ostream& out, const FitArtifact& a);
FitArtifact read_artifact(std::istream& in);
FitArtifact load_artifact(const std::filesystem::path& path);

}  // namespace face
