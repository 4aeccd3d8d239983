#pragma once

#include <utility>
#include <vector>

#include "face/dataset.hpp"
#include "face/linalg.hpp"
#include "face/mean.hpp"
#include "face/splines.hpp"

namespace face {

// Raw covariance products of one subject and the design linking them to
// alpha = (vech Theta, sigma^2).
struct SubjectDesign {
    // Products r_{j1} r_{j2}, 1 <= j1 <= j2 <= m_i, j1 outermost.
    Vector C_hat;
    // n_i x (q+1): rows ({b(t_j2) (x) b(t_j1)}^T G_c, 1{j1 = j2}).
    Matrix X;
    Vector delta;
    std::vector<std::pair<int, int>> pairs;

    Index size() const { return C_hat.size(); }
};

struct Design {
    std::vector<SubjectDesign> subjects;
    int c = 0;

    Index params() const { return static_cast<Index>(c) * (c + 1) / 2 + 1; }
    Index total_rows() const;
    Matrix stacked_X() const;
    Vector stacked_C() const;
};

// (j1, j2) pairs with j1 <= j2 in stacking order.
std::vector<std::pair<int, int>> product_pairs(int m);

std::vector<Vector> residuals(const SparseFunctionalDataset& ds, const MeanFit& mean);

// Products of the residuals y_ij - f(t_ij) in stacking order, one vector per subject.
std::vector<Vector> raw_covariances(const SparseFunctionalDataset& ds, const MeanFit& mean);
Vector raw_products(const Vector& r);

// Design row for the product at (s, t), written into `row` (length q+1).
void design_row(const SplineBasis& basis, double s, double t, bool diagonal, Eigen::Ref<Vector> row);

Design build_design(const SparseFunctionalDataset& ds, const SplineBasis& basis,
                    const std::vector<Vector>& C_hat);

}  // namespace face
