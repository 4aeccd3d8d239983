#include "face/design.hpp"

#include "face/error.hpp"

namespace face {

MeanFit MeanFit::zero(int order) {
    MeanFit m;
    m.basis = SplineBasis(order, {});
    m.coefficients = Vector::Zero(m.basis.dim());
    return m;
}

Index Design::total_rows() const {
    Index n = 0;
    for (const auto& s : subjects) n += s.size();
    return n;
}

Matrix Design::stacked_X() const {
    Matrix X(total_rows(), params());
    Index row = 0;
    for (const auto& s : subjects) {
        X.middleRows(row, s.size()) = s.X;
        row += s.size();
    }
    return X;
}

Vector Design::stacked_C() const {
    Vector C(total_rows());
    Index row = 0;
    for (const auto& s : subjects) {
        C.segment(row, s.size()) = s.C_hat;
        row += s.size();
    }
    return C;
}

std::vector<std::pair<int, int>> product_pairs(int m) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(m) * (m + 1) / 2);
    for (int j1 = 0; j1 < m; ++j1) {
        for (int j2 = j1; j2 < m; ++j2) pairs.emplace_back(j1, j2);
    }
    return pairs;
}

std::vector<Vector> residuals(const SparseFunctionalDataset& ds, const MeanFit& mean) {
    std::vector<Vector> out;
    out.reserve(ds.n());
    for (const auto& rec : ds.subjects()) {
        const Vector fitted = mean.eval(rec.times);
        Vector r(static_cast<Index>(rec.size()));
        for (std::size_t j = 0; j < rec.size(); ++j) r(static_cast<Index>(j)) = rec.values[j] - fitted(static_cast<Index>(j));
        out.push_back(std::move(r));
    }
    return out;
}

Vector raw_products(const Vector& r) {
    const auto pairs = product_pairs(static_cast<int>(r.size()));
    Vector C(static_cast<Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) C(static_cast<Index>(k)) = r(pairs[k].first) * r(pairs[k].second);
    return C;
}

std::vector<Vector> raw_covariances(const SparseFunctionalDataset& ds, const MeanFit& mean) {
    std::vector<Vector> out;
    for (const auto& r : residuals(ds, mean)) out.push_back(raw_products(r));
    return out;
}

void design_row(const SplineBasis& basis, double s, double t, bool diagonal, Eigen::Ref<Vector> row) {
    const int c = basis.dim();
    const int k = basis.order();
    std::vector<double> bs(static_cast<std::size_t>(k)), bt(static_cast<std::size_t>(k));
    int fs = 0, ft = 0;
    basis.eval_nonzero(s, fs, bs);
    basis.eval_nonzero(t, ft, bt);
    row.setZero();
    // Theta_ab and Theta_ba share one vech entry, so summing over the full
    // support product yields b_s(k) b_t(l) + b_s(l) b_t(k) off the diagonal.
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            row(vech_index(fs + a, ft + b, c)) += bs[a] * bt[b];
        }
    }
    row(row.size() - 1) = diagonal ? 1.0 : 0.0;
}

Design build_design(const SparseFunctionalDataset& ds, const SplineBasis& basis,
                    const std::vector<Vector>& C_hat) {
    if (C_hat.size() != ds.n()) throw DomainError("raw products do not match the number of subjects");
    Design design;
    design.c = basis.dim();
    const Index p = design.params();
    design.subjects.reserve(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto& rec = ds.subject(i);
        SubjectDesign sd;
        sd.pairs = product_pairs(static_cast<int>(rec.size()));
        const auto n_i = static_cast<Index>(sd.pairs.size());
        if (C_hat[i].size() != n_i) throw DomainError("raw product vector has the wrong length");
        sd.C_hat = C_hat[i];
        sd.X.resize(n_i, p);
        sd.delta.resize(n_i);
        Vector row(p);
        for (Index r = 0; r < n_i; ++r) {
            const auto [j1, j2] = sd.pairs[static_cast<std::size_t>(r)];
            design_row(basis, rec.times[j1], rec.times[j2], j1 == j2, row);
            sd.X.row(r) = row.transpose();
            sd.delta(r) = j1 == j2 ? 1.0 : 0.0;
        }
        design.subjects.push_back(std::move(sd));
    }
    return design;
}

}  // namespace face
