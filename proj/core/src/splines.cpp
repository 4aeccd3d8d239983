#include "face/splines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "face/error.hpp"

namespace face {

SplineBasis::SplineBasis(int order, std::vector<double> interior_knots)
    : order_(order), interior_(std::move(interior_knots)) {
    if (order_ < 2) throw DomainError("spline order must be at least 2");
    for (std::size_t k = 0; k < interior_.size(); ++k) {
        if (!(interior_[k] > 0.0 && interior_[k] < 1.0)) {
            throw DomainError("interior knots must lie strictly inside (0,1)");
        }
        if (k > 0 && !(interior_[k] > interior_[k - 1])) {
            throw DomainError("interior knots must be strictly increasing");
        }
    }
    knots_.assign(static_cast<std::size_t>(order_), 0.0);
    knots_.insert(knots_.end(), interior_.begin(), interior_.end());
    knots_.insert(knots_.end(), static_cast<std::size_t>(order_), 1.0);
}

int SplineBasis::find_span(double t) const {
    const int last = dim() - 1;
    if (t >= 1.0) return last;
    // First knot strictly greater than t, minus one.
    const auto it = std::upper_bound(knots_.begin() + order_ - 1, knots_.begin() + last + 1, t);
    return static_cast<int>(it - knots_.begin()) - 1;
}

void SplineBasis::eval_nonzero(double t, int& first, std::span<double> values) const {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError("spline evaluation point " + std::to_string(t) + " outside [0,1]");
    }
    const int p = degree();
    const int span = find_span(t);
    // Cox-de Boor triangle (Piegl & Tiller, A2.2).
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    values[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - knots_[span + 1 - j];
        right[j] = knots_[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = values[r] / (right[r + 1] + left[j - r]);
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    first = span - p;
}

Vector SplineBasis::eval(double t) const {
    Vector b = Vector::Zero(dim());
    std::vector<double> vals(static_cast<std::size_t>(order_));
    int first = 0;
    eval_nonzero(t, first, vals);
    for (int r = 0; r < order_; ++r) b(first + r) = vals[r];
    return b;
}

Matrix SplineBasis::eval_matrix(std::span<const double> times) const {
    Matrix out = Matrix::Zero(static_cast<Index>(times.size()), dim());
    std::vector<double> vals(static_cast<std::size_t>(order_));
    for (std::size_t k = 0; k < times.size(); ++k) {
        int first = 0;
        eval_nonzero(times[k], first, vals);
        for (int r = 0; r < order_; ++r) out(static_cast<Index>(k), first + r) = vals[r];
    }
    return out;
}

namespace {

bool valid_interior(const std::vector<double>& knots) {
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (!(knots[k] > 0.0 && knots[k] < 1.0)) return false;
        if (k > 0 && !(knots[k] > knots[k - 1])) return false;
    }
    return true;
}

std::vector<double> quantile_knots(const std::vector<double>& sorted, int n_interior) {
    std::vector<double> knots(static_cast<std::size_t>(n_interior));
    for (int k = 1; k <= n_interior; ++k) {
        knots[k - 1] = quantile_sorted(sorted, static_cast<double>(k) / (n_interior + 1));
    }
    return knots;
}

}  // namespace

SplineBasis make_basis(std::span<const double> times, int n_interior, int order) {
    if (n_interior < 1) throw DomainError("n_interior must be at least 1");
    if (order < 2) throw DomainError("spline order must be at least 2");
    if (times.empty()) throw DomainError("cannot place knots without observation times");
    std::vector<double> sorted(times.begin(), times.end());
    for (double t : sorted) {
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("knot placement requires times in [0,1]");
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unique = sorted;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (static_cast<int>(unique.size()) < n_interior) {
        throw DomainError("only " + std::to_string(unique.size()) + " distinct times for " +
                          std::to_string(n_interior) + " interior knots; use a smaller knot count");
    }

    auto knots = quantile_knots(sorted, n_interior);
    if (!valid_interior(knots)) knots = quantile_knots(unique, n_interior);
    if (!valid_interior(knots)) {
        // Spread collapsed knots apart by a fraction of the finest spacing in the data.
        std::vector<double> grid = unique;
        grid.insert(grid.begin(), 0.0);
        grid.push_back(1.0);
        double gap = 1.0;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            if (grid[k] > grid[k - 1]) gap = std::min(gap, grid[k] - grid[k - 1]);
        }
        const double h = gap / (n_interior + 1);
        double prev = 0.0;
        for (double& k : knots) {
            k = std::max(k, prev + h);
            prev = k;
        }
        double next = 1.0;
        for (auto it = knots.rbegin(); it != knots.rend(); ++it) {
            *it = std::min(*it, next - h);
            next = *it;
        }
        if (!valid_interior(knots)) {
            throw DomainError("cannot place " + std::to_string(n_interior) +
                              " distinct interior knots; use a smaller knot count");
        }
    }
    return SplineBasis(order, std::move(knots));
}

Matrix difference_matrix(int c) {
    if (c < 3) throw DomainError("difference matrix needs c >= 3");
    Matrix D = Matrix::Zero(c, c - 2);
    for (int k = 0; k < c - 2; ++k) {
        D(k, k) = 1.0;
        D(k + 1, k) = -2.0;
        D(k + 2, k) = 1.0;
    }
    return D;
}

Vector vech(const Matrix& sym) {
    const Index c = sym.rows();
    Vector v(c * (c + 1) / 2);
    for (Index j = 0; j < c; ++j) {
        for (Index i = j; i < c; ++i) v(vech_index(i, j, c)) = sym(i, j);
    }
    return v;
}

Matrix unvech(const Vector& v, Index c) {
    if (v.size() != c * (c + 1) / 2) throw DomainError("vech length does not match dimension");
    Matrix out(c, c);
    for (Index j = 0; j < c; ++j) {
        for (Index i = j; i < c; ++i) {
            out(i, j) = v(vech_index(i, j, c));
            out(j, i) = out(i, j);
        }
    }
    return out;
}

Matrix duplication_matrix(int c) {
    if (c < 1) throw DomainError("duplication matrix needs c >= 1");
    const Index q = static_cast<Index>(c) * (c + 1) / 2;
    Matrix G = Matrix::Zero(static_cast<Index>(c) * c, q);
    for (Index j = 0; j < c; ++j) {
        for (Index i = 0; i < c; ++i) G(i + j * c, vech_index(i, j, c)) = 1.0;
    }
    return G;
}

Matrix penalty_P(const Matrix& D, const Matrix& G) {
    const Index c = D.rows();
    if (G.rows() != c * c) throw DomainError("duplication matrix does not match difference matrix");
    const Matrix DDt = D * D.transpose();
    // (I_c (x) DD^T) G applied block by block instead of forming the c^2 x c^2 Kronecker.
    Matrix KG(G.rows(), G.cols());
    for (Index b = 0; b < c; ++b) KG.middleRows(b * c, c) = DDt * G.middleRows(b * c, c);
    return symmetrize_from_lower(G.transpose() * KG);
}

Matrix embed_Q(const Matrix& P) {
    Matrix Q = Matrix::Zero(P.rows() + 1, P.cols() + 1);
    Q.topLeftCorner(P.rows(), P.cols()) = P;
    return Q;
}

}  // namespace face
