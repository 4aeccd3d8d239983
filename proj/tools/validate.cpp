#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <face/design.hpp>
#include <face/gcv.hpp>
#include <face/predict.hpp>
#include <face/random.hpp>
#include <face/weights.hpp>

#if FACE_WITH_ORACLE
#include <face/oracle.hpp>
#endif

namespace face::cli {

#if FACE_WITH_ORACLE

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Matrix normal_matrix(Index r, Index c, RandomStream& rng) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = rng.normal();
    return m;
}

Matrix spd(Index n, RandomStream& rng) {
    const Matrix a = normal_matrix(n, n, rng);
    return symmetrize_from_lower(a * a.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n));
}

// Small covariance-smoothing problem with random products as responses.
GroupedProblem random_problem(RandomStream& rng, bool weighted) {
    for (;;) {
        const int c = rng.uniform_int(3, 5);
        const SplineBasis basis(c - 1, {0.45});
        std::vector<SubjectRecord> subjects;
        const int n = rng.uniform_int(4, 8);
        for (int i = 0; i < n; ++i) {
            SubjectRecord r{"s" + std::to_string(i), {}, {}};
            const int m = rng.uniform_int(2, 4);
            for (int j = 0; j < m; ++j) {
                r.times.push_back(rng.uniform());
                r.values.push_back(rng.normal());
            }
            subjects.push_back(std::move(r));
        }
        const SparseFunctionalDataset ds(std::move(subjects), TimeDomain{0.0, 1.0}, true);
        std::vector<Vector> C_hat;
        for (const auto& s : ds.subjects()) {
            const auto m = static_cast<Index>(s.size());
            C_hat.push_back(normal_matrix(m * (m + 1) / 2, 1, rng));
        }
        GroupedProblem p = covariance_problem(build_design(ds, basis, C_hat));
        if (weighted)
            for (const auto& X : p.X) p.W.push_back(spd(X.rows(), rng));
        Eigen::SelfAdjointEigenSolver<Matrix> es(cross_products(p).XtWX);
        if (es.eigenvalues()(0) > 1e-6 * es.eigenvalues().maxCoeff()) return p;
    }
}

struct Check {
    std::string name;
    double worst = 0.0;
    double tol = 0.0;
    bool pass() const { return std::isfinite(worst) && worst <= tol; }
};

void report(const Check& c) {
    std::printf("%s %-28s max error %.3e (tolerance %.0e)\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.worst,
                c.tol);
}

}  // namespace

int cmd_validate(const ValidateArgs& a) {
    RandomStream rng(a.seed, 99);
    Check igcv{"igcv-vs-dense", 0.0, 1e-8};
    Check icv{"exact-icv-vs-refit", 0.0, 1e-6};
    Check prod{"product-cov-vs-isserlis", 0.0, 1e-10};
    Check pred{"predict-vs-conditioning", 0.0, 1e-10};

    for (int k = 0; k < a.instances; ++k) {
        const GroupedProblem p = random_problem(rng, k % 2 == 0);
        const Diagonalization d = diagonalize(cross_products(p).XtWX, p.Q);
        const GcvPrecomp pre = precompute(p, d);
        const auto dense = oracle::make_dense(p, d.ridge);
        for (double lambda : {0.0, 0.37, 10.0, 1e3, 1e12})
            igcv.worst = std::max(igcv.worst, rel_err(igcv_value(pre, d.s, lambda), oracle::dense_igcv(dense, lambda)));
        for (double lambda : {0.05, 1.0, 30.0})
            icv.worst = std::max(icv.worst, rel_err(exact_icv(p, lambda, d.ridge), oracle::refit_icv(dense, lambda)));

        const Index m = rng.uniform_int(1, 5);
        const Matrix C = spd(m, rng);
        const double s2 = 0.1 + rng.uniform();
        const Matrix fast = covariance_of_products(C, s2);
        const Matrix slow = oracle::isserlis_cov(C, s2);
        prod.worst = std::max(prod.worst, (fast - slow).cwiseAbs().maxCoeff() / std::max(1.0, slow.cwiseAbs().maxCoeff()));

        const SplineBasis basis(4, {0.25, 0.5, 0.75});
        const Matrix R = normal_matrix(basis.dim(), basis.dim(), rng);
        const Matrix Theta = R * R.transpose() / basis.dim() + 0.1 * Matrix::Identity(basis.dim(), basis.dim());
        MeanFit mean;
        mean.basis = SplineBasis(4, {0.5});
        mean.coefficients = normal_matrix(mean.basis.dim(), 1, rng);
        SubjectRecord rec{"x", {}, {}};
        const int mo = rng.uniform_int(1, 6);
        for (int j = 0; j < mo; ++j) rec.times.push_back(rng.uniform());
        std::sort(rec.times.begin(), rec.times.end());
        for (int j = 0; j < mo; ++j) rec.values.push_back(rng.normal());
        std::vector<double> t;
        for (int j = 0; j < 5; ++j) t.push_back(rng.uniform());
        const PredictionResult pr = predict_subject(basis, Theta, 0.3, mean, rec, t);
        std::vector<double> all = rec.times;
        all.insert(all.end(), t.begin(), t.end());
        const Matrix H = basis.eval_matrix(all);
        Matrix joint = H * Theta * H.transpose();
        joint.diagonal().array() += 0.3;
        std::vector<Index> obs;
        for (Index j = 0; j < mo; ++j) obs.push_back(j);
        const auto cond = oracle::mvn_condition(mean.eval(all), joint, obs,
                                                Eigen::Map<const Vector>(rec.values.data(), mo));
        pred.worst = std::max({pred.worst, (pr.x_hat - cond.mean).cwiseAbs().maxCoeff(),
                               (pr.cov - cond.cov).cwiseAbs().maxCoeff()});
    }

    bool ok = true;
    for (const Check* c : {&igcv, &icv, &prod, &pred}) {
        report(*c);
        ok = ok && c->pass();
    }
    return ok ? 0 : 1;
}

#else

int cmd_validate(const ValidateArgs&) {
    std::cerr << "error: this build has no reference implementations (configure with FACE_WITH_ORACLE=ON)\n";
    return 1;
}

#endif

}  // namespace face::cli
