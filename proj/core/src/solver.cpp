#include "face/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "face/error.hpp"

namespace face {

namespace {

LambdaSelection scan(const GroupedProblem& problem, const Diagonalization& diag, const std::vector<double>& grid,
                     Criterion criterion) {
    std::vector<double> scores(grid.size());
    if (criterion == Criterion::ExactICV) {
        if (problem.total_rows() > kExactIcvMaxRows) {
            throw DomainError("exact iCV is limited to N <= " + std::to_string(kExactIcvMaxRows) + " products");
        }
        for (std::size_t k = 0; k < grid.size(); ++k) scores[k] = exact_icv(problem, grid[k], diag.ridge);
    } else {
        const GcvPrecomp pre = precompute(problem, diag);
        for (std::size_t k = 0; k < grid.size(); ++k) scores[k] = igcv_value(pre, diag.s, grid[k]);
    }
    return select_lambda(grid, scores);
}

Matrix psd_part(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const Vector vals = es.eigenvalues().cwiseMax(0.0);
    return symmetrize_from_lower(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose());
}

double pooled_variance(const std::vector<Vector>& r) {
    double sum = 0.0, sum2 = 0.0;
    Index n = 0;
    for (const auto& v : r) {
        sum += v.sum();
        sum2 += v.squaredNorm();
        n += v.size();
    }
    if (n < 2) return 0.0;
    const double mean = sum / static_cast<double>(n);
    return std::max(0.0, (sum2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
}

}  // namespace

SmootherFit fit_smoother(const GroupedProblem& problem, const LambdaGrid& grid, Criterion criterion,
                         std::optional<double> fixed_lambda) {
    const auto cp = cross_products(problem);
    SmootherFit out;
    out.diag = diagonalize(cp.XtWX, problem.Q);
    if (fixed_lambda) {
        out.selection.lambda = *fixed_lambda;
        out.selection.grid = {*fixed_lambda};
        out.selection.scores = {std::numeric_limits<double>::quiet_NaN()};
    } else {
        out.selection = scan(problem, out.diag, grid.values(), criterion);
    }
    out.alpha = fit_pwls(cp.XtWX, cp.XtWy, problem.Q, out.selection.lambda);
    return out;
}

MeanFit fit_mean_pspline(const SparseFunctionalDataset& ds, const MeanOptions& opts) {
    if (!ds.is_rescaled()) throw DomainError("fit_mean_pspline requires times rescaled to [0,1]");
    const auto pooled = ds.pooled_times();
    MeanFit fit;
    fit.basis = make_basis(pooled, opts.n_interior, opts.order);
    const Matrix D = difference_matrix(fit.basis.dim());

    GroupedProblem problem;
    problem.Q = D * D.transpose();
    for (const auto& rec : ds.subjects()) {
        problem.X.push_back(fit.basis.eval_matrix(rec.times));
        problem.y.emplace_back(Eigen::Map<const Vector>(rec.values.data(), static_cast<Index>(rec.values.size())));
    }
    const auto sm = fit_smoother(problem, opts.grid, Criterion::IGCV, opts.fixed_lambda);
    fit.coefficients = sm.alpha;
    fit.lambda = sm.selection.lambda;
    return fit;
}

GroupedProblem covariance_problem(const Design& design) {
    GroupedProblem problem;
    const Matrix D = difference_matrix(design.c);
    problem.Q = embed_Q(penalty_P(D, duplication_matrix(design.c)));
    for (const auto& s : design.subjects) {
        problem.X.push_back(s.X);
        problem.y.push_back(s.C_hat);
    }
    return problem;
}

double FitResult::covariance(double s, double t) const {
    return basis.eval(s).dot(Theta * basis.eval(t));
}

FitResult fit_two_step(const SparseFunctionalDataset& raw, const SplineBasis& basis, const FitOptions& opts) {
    if (raw.max_observations() < 2) {
        throw IdentifiabilityError("every subject has a single observation; the covariance is not identifiable");
    }
    const SparseFunctionalDataset ds = rescale_time(raw);
    if (!(opts.beta > 0.0 && opts.beta < 1.0)) throw DomainError("beta must lie in (0,1)");

    FitResult result;
    result.basis = basis;
    result.domain = ds.time_domain();
    auto& diag = result.diagnostics;

    // Step 0: mean and raw covariance products.
    result.mean = opts.mean_override ? *opts.mean_override : fit_mean_pspline(ds, opts.mean);
    const auto resid = residuals(ds, result.mean);
    std::vector<Vector> C_hat;
    C_hat.reserve(resid.size());
    for (const auto& r : resid) C_hat.push_back(raw_products(r));
    const Design design = build_design(ds, basis, C_hat);
    GroupedProblem problem = covariance_problem(design);
    const int c = basis.dim();
    const Index q = static_cast<Index>(c) * (c + 1) / 2;

    // Step 1: OLS.
    const auto step1 = fit_smoother(problem, opts.grid, opts.criterion, opts.fixed_lambda);
    diag.step1 = step1.selection;
    result.lambda_step1 = step1.selection.lambda;
    diag.sigma2_step1 = step1.alpha(q);

    Vector alpha = step1.alpha;
    result.lambda_step2 = result.lambda_step1;
    diag.step2 = diag.step1;
    if (opts.gls) {
        // Step 2: plug-in weights from the OLS fit, then GLS.
        const double floor = 1e-6 * pooled_variance(resid);
        diag.sigma2_working = std::max(diag.sigma2_step1, floor);
        const Matrix Theta0 = psd_part(unvech(step1.alpha.head(q), c));
        problem.W.reserve(ds.n());
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const Matrix H = basis.eval_matrix(ds.subject(i).times);
            const Matrix Ci = symmetrize_from_lower(H * Theta0 * H.transpose());
            problem.W.push_back(blend_weights(covariance_of_products(Ci, diag.sigma2_working), opts.beta));
        }
        // Rescale W so tr(X^T W X) matches tr(X^T X): a common factor leaves the
        // estimator unchanged but keeps the lambda grid on the OLS scale.
        double tr_w = 0.0, tr_i = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            tr_i += problem.X[i].squaredNorm();
            tr_w += (problem.X[i].transpose() * problem.W[i] * problem.X[i]).trace();
        }
        if (tr_w > 0.0 && std::isfinite(tr_w)) {
            const double scale = tr_i / tr_w;
            for (auto& W : problem.W) W *= scale;
        }
        const auto step2 = fit_smoother(problem, opts.grid, opts.criterion, opts.fixed_lambda);
        diag.step2 = step2.selection;
        result.lambda_step2 = step2.selection.lambda;
        alpha = step2.alpha;
    } else {
        diag.sigma2_working = diag.sigma2_step1;
    }

    if (diag.step1.on_boundary) diag.warnings.push_back("step-1 lambda lies on the grid boundary");
    if (opts.gls && diag.step2.on_boundary) diag.warnings.push_back("step-2 lambda lies on the grid boundary");

    result.theta = alpha.head(q);
    result.Theta = unvech(result.theta, c);
    diag.sigma2_unclamped = alpha(q);
    diag.sigma2_clamped = alpha(q) < 0.0;
    if (diag.sigma2_clamped) diag.warnings.push_back("negative noise variance estimate clamped to 0");
    result.sigma2 = std::max(alpha(q), 0.0);
    return result;
}

FitResult fit_two_step(const SparseFunctionalDataset& raw, const FitOptions& opts) {
    if (raw.max_observations() < 2) {
        throw IdentifiabilityError("every subject has a single observation; the covariance is not identifiable");
    }
    const SparseFunctionalDataset ds = rescale_time(raw);
    const auto pooled = ds.pooled_times();
    return fit_two_step(ds, make_basis(pooled, opts.n_interior, opts.order), opts);
}

}  // namespace face
