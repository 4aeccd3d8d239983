#include "face/predict.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

#include "face/error.hpp"

namespace face {

double two_sided_normal_quantile(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
    return std::sqrt(2.0) * boost::math::erf_inv(level);
}

void confidence_bands(PredictionResult& pred, double level) {
    const double z = two_sided_normal_quantile(level);
    const Vector half = pred.cov.diagonal().cwiseMax(0.0).cwiseSqrt() * z;
    pred.band_lo = pred.x_hat - half;
    pred.band_hi = pred.x_hat + half;
    pred.level = level;
}

PredictionResult predict_subject(const SplineBasis& basis, const Matrix& Theta, double sigma2, const MeanFit& mean,
                                 const SubjectRecord& record, std::span<const double> new_times,
                                 const PredictOptions& opts) {
    if (record.size() == 0) throw DomainError("subject '" + record.id + "' has no observations");
    const auto m = static_cast<Index>(record.size());
    const auto mn = static_cast<Index>(new_times.size());
    const Matrix Ho = basis.eval_matrix(record.times);
    const Matrix Hn = basis.eval_matrix(new_times);

    Matrix V = symmetrize_from_lower(Ho * Theta * Ho.transpose());
    V.diagonal().array() += sigma2;
    const double eps = 1e-8 * V.trace() / static_cast<double>(m);
    const double lmin = min_eigenvalue(V);
    if (lmin < eps) V.diagonal().array() += eps - lmin;

    Eigen::LDLT<Matrix> ldlt(V);
    if (!ldlt_invertible(ldlt)) {
        throw NumericalError("subject '" + record.id + "': observation covariance is singular");
    }

    const Vector f_obs = mean.eval(record.times);
    const Vector f_new = mean.eval(new_times);
    Vector y(m);
    for (Index j = 0; j < m; ++j) y(j) = record.values[static_cast<std::size_t>(j)];

    const Matrix cross = Hn * Theta * Ho.transpose();  // Cov(x, y)
    PredictionResult out;
    out.new_times = Eigen::Map<const Vector>(new_times.data(), mn);
    out.x_hat = cross * ldlt.solve(y - f_obs) + f_new;

    Matrix Vn = symmetrize_from_lower(Hn * Theta * Hn.transpose());
    if (!opts.latent) Vn.diagonal().array() += sigma2;
    out.cov = symmetrize_from_lower(Vn - cross * ldlt.solve(cross.transpose()));
    out.cov.diagonal() = out.cov.diagonal().cwiseMax(0.0);
    confidence_bands(out, opts.level);
    return out;
}

PredictionResult predict_subject(const FitResult& fit, const SubjectRecord& record, std::span<const double> new_times,
                                 const PredictOptions& opts) {
    return predict_subject(fit.basis, fit.Theta, fit.sigma2, fit.mean, record, new_times, opts);
}

}  // namespace face
