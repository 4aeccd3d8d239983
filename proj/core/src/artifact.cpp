#include "face/artifact.hpp"

#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "face/error.hpp"
#include "face/spectral.hpp"

namespace face {

namespace {

using nlohmann::ordered_json;

ordered_json to_array(const Vector& v) {
    ordered_json a = ordered_json::array();
    for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
    return a;
}

Vector from_array(const ordered_json& a, const char* what) {
    if (!a.is_array()) throw DataError(std::string("artifact: '") + what + "' must be an array");
    Vector v(static_cast<Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) v(static_cast<Index>(k)) = a[k].get<double>();
    return v;
}

ordered_json basis_json(const SplineBasis& b) {
    return {{"order", b.order()}, {"interior_knots", b.interior_knots()}};
}

SplineBasis basis_from_json(const ordered_json& j) {
    return SplineBasis(j.at("order").get<int>(), j.at("interior_knots").get<std::vector<double>>());
}

}  // namespace

FitResult FitArtifact::to_fit() const {
    if (!has_model()) throw DataError("artifact has no spline model");
    FitResult fit;
    fit.basis = *basis;
    fit.theta = *theta;
    fit.Theta = unvech(*theta, basis->dim());
    fit.sigma2 = sigma2;
    fit.lambda_step1 = lambda_step1;
    fit.lambda_step2 = lambda_step2;
    fit.mean = mean;
    fit.domain = domain;
    fit.diagnostics.warnings = warnings;
    return fit;
}

FitArtifact make_artifact(const FitResult& fit, int G) {
    FitArtifact a;
    a.domain = fit.domain;
    a.basis = fit.basis;
    a.theta = fit.theta;
    a.sigma2 = fit.sigma2;
    a.lambda_step1 = fit.lambda_step1;
    a.lambda_step2 = fit.lambda_step2;
    a.mean = fit.mean;
    a.grid = unit_grid(G);
    a.cov_grid = eval_cov_grid(fit, a.grid);
    a.warnings = fit.diagnostics.warnings;
    return a;
}

FitArtifact make_truth_artifact(const std::function<double(double, double)>& C, double sigma2, int G) {
    FitArtifact a;
    a.sigma2 = sigma2;
    a.grid = unit_grid(G);
    a.cov_grid = eval_cov_grid(C, a.grid);
    return a;
}

void write_artifact(std::ostream& out, const FitArtifact& a) {
    ordered_json j;
    j["format"] = kArtifactFormat;
    j["time_domain"] = {{"t_min", a.domain.t_min}, {"t_max", a.domain.t_max}};
    if (a.has_model()) {
        j["basis"] = basis_json(*a.basis);
        j["theta"] = to_array(*a.theta);
    }
    j["sigma2"] = a.sigma2;
    j["lambda"] = {{"step1", a.lambda_step1}, {"step2", a.lambda_step2}};
    ordered_json mean = basis_json(a.mean.basis);
    mean["coefficients"] = to_array(a.mean.coefficients);
    mean["lambda"] = a.mean.lambda;
    j["mean"] = mean;
    ordered_json rows = ordered_json::array();
    for (Index r = 0; r < a.cov_grid.rows(); ++r) rows.push_back(to_array(a.cov_grid.row(r).transpose()));
    j["grid"] = {{"G", a.grid.size()}, {"points", to_array(a.grid)}, {"covariance", rows}};
    j["warnings"] = a.warnings;
    out << j.dump(2) << '\n';
}

FitArtifact read_artifact(std::istream& in) {
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("artifact: invalid JSON: ") + e.what());
    }
    try {
        if (j.value("format", std::string()) != kArtifactFormat)
            throw DataError(std::string("artifact: expected format ") + kArtifactFormat);
        FitArtifact a;
        a.domain.t_min = j.at("time_domain").at("t_min").get<double>();
        a.domain.t_max = j.at("time_domain").at("t_max").get<double>();
        if (j.contains("basis")) {
            a.basis = basis_from_json(j["basis"]);
            a.theta = from_array(j.at("theta"), "theta");
            const Index c = a.basis->dim();
            if (a.theta->size() != c * (c + 1) / 2) throw DataError("artifact: theta length does not match the basis");
        }
        a.sigma2 = j.at("sigma2").get<double>();
        a.lambda_step1 = j.at("lambda").at("step1").get<double>();
        a.lambda_step2 = j.at("lambda").at("step2").get<double>();
        const auto& m = j.at("mean");
        a.mean.basis = basis_from_json(m);
        a.mean.coefficients = from_array(m.at("coefficients"), "mean.coefficients");
        a.mean.lambda = m.value("lambda", 0.0);
        if (a.mean.coefficients.size() != a.mean.basis.dim())
            throw DataError("artifact: mean coefficients do not match the mean basis");
        const auto& g = j.at("grid");
        a.grid = from_array(g.at("points"), "grid.points");
        const auto& rows = g.at("covariance");
        const Index G = a.grid.size();
        if (static_cast<Index>(rows.size()) != G) throw DataError("artifact: covariance grid is not G x G");
        a.cov_grid.resize(G, G);
        for (Index r = 0; r < G; ++r) {
            const Vector row = from_array(rows[static_cast<std::size_t>(r)], "grid.covariance");
            if (row.size() != G) throw DataError("artifact: covariance grid is not G x G");
            a.cov_grid.row(r) = row.transpose();
        }
        if (j.contains("warnings")) a.warnings = j["warnings"].get<std::vector<std::string>>();
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("artifact: ") + e.what());
    }
}

FitArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open artifact " + path.string());
    return read_artifact(in);
}

}  // namespace face
