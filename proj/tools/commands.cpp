#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <face/artifact.hpp>
#include <face/dataset.hpp>
#include <face/error.hpp>
#include <face/predict.hpp>
#include <face/spectral.hpp>

namespace face::cli {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Output file, or stdout when the path is empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw DataError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> read_times_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, expected header 'time'");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time") throw DataError(path + ": row 1: expected header 'time', got '" + line + "'");
    std::vector<double> out;
    for (int row = 2; std::getline(in, line); ++row) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != line.size() || !std::isfinite(v))
            throw DataError(path + ": row " + std::to_string(row) + ": cannot parse time '" + line + "'");
        out.push_back(v);
    }
    if (out.empty()) throw DataError(path + ": no times");
    return out;
}

std::vector<std::string> split_ids(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int cmd_fit(const FitArgs& a) {
    const SparseFunctionalDataset data = load_csv(a.data);
    FitOptions opts;
    opts.n_interior = a.knots;
    opts.order = a.order;
    opts.beta = a.beta;
    opts.grid = LambdaGrid{a.lambda_min, a.lambda_max, a.lambda_count};
    opts.criterion = a.exact_icv ? Criterion::ExactICV : Criterion::IGCV;
    opts.mean.n_interior = a.knots;
    opts.mean.order = a.order;
    opts.mean.grid = opts.grid;
    const FitResult fit = fit_two_step(data, opts);
    for (const auto& w : fit.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
    Output out(a.out);
    write_artifact(out.stream(), make_artifact(fit, a.grid_G));
    return 0;
}

int cmd_eigen(const EigenArgs& a) {
    const FitArtifact art = load_artifact(a.fit);
    Vector grid;
    Matrix C;
    if (art.has_model()) {
        grid = unit_grid(a.grid_G.value_or(kDefaultGridSize));
        C = eval_cov_grid(*art.basis, unvech(*art.theta, art.basis->dim()), grid);
    } else {
        grid = art.grid;
        C = art.cov_grid;
        if (a.grid_G && *a.grid_G != grid.size())
            std::cerr << "warning: artifact has no spline model; using its stored " << grid.size() << "-point grid\n";
    }
    EigenResult e = eigendecompose(C, grid);
    int k = e.k();
    if (a.k > 0) {
        if (a.k > e.k()) {
            std::cerr << "warning: requested " << a.k << " components but only " << e.k()
                      << " positive eigenvalues; output truncated\n";
        } else {
            k = a.k;
        }
    }
    // Report on the original time axis: lambda scales with the domain length
    // and eigenfunctions by its inverse square root.
    const double L = art.domain.t_max - art.domain.t_min;
    Output out(a.out);
    std::ostream& os = out.stream();
    os << "component,eigenvalue,time,value\n";
    for (int l = 0; l < k; ++l) {
        const double lambda = e.eigenvalues(l) * L;
        for (Index g = 0; g < grid.size(); ++g) {
            os << (l + 1) << ',' << fmt(lambda) << ',' << fmt(art.domain.from_unit(grid(g))) << ','
               << fmt(e.eigenfunctions(g, l) / std::sqrt(L)) << '\n';
        }
    }
    return 0;
}

int cmd_predict(const PredictArgs& a) {
    const FitArtifact art = load_artifact(a.fit);
    const FitResult fit = art.to_fit();
    const SparseFunctionalDataset raw = load_csv(a.data);
    const SparseFunctionalDataset data = rescale_time(raw, art.domain);
    const std::vector<double> new_raw = read_times_csv(a.times);
    std::vector<double> new_unit;
    for (double t : new_raw) {
        const double u = art.domain.to_unit(t);
        if (u < -1e-12 || u > 1.0 + 1e-12)
            throw DomainError("new time " + fmt(t) + " lies outside the fitted range [" + fmt(art.domain.t_min) + ", " +
                              fmt(art.domain.t_max) + "]");
        new_unit.push_back(std::clamp(u, 0.0, 1.0));
    }

    std::vector<std::size_t> which;
    if (a.subjects.empty()) {
        for (std::size_t i = 0; i < data.n(); ++i) which.push_back(i);
    } else {
        for (const auto& id : split_ids(a.subjects)) {
            const std::size_t i = data.find(id);
            if (i == SparseFunctionalDataset::npos) throw DataError("subject '" + id + "' not found in " + a.data);
            which.push_back(i);
        }
    }

    PredictOptions opts;
    opts.level = a.level;
    opts.latent = a.latent;
    Output out(a.out);
    std::ostream& os = out.stream();
    os << "subject_id,time,x_hat,lo,hi\n";
    for (std::size_t i : which) {
        const PredictionResult p = predict_subject(fit, data.subject(i), new_unit, opts);
        for (std::size_t k = 0; k < new_raw.size(); ++k) {
            const auto kk = static_cast<Index>(k);
            os << data.subject(i).id << ',' << fmt(new_raw[k]) << ',' << fmt(p.x_hat(kk)) << ',' << fmt(p.band_lo(kk))
               << ',' << fmt(p.band_hi(kk)) << '\n';
        }
    }
    return 0;
}

int cmd_simulate(const SimulateArgs& a) {
    SimConfig c;
    c.sim_case = a.sim_case == 1 ? SimCase::Case1 : SimCase::Case2;
    c.n = a.n;
    c.m_set = a.m_set == "I1" ? MSet::I1 : MSet::I2;
    c.snr = a.snr;
    c.replications = a.reps;
    c.seed = a.seed;
    c.grid_G = a.grid_G;
    c.snr_convention = a.snr_convention == "trace"    ? SnrConvention::Trace
                       : a.snr_convention == "double" ? SnrConvention::DoubleIntegral
                                                      : SnrConvention::Auto;
    c.fit.n_interior = a.knots;
    c.fit.order = a.order;
    c.fit.mean.n_interior = a.knots;
    c.fit.mean.order = a.order;
    c.threads = a.threads;
    c.validate();

    if (!a.write_data.empty()) {
        RandomStream rng(c.seed, 0);
        const SimulatedData sim = generate(c.sim_case, c.n, c.m_set, c.snr, rng, c.snr_convention);
        Output out(a.write_data);
        out.stream() << "subject_id,time,value\n";
        for (const auto& s : sim.data.subjects())
            for (std::size_t j = 0; j < s.size(); ++j)
                out.stream() << s.id << ',' << fmt_exact(s.times[j]) << ',' << fmt_exact(s.values[j]) << '\n';
    }
    if (!a.write_truth.empty()) {
        Output out(a.write_truth);
        write_artifact(out.stream(), make_truth_artifact(truth_covariance(c.sim_case),
                                                         noise_variance(c.sim_case, c.snr, c.snr_convention),
                                                         c.grid_G));
    }

    const SimMetrics m = run_study(c);
    {
        Output out(a.out);
        write_metrics_csv(out.stream(), m);
    }
    if (a.summary.empty()) {
        write_summary_json(std::cerr, m);
    } else {
        Output out(a.summary);
        write_summary_json(out.stream(), m);
    }
    if (m.n_fail > 0) std::cerr << "warning: " << m.n_fail << " replication(s) failed and were excluded\n";
    return 0;
}

}  // namespace face::cli
