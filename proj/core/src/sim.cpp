#include "face/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "face/error.hpp"

namespace face {

namespace {

constexpr double kCase1Lambda[kTrackedComponents] = {1.0, 0.5, 0.25};

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<double> uniform_times(int m, RandomStream& rng) {
    std::vector<double> t(static_cast<std::size_t>(m));
    for (double& v : t) v = rng.uniform();
    std::sort(t.begin(), t.end());  // keeps latent values aligned with the sorted dataset
    return t;
}

SparseFunctionalDataset as_unit_dataset(std::vector<SubjectRecord> subjects) {
    return SparseFunctionalDataset(std::move(subjects), TimeDomain{0.0, 1.0}, true);
}

std::string subject_name(int i) { return "s" + std::to_string(i + 1); }

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

double iqr_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
}

}  // namespace

double matern_cov(double d, double phi, double nu) {
    if (!(d >= 0.0)) throw DomainError("matern_cov: distance must be non-negative");
    if (!(phi > 0.0)) throw DomainError("matern_cov: range must be positive");
    if (!(nu > 0.0)) throw DomainError("matern_cov: order must be positive");
    if (d == 0.0) return 1.0;
    const double x = d / phi;
    if (x > 700.0) return 0.0;
    const double scale = 1.0 / (std::pow(2.0, nu - 1.0) * std::tgamma(nu));
    return scale * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
}

double case1_eigenfunction(int l, double t) {
    const double pi = std::numbers::pi;
    switch (l) {
        case 1: return std::numbers::sqrt2 * std::sin(2.0 * pi * t);
        case 2: return std::numbers::sqrt2 * std::cos(4.0 * pi * t);
        case 3: return std::numbers::sqrt2 * std::sin(4.0 * pi * t);
        default: throw DomainError("case1_eigenfunction: l must be 1, 2 or 3");
    }
}

double case1_eigenvalue(int l) {
    if (l < 1 || l > kTrackedComponents) throw DomainError("case1_eigenvalue: l must be 1, 2 or 3");
    return kCase1Lambda[l - 1];
}

std::function<double(double, double)> truth_covariance(SimCase c) {
    if (c == SimCase::Case1) {
        return [](double s, double t) {
            double sum = 0.0;
            for (int l = 1; l <= kTrackedComponents; ++l)
                sum += case1_eigenvalue(l) * case1_eigenfunction(l, s) * case1_eigenfunction(l, t);
            return sum;
        };
    }
    return [](double s, double t) { return matern_cov(std::abs(s - t)); };
}

double trace_integral(SimCase c) {
    if (c == SimCase::Case1) return kCase1Lambda[0] + kCase1Lambda[1] + kCase1Lambda[2];
    return 1.0;
}

double double_integral(SimCase c, int points) {
    if (c == SimCase::Case1) return 0.0;
    if (points < 2) throw DomainError("double_integral: need at least 2 points");
    // Midpoint rule; the integrand depends on |s - t| only, so the G^2 sum
    // collapses to G distinct lags.
    const double h = 1.0 / points;
    double sum = points * matern_cov(0.0);
    for (int k = 1; k < points; ++k) sum += 2.0 * (points - k) * matern_cov(k * h);
    return sum * h * h;
}

double noise_variance(SimCase c, double snr, SnrConvention conv) {
    if (!(snr > 0.0)) throw DomainError("snr must be positive");
    if (conv == SnrConvention::Auto)
        conv = c == SimCase::Case1 ? SnrConvention::Trace : SnrConvention::DoubleIntegral;
    if (conv == SnrConvention::Trace) return trace_integral(c) / snr;
    static const double case2_integral = double_integral(SimCase::Case2);
    const double integral = c == SimCase::Case1 ? 0.0 : case2_integral;
    return integral / snr;
}

std::vector<int> m_values(MSet set) {
    std::vector<int> out;
    const int lo = set == MSet::I1 ? 3 : 5;
    const int hi = set == MSet::I1 ? 7 : 15;
    for (int m = lo; m <= hi; ++m) out.push_back(m);
    return out;
}

namespace {

int draw_m(MSet set, RandomStream& rng) {
    const std::vector<int> ms = m_values(set);
    return ms[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ms.size()) - 1))];
}

}  // namespace

Vector draw_latent(SimCase c, const std::vector<double>& times, RandomStream& rng) {
    const auto m = static_cast<Index>(times.size());
    Vector u(m);
    if (c == SimCase::Case1) {
        double xi[kTrackedComponents];
        for (double& x : xi) x = rng.normal();
        for (Index j = 0; j < m; ++j) {
            double v = 0.0;
            for (int l = 1; l <= kTrackedComponents; ++l)
                v += std::sqrt(case1_eigenvalue(l)) * xi[l - 1] * case1_eigenfunction(l, times[j]);
            u(j) = v;
        }
        return u;
    }
    Matrix K(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) K(a, b) = matern_cov(std::abs(times[a] - times[b]));
    K.diagonal().array() += 1e-10;
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() != Eigen::Success) throw NumericalError("latent covariance factorization failed");
    Vector z(m);
    for (Index a = 0; a < m; ++a) z(a) = rng.normal();
    return llt.matrixL() * z;
}

namespace {

SimulatedData simulate(SimCase c, int n, MSet m_set, double snr, RandomStream& rng, SnrConvention conv) {
    if (n < 1) throw DomainError("simulation: n must be at least 1");
    SimulatedData out;
    out.sigma2 = noise_variance(c, snr, conv);
    const double sd = std::sqrt(out.sigma2);
    std::vector<SubjectRecord> subjects;
    subjects.reserve(static_cast<std::size_t>(n));
    out.latent.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SubjectRecord rec;
        rec.id = subject_name(i);
        rec.times = uniform_times(draw_m(m_set, rng), rng);
        const Vector u = draw_latent(c, rec.times, rng);
        rec.values.resize(rec.times.size());
        for (std::size_t j = 0; j < rec.times.size(); ++j) rec.values[j] = u(static_cast<Index>(j)) + sd * rng.normal();
        out.latent.emplace_back(u.data(), u.data() + u.size());
        subjects.push_back(std::move(rec));
    }
    out.data = as_unit_dataset(std::move(subjects));
    return out;
}

}  // namespace

SimulatedData gen_case1(int n, MSet m_set, double snr, RandomStream& rng, SnrConvention conv) {
    return simulate(SimCase::Case1, n, m_set, snr, rng, conv);
}

SimulatedData gen_case2(int n, MSet m_set, double snr, RandomStream& rng, SnrConvention conv) {
    return simulate(SimCase::Case2, n, m_set, snr, rng, conv);
}

SimulatedData generate(SimCase c, int n, MSet m_set, double snr, RandomStream& rng, SnrConvention conv) {
    return c == SimCase::Case1 ? gen_case1(n, m_set, snr, rng, conv) : gen_case2(n, m_set, snr, rng, conv);
}

double ise_covariance(const Matrix& C_est, const Matrix& C_true) {
    if (C_est.rows() != C_true.rows() || C_est.cols() != C_true.cols())
        throw DomainError("ise_covariance: grid mismatch");
    const double G = static_cast<double>(C_est.rows());
    return (C_est - C_true).squaredNorm() / (G * G);
}

double ise_eigenfunction(const Vector& psi_hat, const Vector& psi) {
    if (psi_hat.size() != psi.size()) throw DomainError("ise_eigenfunction: grid mismatch");
    const double G = static_cast<double>(psi.size());
    const double minus = (psi - psi_hat).squaredNorm() / G;
    const double plus = (psi + psi_hat).squaredNorm() / G;
    return std::min(minus, plus);
}

double se_eigenvalue(double l_hat, double l) { return (l_hat - l) * (l_hat - l); }

void SimConfig::validate() const {
    if (n < 1) throw DomainError("simulation: n must be at least 1");
    if (replications < 1) throw DomainError("simulation: replications must be at least 1");
    if (!(snr > 0.0)) throw DomainError("simulation: snr must be positive");
    if (grid_G < 2) throw DomainError("simulation: grid size must be at least 2");
    if (threads < 0) throw DomainError("simulation: threads must be non-negative");
}

ReplicationMetrics run_replication(const SimConfig& config, int r) {
    ReplicationMetrics out;
    out.replication = r;
    out.ise_eigenfunction.assign(kTrackedComponents, std::numeric_limits<double>::quiet_NaN());
    out.se_eigenvalue.assign(kTrackedComponents, std::numeric_limits<double>::quiet_NaN());
    out.ise_cov = std::numeric_limits<double>::quiet_NaN();

    const auto start = std::chrono::steady_clock::now();
    try {
        RandomStream rng(config.seed, static_cast<std::uint64_t>(r));
        const SimulatedData sim =
            generate(config.sim_case, config.n, config.m_set, config.snr, rng, config.snr_convention);
        out.sigma2_true = sim.sigma2;

        const FitResult fit = fit_two_step(sim.data, config.fit);
        out.sigma2_hat = fit.sigma2;
        out.lambda_step1 = fit.lambda_step1;
        out.lambda_step2 = fit.lambda_step2;

        const Vector grid = unit_grid(config.grid_G);
        const Matrix C_true = eval_cov_grid(truth_covariance(config.sim_case), grid);
        const Matrix C_est = eval_cov_grid(fit, grid);
        out.ise_cov = ise_covariance(C_est, C_true);

        EigenOptions eo;
        eo.trim_negative = false;
        eo.max_components = kTrackedComponents;
        const EigenResult truth = eigendecompose(C_true, grid, eo);
        const EigenResult est = eigendecompose(C_est, grid, eo);
        for (int l = 0; l < kTrackedComponents; ++l) {
            const double ise = ise_eigenfunction(est.eigenfunctions.col(l), truth.eigenfunctions.col(l));
            if (!(ise >= -1e-12 && ise <= 2.0 + 1e-12))
                throw NumericalError("eigenfunction ISE outside [0, 2]");
            out.ise_eigenfunction[l] = std::clamp(ise, 0.0, 2.0);
            out.se_eigenvalue[l] = se_eigenvalue(est.eigenvalues(l), truth.eigenvalues(l));
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

const MetricSummary& SimMetrics::metric(const std::string& name) const {
    for (const MetricSummary& s : summary)
        if (s.name == name) return s;
    throw DomainError("unknown metric: " + name);
}

SimMetrics run_study(const SimConfig& config) {
    config.validate();
    SimMetrics result;
    result.config = config;
    result.replications.resize(static_cast<std::size_t>(config.replications));

    int threads = config.threads;
    if (threads == 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, config.replications);

    const auto start = std::chrono::steady_clock::now();
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < config.replications; r = next++)
            result.replications[static_cast<std::size_t>(r)] = run_replication(config, r);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::pair<std::string, std::vector<double>>> columns;
    columns.push_back({"ise_cov", {}});
    for (int l = 1; l <= kTrackedComponents; ++l) columns.push_back({"ise_psi" + std::to_string(l), {}});
    for (int l = 1; l <= kTrackedComponents; ++l) columns.push_back({"se_lambda" + std::to_string(l), {}});
    columns.push_back({"sigma2_hat", {}});
    columns.push_back({"runtime_seconds", {}});
    for (const ReplicationMetrics& rep : result.replications) {
        if (!rep.ok) {
            ++result.n_fail;
            continue;
        }
        std::size_t k = 0;
        columns[k++].second.push_back(rep.ise_cov);
        for (double v : rep.ise_eigenfunction) columns[k++].second.push_back(v);
        for (double v : rep.se_eigenvalue) columns[k++].second.push_back(v);
        columns[k++].second.push_back(rep.sigma2_hat);
        columns[k++].second.push_back(rep.runtime_seconds);
    }
    for (auto& [name, values] : columns) {
        MetricSummary s{name, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        if (!values.empty()) {
            s.median = median_of(values);
            s.iqr = iqr_of(values);
        }
        result.summary.push_back(s);
    }
    return result;
}

void write_metrics_csv(std::ostream& out, const SimMetrics& m) {
    out << "replication,status,sigma2_true,sigma2_hat,lambda_step1,lambda_step2,ise_cov";
    for (int l = 1; l <= kTrackedComponents; ++l) out << ",ise_psi" << l;
    for (int l = 1; l <= kTrackedComponents; ++l) out << ",se_lambda" << l;
    out << '\n';
    for (const ReplicationMetrics& r : m.replications) {
        out << r.replication << ',' << (r.ok ? "ok" : "fail") << ',' << fmt_double(r.sigma2_true);
        if (!r.ok) {
            for (int k = 0; k < 4 + 2 * kTrackedComponents; ++k) out << ",NA";
            out << '\n';
            continue;
        }
        out << ',' << fmt_double(r.sigma2_hat) << ',' << fmt_double(r.lambda_step1) << ','
            << fmt_double(r.lambda_step2) << ',' << fmt_double(r.ise_cov);
        for (double v : r.ise_eigenfunction) out << ',' << fmt_double(v);
        for (double v : r.se_eigenvalue) out << ',' << fmt_double(v);
        out << '\n';
    }
}

void write_summary_json(std::ostream& out, const SimMetrics& m) {
    using nlohmann::ordered_json;
    auto num = [](double v) -> ordered_json { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    ordered_json j;
    const SimConfig& c = m.config;
    j["config"] = {{"case", c.sim_case == SimCase::Case1 ? 1 : 2},
                   {"n", c.n},
                   {"m_set", c.m_set == MSet::I1 ? "I1" : "I2"},
                   {"snr", c.snr},
                   {"replications", c.replications},
                   {"seed", c.seed},
                   {"grid_G", c.grid_G}};
    ordered_json median = ordered_json::object();
    ordered_json iqr = ordered_json::object();
    for (const MetricSummary& s : m.summary) {
        median[s.name] = num(s.median);
        iqr[s.name] = num(s.iqr);
    }
    j["median"] = median;
    j["iqr"] = iqr;
    j["n_fail"] = m.n_fail;
    j["runtime"] = m.runtime_seconds;
    ordered_json errors = ordered_json::array();
    for (const ReplicationMetrics& r : m.replications)
        if (!r.ok) errors.push_back({{"replication", r.replication}, {"error", r.error}});
    j["failures"] = errors;
    out << j.dump(2) << '\n';
}

}  // namespace face
