#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "face/dataset.hpp"
#include "face/linalg.hpp"
#include "face/random.hpp"
#include "face/solver.hpp"
#include "face/spectral.hpp"

namespace face {

enum class SimCase { Case1, Case2 };
enum class MSet { I1, I2 };  // {3..7} and {5..15}

// How sigma^2 is calibrated from the signal-to-noise ratio.
//   Trace:          sigma^2 = (1/snr) * int C(t,t) dt
//   DoubleIntegral: sigma^2 = (1/snr) * int int C(s,t) ds dt
//   Auto:           Trace for Case 1 (whose double integral is 0), DoubleIntegral for Case 2
enum class SnrConvention { Auto, Trace, DoubleIntegral };

inline constexpr double kMaternPhi = 0.07;
inline constexpr double kMaternNu = 1.0;

// Matérn correlation (2^{1-nu}/Gamma(nu)) (d/phi)^nu K_nu(d/phi); C(0) = 1.
double matern_cov(double d, double phi = kMaternPhi, double nu = kMaternNu);

// True covariance of a simulation case on [0,1]^2.
std::function<double(double, double)> truth_covariance(SimCase c);

// Case 1 eigenfunctions (l = 1, 2, 3) and eigenvalues.
double case1_eigenfunction(int l, double t);
double case1_eigenvalue(int l);

// int_0^1 C(t,t) dt and int int C(s,t) ds dt for a case.
double trace_integral(SimCase c);
double double_integral(SimCase c, int points = 1001);

double noise_variance(SimCase c, double snr, SnrConvention conv = SnrConvention::Auto);

struct SimulatedData {
    SparseFunctionalDataset data;  // times already on [0,1], marked rescaled
    std::vector<std::vector<double>> latent;  // u_i(t_ij), aligned with data
    double sigma2 = 0.0;
};

// One draw of the zero-mean latent curve at the given times.
Vector draw_latent(SimCase c, const std::vector<double>& times, RandomStream& rng);

std::vector<int> m_values(MSet set);

SimulatedData gen_case1(int n, MSet m_set, double snr, RandomStream& rng,
                        SnrConvention conv = SnrConvention::Auto);
SimulatedData gen_case2(int n, MSet m_set, double snr, RandomStream& rng,
                        SnrConvention conv = SnrConvention::Auto);
SimulatedData generate(SimCase c, int n, MSet m_set, double snr, RandomStream& rng,
                       SnrConvention conv = SnrConvention::Auto);

// Rectangle-rule criteria on a G-point grid.
double ise_covariance(const Matrix& C_est, const Matrix& C_true);
double ise_eigenfunction(const Vector& psi_hat, const Vector& psi);
double se_eigenvalue(double l_hat, double l);

struct SimConfig {
    SimCase sim_case = SimCase::Case1;
    int n = 100;
    MSet m_set = MSet::I1;
    double snr = 2.0;
    int replications = 200;
    std::uint64_t seed = 1;
    int grid_G = kDefaultGridSize;
    SnrConvention snr_convention = SnrConvention::Auto;
    FitOptions fit;
    // Worker threads; 0 means hardware concurrency. Never affects results.
    int threads = 0;

    void validate() const;
};

inline constexpr int kTrackedComponents = 3;

struct ReplicationMetrics {
    int replication = 0;
    bool ok = false;
    std::string error;
    double sigma2_true = 0.0;
    double sigma2_hat = 0.0;
    double lambda_step1 = 0.0;
    double lambda_step2 = 0.0;
    double ise_cov = 0.0;
    std::vector<double> ise_eigenfunction;  // l = 1..3
    std::vector<double> se_eigenvalue;      // l = 1..3
    double runtime_seconds = 0.0;
};

struct MetricSummary {
    std::string name;
    double median = 0.0;
    double iqr = 0.0;
};

struct SimMetrics {
    SimConfig config;
    std::vector<ReplicationMetrics> replications;
    std::vector<MetricSummary> summary;
    int n_fail = 0;
    double runtime_seconds = 0.0;  // wall time of the whole study

    const MetricSummary& metric(const std::string& name) const;
};

// One replication: data from stream (seed, r), fit, metrics against the truth.
ReplicationMetrics run_replication(const SimConfig& config, int r);
SimMetrics run_study(const SimConfig& config);

// Per-replication CSV without timings, so equal seeds give identical bytes.
void write_metrics_csv(std::ostream& out, const SimMetrics& m);
// {"median": {...}, "iqr": {...}, "n_fail": k, "runtime": seconds, ...}
void write_summary_json(std::ostream& out, const SimMetrics& m);

}  // namespace face
