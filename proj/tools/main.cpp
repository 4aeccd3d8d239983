#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <face/error.hpp>

#include "commands.hpp"

namespace {

int threads_from_env() {
    const char* env = std::getenv("FACE_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        const int v = std::stoi(env);
        return v > 0 ? v : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace face::cli;
    CLI::App app{"Fast covariance estimation for sparse functional data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "face 0.1.0");

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Estimate mean and covariance; write a JSON fit artifact");
    fit_cmd->add_option("-d,--data", fit.data, "Input CSV with header subject_id,time,value")->required();
    fit_cmd->add_option("-o,--out", fit.out, "Output artifact path (default: stdout)");
    fit_cmd->add_option("--knots", fit.knots, "Interior knots per margin")->check(CLI::Range(1, 200));
    fit_cmd->add_option("--order", fit.order, "B-spline order (degree + 1)")->check(CLI::Range(2, 10));
    fit_cmd->add_option("--G", fit.grid_G, "Covariance grid size stored in the artifact")->check(CLI::Range(2, 5000));
    fit_cmd->add_option("--beta", fit.beta, "Weight blending constant")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    fit_cmd->add_option("--lambda-min", fit.lambda_min, "Smallest lambda on the search grid")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lambda-max", fit.lambda_max, "Largest lambda on the search grid")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--lambda-count", fit.lambda_count, "Number of grid points")->check(CLI::Range(1, 100000));
    fit_cmd->add_flag("--exact-icv", fit.exact_icv, "Select lambda by exact leave-one-subject-out CV");

    EigenArgs eig;
    auto* eig_cmd = app.add_subcommand("eigen", "Eigenvalues and eigenfunctions of a fitted covariance");
    eig_cmd->add_option("-f,--fit", eig.fit, "Fit artifact")->required();
    eig_cmd->add_option("-o,--out", eig.out, "Output CSV (default: stdout)");
    eig_cmd->add_option("--G", eig.grid_G, "Evaluation grid size (default: 101)")->check(CLI::Range(2, 5000));
    eig_cmd->add_option("-k,--components", eig.k, "Number of components (0 = all positive)")
        ->check(CLI::NonNegativeNumber);

    PredictArgs pred;
    auto* pred_cmd = app.add_subcommand("predict", "Predict subject curves with pointwise bands");
    pred_cmd->add_option("-f,--fit", pred.fit, "Fit artifact")->required();
    pred_cmd->add_option("-d,--data", pred.data, "Observations CSV (subject_id,time,value)")->required();
    pred_cmd->add_option("-t,--times", pred.times, "CSV of new times with header 'time'")->required();
    pred_cmd->add_option("-o,--out", pred.out, "Output CSV (default: stdout)");
    pred_cmd->add_option("--subjects", pred.subjects, "Comma-separated subject ids (default: all)");
    pred_cmd->add_option("--level", pred.level, "Band coverage level")->check(CLI::Range(1e-9, 1.0 - 1e-9));
    pred_cmd->add_flag("--latent", pred.latent, "Bands for the noise-free curve");

    SimulateArgs sim;
    sim.threads = threads_from_env();
    auto* sim_cmd = app.add_subcommand("simulate", "Run a replication study");
    sim_cmd->add_option("--case", sim.sim_case, "Simulation case (1 or 2)")->check(CLI::IsMember({1, 2}));
    sim_cmd->add_option("--n", sim.n, "Subjects per data set")->check(CLI::Range(1, 1000000));
    sim_cmd->add_option("--m-set", sim.m_set, "Observations per subject: I1 = 3..7, I2 = 5..15")
        ->check(CLI::IsMember({"I1", "I2"}));
    sim_cmd->add_option("--snr", sim.snr, "Signal-to-noise ratio")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--reps", sim.reps, "Replications")->check(CLI::Range(1, 1000000));
    sim_cmd->add_option("--seed", sim.seed, "Master seed");
    sim_cmd->add_option("--G", sim.grid_G, "Evaluation grid size")->check(CLI::Range(2, 5000));
    sim_cmd->add_option("--snr-convention", sim.snr_convention, "auto, trace or double")
        ->check(CLI::IsMember({"auto", "trace", "double"}));
    sim_cmd->add_option("--knots", sim.knots, "Interior knots per margin")->check(CLI::Range(1, 200));
    sim_cmd->add_option("--order", sim.order, "B-spline order")->check(CLI::Range(2, 10));
    sim_cmd->add_option("-o,--out", sim.out, "Per-replication metrics CSV (default: stdout)");
    sim_cmd->add_option("--summary", sim.summary, "Summary JSON path (default: stderr)");
    sim_cmd->add_option("--write-data", sim.write_data, "Also write replication 0's data set as CSV");
    sim_cmd->add_option("--write-truth", sim.write_truth, "Also write the true covariance as a fit artifact");
    sim_cmd->add_option("--threads", sim.threads, "Worker threads (default: FACE_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    ValidateArgs val;
    auto* val_cmd = app.add_subcommand("validate", "Check fast formulas against the brute-force references");
    val_cmd->add_option("--instances", val.instances, "Random instances per check")->check(CLI::Range(1, 10000));
    val_cmd->add_option("--seed", val.seed, "Seed for the random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*fit_cmd) {
            if (!(fit.lambda_min < fit.lambda_max) && fit.lambda_count > 1) {
                std::cerr << "error: --lambda-min must be below --lambda-max\n";
                return 2;
            }
            return cmd_fit(fit);
        }
        if (*eig_cmd) return cmd_eigen(eig);
        if (*pred_cmd) return cmd_predict(pred);
        if (*sim_cmd) return cmd_simulate(sim);
        if (*val_cmd) return cmd_validate(val);
    } catch (const face::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
