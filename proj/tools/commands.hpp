#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <face/sim.hpp>
#include <face/solver.hpp>

namespace face::cli {

struct FitArgs {
    std::string data;
    std::string out;
    int knots = 10;
    int order = 4;
    int grid_G = kDefaultGridSize;
    double beta = kDefaultBeta;
    double lambda_min = 1e-6;
    double lambda_max = 1e6;
    int lambda_count = 100;
    bool exact_icv = false;
};

struct EigenArgs {
    std::string fit;
    std::string out;
    std::optional<int> grid_G;
    int k = 0;
};

struct PredictArgs {
    std::string fit;
    std::string data;
    std::string times;
    std::string out;
    std::string subjects;
    double level = 0.95;
    bool latent = false;
};

struct SimulateArgs {
    int sim_case = 1;
    int n = 100;
    std::string m_set = "I1";
    double snr = 2.0;
    int reps = 200;
    std::uint64_t seed = 1;
    int grid_G = kDefaultGridSize;
    std::string snr_convention = "auto";
    int knots = 10;
    int order = 4;
    std::string out;
    std::string summary;
    std::string write_data;
    std::string write_truth;
    int threads = 0;
};

struct ValidateArgs {
    int instances = 20;
    std::uint64_t seed = 1;
};

int cmd_fit(const FitArgs& a);
int cmd_eigen(const EigenArgs& a);
int cmd_predict(const PredictArgs& a);
int cmd_simulate(const SimulateArgs& a);
int cmd_validate(const ValidateArgs& a);

}  // namespace face::cli
