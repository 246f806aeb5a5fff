#pragma once

#include <cstdint>
#include <string>

namespace spcr::cli {

struct RunConfig {
    std::string command;
    std::string input_path;
    std::string output_dir;
    std::string model_dir;  // predict / scores
    std::string family = "binomial";
    int k = 1;
    double w = 0.01;
    double xi = 0.001;
    double lambda_beta = 1.0;
    double lambda_gamma = 0.1;
    double q = 0.0;
    int folds = 5;
    std::uint64_t seed = 1;
    bool scale_columns = false;
    // cv: pin a penalty axis to the single given value instead of a grid
    bool lambda_beta_given = false;
    bool lambda_gamma_given = false;
    // simulate / bench
    std::string case_id = "case1";
    int n = 200;
    int reps = 20;
    std::string methods = "spcr,aspcr,pcr";
    std::string q_list = "1";
    int grid_points = 10;
    int el_samples = 1000;
    // optimizer controls
    int max_outer = 100;
    double tol = 1e-5;
};

// Each command returns the process exit code (0 ok, 3 non-convergence);
// input problems raise spcr::InputError (exit 2) and numeric failures
// spcr::NumericError (exit 4).
int run_fit(const RunConfig& config);
int run_cv(const RunConfig& config);
int run_simulate(const RunConfig& config);
int run_bench(const RunConfig& config);
int run_predict(const RunConfig& config);
int run_scores(const RunConfig& config);

} // namespace spcr::cli
