#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spcr/errors.hpp"

namespace {

void add_fit_options(CLI::App* cmd, spcr::cli::RunConfig& config, bool with_penalties) {
    cmd->add_option("--input-path", config.input_path, "CSV with a header row")->required();
    cmd->add_option("--output-dir", config.output_dir, "directory for result files")->required();
    cmd->add_option("--family", config.family, "gaussian|binomial|poisson|multiclass");
    cmd->add_option("--k", config.k, "number of components");
    cmd->add_option("--w", config.w, "PCA-loss weight");
    cmd->add_option("--xi", config.xi, "ridge share of the loading penalty");
    if (with_penalties) {
        cmd->add_option("--lambda-beta", config.lambda_beta, "loading penalty level");
        cmd->add_option("--lambda-gamma", config.lambda_gamma, "coefficient L1 penalty");
    }
    cmd->add_option("--q", config.q, "adaptive exponent (0 = plain fit)");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_flag("--scale-columns", config.scale_columns, "divide predictors by sample SD");
    cmd->add_option("--max-outer", config.max_outer, "outer iteration cap");
    cmd->add_option("--tol", config.tol, "relative objective tolerance");
}

} // namespace

int main(int argc, char** argv) {
    spcr::cli::RunConfig config;
    CLI::App app{"sparse principal component regression for generalized linear models"};
    app.require_subcommand(1);

    CLI::App* fit = app.add_subcommand("fit", "fit at fixed penalties");
    add_fit_options(fit, config, true);

    CLI::App* cv = app.add_subcommand("cv", "cross-validated penalty selection + refit");
    add_fit_options(cv, config, false);
    cv->add_option("--folds", config.folds, "fold count");
    cv->add_option("--grid-points", config.grid_points, "grid size per penalty axis");
    CLI::Option* lb_pin =
        cv->add_option("--lambda-beta", config.lambda_beta, "pin the loading-penalty axis");
    CLI::Option* lg_pin =
        cv->add_option("--lambda-gamma", config.lambda_gamma, "pin the coefficient-penalty axis");

    CLI::App* simulate = app.add_subcommand("simulate", "write a benchmark dataset as CSV");
    simulate->add_option("--case", config.case_id, "case1|case2|case3|case4|illustrative")
        ->required();
    simulate->add_option("--n", config.n, "sample count");
    simulate->add_option("--seed", config.seed, "RNG seed");
    simulate->add_option("--output-dir", config.output_dir, "directory for data.csv + truth.json")
        ->required();

    CLI::App* bench = app.add_subcommand("bench", "replicated benchmark with CV per method");
    bench->add_option("--case", config.case_id, "case1|case2|case3|case4")->required();
    bench->add_option("--output-dir", config.output_dir)->required();
    bench->add_option("--n", config.n, "sample count per replication");
    bench->add_option("--reps", config.reps, "replication count");
    bench->add_option("--k", config.k, "number of components");
    bench->add_option("--methods", config.methods, "comma list from spcr,aspcr,pcr");
    bench->add_option("--q-list", config.q_list, "adaptive exponents for aspcr");
    bench->add_option("--folds", config.folds, "fold count");
    bench->add_option("--grid-points", config.grid_points, "grid size per penalty axis");
    bench->add_option("--seed", config.seed, "master seed");
    bench->add_option("--w", config.w, "PCA-loss weight");
    bench->add_option("--xi", config.xi, "ridge share");
    bench->add_option("--el-samples", config.el_samples, "Monte Carlo draws per EL estimate");
    bench->add_option("--max-outer", config.max_outer);
    bench->add_option("--tol", config.tol);

    CLI::App* predict = app.add_subcommand("predict", "score new rows with a fitted model");
    predict->add_option("--model-dir", config.model_dir, "directory written by fit/cv")
        ->required();
    predict->add_option("--input-path", config.input_path)->required();
    predict->add_option("--output-dir", config.output_dir)->required();

    CLI::App* scores = app.add_subcommand("scores", "recompute component scores for a CSV");
    scores->add_option("--model-dir", config.model_dir)->required();
    scores->add_option("--input-path", config.input_path)->required();
    scores->add_option("--output-dir", config.output_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            config.command = "fit";
            return spcr::cli::run_fit(config);
        }
        if (cv->parsed()) {
            config.command = "cv";
            config.lambda_beta_given = lb_pin->count() > 0;
            config.lambda_gamma_given = lg_pin->count() > 0;
            return spcr::cli::run_cv(config);
        }
        if (simulate->parsed()) {
            config.command = "simulate";
            return spcr::cli::run_simulate(config);
        }
        if (bench->parsed()) {
            config.command = "bench";
            return spcr::cli::run_bench(config);
        }
        if (predict->parsed()) {
            config.command = "predict";
            return spcr::cli::run_predict(config);
        }
        config.command = "scores";
        return spcr::cli::run_scores(config);
    } catch (const spcr::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const spcr::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
