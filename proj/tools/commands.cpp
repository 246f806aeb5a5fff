#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "spcr/baselines.hpp"
#include "spcr/io.hpp"
#include "spcr/model_selection.hpp"
#include "spcr/optimizer.hpp"
#include "spcr/parallel.hpp"
#include "spcr/rng.hpp"
#include "spcr/simulate.hpp"

namespace spcr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

Family parse_family(const std::string& name, int n_classes = 0) {
    if (name == "gaussian") return Family::gaussian();
    if (name == "binomial") return Family::binomial();
    if (name == "poisson") return Family::poisson();
    if (name == "multiclass") return Family::multiclass(std::max(n_classes, 2));
    throw InputError("unknown family: " + name);
}

void validate_response(const Eigen::VectorXd& y, const Family& fam) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y(i);
        if (fam.kind == FamilyKind::binomial && v != 0.0 && v != 1.0)
            throw InputError("row " + std::to_string(i + 1) +
                             ": binomial response must be 0 or 1, got " + format_double(v));
        if (fam.kind == FamilyKind::poisson && (v < 0.0 || v != std::floor(v)))
            throw InputError("row " + std::to_string(i + 1) +
                             ": poisson response must be a non-negative integer, got " +
                             format_double(v));
    }
}

struct Preprocessed {
    Eigen::MatrixXd X;           // scaled (not centered)
    Eigen::VectorXd col_scales;  // 1 when scaling is off or a column is constant
};

Preprocessed apply_scaling(const Eigen::MatrixXd& X, bool scale_columns) {
    Preprocessed out;
    out.col_scales = Eigen::VectorXd::Ones(X.cols());
    out.X = X;
    if (!scale_columns) return out;
    const Eigen::VectorXd means = X.colwise().mean();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double ss = (X.col(j).array() - means(j)).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(X.rows() - 1));
        if (sd > 1e-12) {
            out.col_scales(j) = sd;
            out.X.col(j) /= sd;
        }
    }
    return out;
}

std::vector<std::string> component_names(Eigen::Index k) {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < k; ++j) names.push_back("PC" + std::to_string(j + 1));
    return names;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

json config_echo(const RunConfig& c) {
    return json{{"command", c.command},
                {"input_path", c.input_path},
                {"output_dir", c.output_dir},
                {"family", c.family},
                {"k", c.k},
                {"w", c.w},
                {"xi", c.xi},
                {"lambda_beta", c.lambda_beta},
                {"lambda_gamma", c.lambda_gamma},
                {"q", c.q},
                {"folds", c.folds},
                {"seed", c.seed},
                {"scale_columns", c.scale_columns}};
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd json_to_vector(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i];
    return v;
}

void write_fit_outputs(const fs::path& dir, const RunConfig& config, const Dataset& ds,
                       const Preprocessed& prep, const Eigen::VectorXd& col_means,
                       const FitResult& res, const json& extra) {
    const SpcrParams& params = res.params;
    const Eigen::Index k = params.n_components();
    const auto pcs = component_names(k);

    write_tsv((dir / "loadings.tsv").string(), params.loadings, pcs, ds.var_names, "variable");

    if (ds.class_labels.empty()) {
        write_tsv((dir / "gamma.tsv").string(), params.coef, {"gamma"}, pcs, "component");
        write_text_file((dir / "intercept.txt").string(),
                        format_double(params.intercept(0)) + "\n");
    } else {
        write_tsv((dir / "gamma.tsv").string(), params.coef, ds.class_labels, pcs, "component");
        std::ostringstream icpt;
        for (std::size_t g = 0; g < ds.class_labels.size(); ++g)
            icpt << ds.class_labels[g] << '\t'
                 << format_double(params.intercept(static_cast<Eigen::Index>(g))) << '\n';
        write_text_file((dir / "intercept.txt").string(), icpt.str());
    }

    const Eigen::MatrixXd centered = prep.X.rowwise() - col_means.transpose();
    write_tsv((dir / "scores.tsv").string(), centered * params.loadings, pcs);

    json doc;
    doc["config"] = config_echo(config);
    doc["converged"] = res.converged;
    doc["n_outer"] = res.n_outer;
    doc["objective_trace"] = res.objective_trace;
    doc["intercept"] = vector_to_json(params.intercept);
    if (params.coef.cols() == 1)
        doc["zeta_hat"] = vector_to_json(composite_coefficients(params.loadings, params.coef.col(0)));
    else
        doc["zeta_hat"] = matrix_to_json(params.loadings * params.coef);
    doc["preprocessing"] = json{{"variables", ds.var_names},
                                {"col_means", vector_to_json(col_means)},
                                {"col_scales", vector_to_json(prep.col_scales)}};
    if (!ds.class_labels.empty()) doc["class_labels"] = ds.class_labels;
    for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
    write_text_file((dir / "fit.json").string(), doc.dump(2) + "\n");
}

Dataset load_input(const RunConfig& config, bool need_response) {
    const bool multiclass = config.family == "multiclass";
    const std::string response = need_response ? (multiclass ? "class" : "y") : "";
    Dataset ds = load_csv(config.input_path, response, multiclass);
    if (need_response && !multiclass) validate_response(ds.y, parse_family(config.family));
    return ds;
}

FitControls controls_from(const RunConfig& config) {
    FitControls controls;
    controls.max_outer = config.max_outer;
    controls.tol = config.tol;
    return controls;
}

HyperParams base_hyper(const RunConfig& config) {
    HyperParams hyper;
    hyper.w = config.w;
    hyper.xi = config.xi;
    hyper.lambda_beta = config.lambda_beta;
    hyper.lambda_gamma = config.lambda_gamma;
    hyper.q = config.q;
    return hyper;
}

// --- model reload for predict / scores ---

struct LoadedModel {
    json meta;
    Eigen::MatrixXd loadings;
    Eigen::MatrixXd coef;
    Eigen::VectorXd intercept;
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_scales;
    std::vector<std::string> variables;
    std::vector<std::string> class_labels;
    std::string family;
};

LoadedModel load_model(const std::string& model_dir) {
    const fs::path dir(model_dir);
    LoadedModel m;
    m.meta = json::parse(read_text_file((dir / "fit.json").string()));
    m.loadings = read_tsv_matrix((dir / "loadings.tsv").string(), true);
    m.coef = read_tsv_matrix((dir / "gamma.tsv").string(), true);
    m.family = m.meta["config"]["family"];
    m.col_means = json_to_vector(m.meta["preprocessing"]["col_means"]);
    m.col_scales = json_to_vector(m.meta["preprocessing"]["col_scales"]);
    for (const auto& v : m.meta["preprocessing"]["variables"])
        m.variables.push_back(v.get<std::string>());
    if (m.meta.contains("class_labels"))
        for (const auto& v : m.meta["class_labels"])
            m.class_labels.push_back(v.get<std::string>());

    const std::string icpt = read_text_file((dir / "intercept.txt").string());
    if (m.class_labels.empty()) {
        m.intercept.resize(1);
        m.intercept(0) = std::strtod(icpt.c_str(), nullptr);
    } else {
        m.intercept.resize(static_cast<Eigen::Index>(m.class_labels.size()));
        std::istringstream ss(icpt);
        std::string label;
        double value;
        Eigen::Index g = 0;
        while (ss >> label >> value && g < m.intercept.size()) m.intercept(g++) = value;
        if (g != m.intercept.size())
            throw InputError("intercept.txt does not match the class label count");
    }
    return m;
}

// Reorders the CSV predictor block to the model's variable order and
// applies the persisted preprocessing.
Eigen::MatrixXd model_design(const LoadedModel& m, const std::string& input_path) {
    std::ifstream probe(input_path);
    if (!probe) throw InputError("cannot open input file: " + input_path);
    std::string header;
    std::getline(probe, header);
    probe.close();
    const bool multiclass = m.family == "multiclass";
    // tolerate a response column in prediction inputs
    std::string response;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) col.pop_back();
            if (col == "y" && !multiclass) response = "y";
            if (col == "class" && multiclass) response = "class";
        }
    }
    const Dataset ds = load_csv(input_path, response, multiclass);

    std::map<std::string, Eigen::Index> pos;
    for (std::size_t j = 0; j < ds.var_names.size(); ++j)
        pos[ds.var_names[j]] = static_cast<Eigen::Index>(j);

    Eigen::MatrixXd X(ds.X.rows(), static_cast<Eigen::Index>(m.variables.size()));
    for (std::size_t j = 0; j < m.variables.size(); ++j) {
        const auto it = pos.find(m.variables[j]);
        if (it == pos.end())
            throw InputError("input is missing model variable '" + m.variables[j] + "'");
        X.col(static_cast<Eigen::Index>(j)) = ds.X.col(it->second);
    }
    // persisted preprocessing: scale first, then remove the stored means
    // (the means were recorded on the scaled training block)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        X.col(j) = X.col(j).array() / m.col_scales(j) - m.col_means(j);
    return X;
}

} // namespace

int run_fit(const RunConfig& config) {
    const Dataset ds = load_input(config, true);
    if (config.k < 1 || config.k > ds.X.cols())
        throw InputError("k must be in [1, number of predictors]");

    const Preprocessed prep = apply_scaling(ds.X, config.scale_columns);
    const CenteredDesign cd = center_columns(prep.X);
    const HyperParams hyper = base_hyper(config);
    const FitControls controls = controls_from(config);

    FitResult res;
    if (config.family == "multiclass") {
        res = fit_multiclass(cd, ds.Y, hyper, config.k, controls);
    } else {
        const Family fam = parse_family(config.family);
        res = config.q > 0.0 ? fit_adaptive(cd, ds.y, fam, hyper, config.k, controls)
                             : fit(cd, ds.y, fam, hyper, config.k, controls);
    }

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_fit_outputs(dir, config, ds, prep, cd.col_means, res, json::object());
    return res.converged ? 0 : 3;
}

int run_cv(const RunConfig& config) {
    const Dataset ds = load_input(config, true);
    if (config.k < 1 || config.k > ds.X.cols())
        throw InputError("k must be in [1, number of predictors]");

    const Preprocessed prep = apply_scaling(ds.X, config.scale_columns);
    const HyperParams base = base_hyper(config);
    const FitControls controls = controls_from(config);

    CvSpec cv;
    cv.n_folds = config.folds;
    cv.seed = config.seed;
    cv.grid_points = config.grid_points;
    if (config.lambda_beta_given) cv.grid_beta = {config.lambda_beta};
    if (config.lambda_gamma_given) cv.grid_gamma = {config.lambda_gamma};

    CvResult result;
    if (config.family == "multiclass") {
        result = select_hyperparameters_multiclass(prep.X, ds.Y, config.k, cv, base, controls);
    } else {
        const Family fam = parse_family(config.family);
        result = select_hyperparameters(prep.X, ds.y, fam, config.k, cv, base, controls);
    }

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    std::vector<std::string> gcols, grows;
    for (double v : result.spec.grid_gamma) gcols.push_back(format_double(v));
    for (double v : result.spec.grid_beta) grows.push_back(format_double(v));
    write_tsv((dir / "cv_surface.tsv").string(), result.cv_surface, gcols, grows, "lambda_beta");

    json best{{"lambda_beta", result.best_lambda_beta},
              {"lambda_gamma", result.best_lambda_gamma},
              {"cv_value", result.best_value},
              {"folds", result.spec.n_folds},
              {"seed", config.seed},
              {"grid_beta", result.spec.grid_beta},
              {"grid_gamma", result.spec.grid_gamma}};
    write_text_file((dir / "best.json").string(), best.dump(2) + "\n");

    RunConfig refit_config = config;
    refit_config.lambda_beta = result.best_lambda_beta;
    refit_config.lambda_gamma = result.best_lambda_gamma;
    write_fit_outputs(dir, refit_config, ds, prep, result.refit_col_means, result.refit,
                      json{{"cv_value", result.best_value}});
    return result.refit.converged ? 0 : 3;
}

int run_simulate(const RunConfig& config) {
    const SimCase c = parse_sim_case(config.case_id);
    const SimData data = gen_case(c, config.n, config.seed);

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    std::ostringstream csv;
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) csv << 'x' << (j + 1) << ',';
    csv << "y\n";
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.X.cols(); ++j)
            csv << format_double(data.X(i, j)) << ',';
        csv << format_double(data.y(i)) << '\n';
    }
    write_text_file((dir / "data.csv").string(), csv.str());

    json truth{{"case", to_string(c)},
               {"n", config.n},
               {"seed", config.seed},
               {"family", data.family.kind == FamilyKind::poisson ? "poisson" : "binomial"},
               {"zeta_star", vector_to_json(data.truth.zeta_star)}};
    if (!data.truth.labels.empty()) truth["labels"] = data.truth.labels;
    if (data.truth.nu1.size()) truth["nu1"] = vector_to_json(data.truth.nu1);
    if (data.truth.nu2.size()) truth["nu2"] = vector_to_json(data.truth.nu2);
    write_text_file((dir / "truth.json").string(), truth.dump(2) + "\n");
    return 0;
}

namespace {

struct BenchMethod {
    std::string label;
    enum Kind { spcr, aspcr, pcr } kind;
    double q = 0.0;
};

struct RepOutcome {
    double el = 0.0;
    std::optional<double> tpr, tnr, tpr_union, tnr_union;
    double lambda_beta = 0.0, lambda_gamma = 0.0;
};

std::optional<double> union_support_rate(const Eigen::MatrixXd& loadings,
                                         const Eigen::VectorXd& zeta_star, bool positives) {
    Eigen::VectorXd flag = Eigen::VectorXd::Zero(loadings.rows());
    for (Eigen::Index l = 0; l < loadings.rows(); ++l)
        if (loadings.row(l).cwiseAbs().maxCoeff() > 1e-10) flag(l) = 1.0;
    const SelectionRates r = tpr_tnr(flag, zeta_star);
    return positives ? r.tpr : r.tnr;
}

void append_stat(std::ostringstream& out, const std::vector<double>& values, bool have) {
    if (!have || values.empty()) {
        out << "\tNA\tNA";
        return;
    }
    const MeanSd ms = mean_sd(values);
    out << '\t' << format_double(ms.mean) << '\t'
        << (std::isnan(ms.sd) ? std::string("NA") : format_double(ms.sd));
}

} // namespace

int run_bench(const RunConfig& config) {
    const SimCase c = parse_sim_case(config.case_id);
    if (c == SimCase::illustrative)
        throw InputError("bench: use the four benchmark cases");
    const Family fam = (c == SimCase::case1 || c == SimCase::case2) ? Family::binomial()
                                                                    : Family::poisson();

    std::vector<BenchMethod> methods;
    for (const std::string& name : split_list(config.methods)) {
        if (name == "spcr") {
            methods.push_back({"spcr", BenchMethod::spcr, 0.0});
        } else if (name == "aspcr") {
            for (const std::string& qs : split_list(config.q_list)) {
                const double q = std::strtod(qs.c_str(), nullptr);
                if (!(q > 0.0)) throw InputError("bench: aspcr needs q > 0, got " + qs);
                std::ostringstream label;
                label << "aspcr(" << qs << ")";
                methods.push_back({label.str(), BenchMethod::aspcr, q});
            }
        } else if (name == "pcr") {
            methods.push_back({"pcr", BenchMethod::pcr, 0.0});
        } else {
            throw InputError("bench: unknown method '" + name + "'");
        }
    }
    if (methods.empty()) throw InputError("bench: no methods selected");
    if (config.reps < 1) throw InputError("bench: reps must be >= 1");

    const FitControls controls = controls_from(config);
    std::vector<std::vector<RepOutcome>> outcomes(
        methods.size(), std::vector<RepOutcome>(static_cast<std::size_t>(config.reps)));

    parallel_for(config.reps, [&](int rep) {
        const std::uint64_t data_seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));
        const std::uint64_t fold_seed = derive_seed(data_seed, 1);
        const std::uint64_t el_seed = derive_seed(data_seed, 2);

        const SimData data = gen_case(c, config.n, data_seed);
        const auto folds = make_folds(config.n, config.folds, fold_seed);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const BenchMethod& method = methods[mi];
            RepOutcome& slot = outcomes[mi][static_cast<std::size_t>(rep)];
            if (method.kind == BenchMethod::pcr) {
                const PcrModel model = fit_pcr(data.X, data.y, fam, config.k);
                slot.el = expected_loglik(
                    [&](const Eigen::VectorXd& x) { return model.predict_kappa(x); }, fam, c,
                    config.el_samples, el_seed);
                continue;
            }
            HyperParams base = base_hyper(config);
            base.q = method.kind == BenchMethod::aspcr ? method.q : 0.0;
            CvSpec cv;
            cv.n_folds = config.folds;
            cv.folds = folds;
            cv.grid_points = config.grid_points;
            const CvResult sel =
                select_hyperparameters(data.X, data.y, fam, config.k, cv, base, controls);

            const SpcrParams& params = sel.refit.params;
            const Eigen::VectorXd zeta =
                composite_coefficients(params.loadings, params.coef.col(0));
            const SelectionRates rates = tpr_tnr(zeta, data.truth.zeta_star);
            slot.tpr = rates.tpr;
            slot.tnr = rates.tnr;
            slot.tpr_union = union_support_rate(params.loadings, data.truth.zeta_star, true);
            slot.tnr_union = union_support_rate(params.loadings, data.truth.zeta_star, false);
            slot.lambda_beta = sel.best_lambda_beta;
            slot.lambda_gamma = sel.best_lambda_gamma;
            const Eigen::VectorXd means = sel.refit_col_means;
            slot.el = expected_loglik(
                [&](const Eigen::VectorXd& x) {
                    return params.intercept(0) +
                           params.coef.col(0).dot(params.loadings.transpose() * (x - means));
                },
                fam, c, config.el_samples, el_seed);
        }
    });

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    std::ostringstream raw;
    raw << "method\trep\tlambda_beta\tlambda_gamma\tel\ttpr\ttnr\ttpr_union\ttnr_union\n";
    auto opt_str = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("NA");
    };
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
        for (int rep = 0; rep < config.reps; ++rep) {
            const RepOutcome& r = outcomes[mi][static_cast<std::size_t>(rep)];
            raw << methods[mi].label << '\t' << rep << '\t';
            if (methods[mi].kind == BenchMethod::pcr)
                raw << "NA\tNA";
            else
                raw << format_double(r.lambda_beta) << '\t' << format_double(r.lambda_gamma);
            raw << '\t' << format_double(r.el) << '\t' << opt_str(r.tpr) << '\t'
                << opt_str(r.tnr) << '\t' << opt_str(r.tpr_union) << '\t' << opt_str(r.tnr_union)
                << '\n';
        }
    write_text_file((dir / "bench_raw.tsv").string(), raw.str());

    std::ostringstream table;
    table << "method\tel_mean\tel_sd\ttpr_mean\ttpr_sd\ttnr_mean\ttnr_sd"
             "\ttpr_union_mean\ttpr_union_sd\ttnr_union_mean\ttnr_union_sd\tn_reps\n";
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        std::vector<double> el, tpr, tnr, tpru, tnru;
        for (const RepOutcome& r : outcomes[mi]) {
            el.push_back(r.el);
            if (r.tpr) tpr.push_back(*r.tpr);
            if (r.tnr) tnr.push_back(*r.tnr);
            if (r.tpr_union) tpru.push_back(*r.tpr_union);
            if (r.tnr_union) tnru.push_back(*r.tnr_union);
        }
        table << methods[mi].label;
        append_stat(table, el, true);
        const bool sel = methods[mi].kind != BenchMethod::pcr;
        append_stat(table, tpr, sel);
        append_stat(table, tnr, sel);
        append_stat(table, tpru, sel);
        append_stat(table, tnru, sel);
        table << '\t' << config.reps << '\n';
    }
    write_text_file((dir / "bench.tsv").string(), table.str());
    return 0;
}

int run_predict(const RunConfig& config) {
    const LoadedModel m = load_model(config.model_dir);
    const Eigen::MatrixXd X = model_design(m, config.input_path);
    const Eigen::MatrixXd scores = X * m.loadings;

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    if (m.class_labels.empty()) {
        const Family fam = parse_family(m.family);
        Eigen::MatrixXd out(X.rows(), 2);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double kappa = m.intercept(0) + m.coef.col(0).dot(scores.row(i));
            out(i, 0) = kappa;
            out(i, 1) = family_eval(fam, kappa).du;
        }
        write_tsv((dir / "predictions.tsv").string(), out, {"kappa", "mean"});
    } else {
        const Eigen::Index G = static_cast<Eigen::Index>(m.class_labels.size());
        Eigen::MatrixXd out(X.rows(), 2 * G);
        std::vector<std::string> cols;
        for (const auto& lab : m.class_labels) cols.push_back("kappa_" + lab);
        for (const auto& lab : m.class_labels) cols.push_back("prob_" + lab);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            Eigen::VectorXd kappa = m.intercept + m.coef.transpose() * scores.row(i).transpose();
            const double mx = kappa.maxCoeff();
            Eigen::VectorXd e = (kappa.array() - mx).exp();
            const Eigen::VectorXd prob = e / e.sum();
            out.row(i).head(G) = kappa;
            out.row(i).tail(G) = prob;
        }
        write_tsv((dir / "predictions.tsv").string(), out, cols);
    }
    return 0;
}

int run_scores(const RunConfig& config) {
    const LoadedModel m = load_model(config.model_dir);
    const Eigen::MatrixXd X = model_design(m, config.input_path);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_tsv((dir / "scores.tsv").string(), X * m.loadings,
              component_names(m.loadings.cols()));
    return 0;
}

} // namespace spcr::cli
