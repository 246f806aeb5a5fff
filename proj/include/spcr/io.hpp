#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spcr/errors.hpp"

namespace spcr {

/// CSV contents split into the response column and the numeric predictor
/// block. `class_labels` lists the response levels (sorted) when the
/// response column holds class labels; `Y` is then the one-hot indicator.
struct Dataset {
    Eigen::MatrixXd X;
    std::vector<std::string> var_names;
    Eigen::VectorXd y;                     // numeric response
    Eigen::MatrixXd Y;                     // n x G indicator (multiclass only)
    std::vector<std::string> class_labels; // level names, lexicographic
    std::vector<int> label_index;          // per-row class index (multiclass only)
    bool has_response = false;
};

/// Reads a comma-separated, UTF-8, header-required file. The response
/// column is `response_col` (pass "" to load predictors only, e.g. for
/// prediction inputs). Missing cells, non-numeric predictors and
/// non-finite values raise InputError with a row/column diagnostic.
/// `categorical_response` keeps the response as class labels.
Dataset load_csv(const std::string& path, const std::string& response_col,
                 bool categorical_response);

/// 17-significant-digit decimal rendering used by every numeric output.
std::string format_double(double v);

/// TSV with optional leading row-name column. Every numeric cell uses
/// format_double.
void write_tsv(const std::string& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& col_names,
               const std::vector<std::string>& row_names = {},
               const std::string& row_header = "");

Eigen::MatrixXd read_tsv_matrix(const std::string& path, bool has_row_names);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace spcr
