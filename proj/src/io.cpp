#include "spcr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace spcr {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
    const std::string v = strip(cell);
    std::ostringstream where;
    where << "row " << row << ", column '" << col << "'";
    if (v.empty()) throw InputError("missing value at " + where.str());
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw InputError("non-numeric value '" + v + "' at " + where.str());
    if (!std::isfinite(x))
        throw InputError("non-finite value '" + v + "' at " + where.str());
    return x;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& response_col,
                 bool categorical_response) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError("empty input file: " + path);
    std::vector<std::string> header = split_line(line, ',');
    for (auto& h : header) h = strip(h);

    int resp_idx = -1;
    Dataset ds;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (!response_col.empty() && header[c] == response_col) {
            if (resp_idx >= 0) throw InputError("duplicate response column '" + response_col + "'");
            resp_idx = c;
        } else {
            ds.var_names.push_back(header[c]);
        }
    }
    if (!response_col.empty() && resp_idx < 0)
        throw InputError("response column '" + response_col + "' not found in " + path);
    if (ds.var_names.empty()) throw InputError("no predictor columns in " + path);
    ds.has_response = resp_idx >= 0;

    std::vector<std::vector<double>> xrows;
    std::vector<double> yvals;
    std::vector<std::string> ylabels;
    int row = 0;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line, ',');
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << row << ": expected " << header.size() << " cells, got "
                << cells.size();
            throw InputError(msg.str());
        }
        std::vector<double> xrow;
        xrow.reserve(ds.var_names.size());
        for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
            if (c == resp_idx) {
                if (categorical_response) {
                    const std::string lab = strip(cells[c]);
                    if (lab.empty())
                        throw InputError("missing class label at row " + std::to_string(row));
                    ylabels.push_back(lab);
                } else {
                    yvals.push_back(parse_cell(cells[c], row, header[c]));
                }
            } else {
                xrow.push_back(parse_cell(cells[c], row, header[c]));
            }
        }
        xrows.push_back(std::move(xrow));
    }
    if (xrows.empty()) throw InputError("no data rows in " + path);

    ds.X.resize(static_cast<Eigen::Index>(xrows.size()),
                static_cast<Eigen::Index>(ds.var_names.size()));
    for (std::size_t i = 0; i < xrows.size(); ++i)
        for (std::size_t j = 0; j < xrows[i].size(); ++j)
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xrows[i][j];

    if (ds.has_response && categorical_response) {
        std::map<std::string, int> levels;
        for (const auto& lab : ylabels) levels.emplace(lab, 0);
        int g = 0;
        for (auto& kv : levels) {
            ds.class_labels.push_back(kv.first);
            kv.second = g++;
        }
        ds.Y = Eigen::MatrixXd::Zero(ds.X.rows(), g);
        ds.label_index.resize(ylabels.size());
        for (std::size_t i = 0; i < ylabels.size(); ++i) {
            const int cls = levels[ylabels[i]];
            ds.label_index[i] = cls;
            ds.Y(static_cast<Eigen::Index>(i), cls) = 1.0;
        }
    } else if (ds.has_response) {
        ds.y = Eigen::Map<Eigen::VectorXd>(yvals.data(), static_cast<Eigen::Index>(yvals.size()));
    }
    return ds;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_tsv(const std::string& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& col_names,
               const std::vector<std::string>& row_names, const std::string& row_header) {
    if (static_cast<Eigen::Index>(col_names.size()) != values.cols())
        throw InputError("write_tsv: column name count mismatch");
    if (!row_names.empty() && static_cast<Eigen::Index>(row_names.size()) != values.rows())
        throw InputError("write_tsv: row name count mismatch");

    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    if (!row_names.empty()) out << row_header << '\t';
    for (std::size_t c = 0; c < col_names.size(); ++c)
        out << col_names[c] << (c + 1 < col_names.size() ? '\t' : '\n');
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        if (!row_names.empty()) out << row_names[static_cast<std::size_t>(r)] << '\t';
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            out << format_double(values(r, c)) << (c + 1 < values.cols() ? '\t' : '\n');
    }
    if (!out) throw InputError("write failed: " + path);
}

Eigen::MatrixXd read_tsv_matrix(const std::string& path, bool has_row_names) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty file: " + path);
    std::vector<std::vector<double>> rows;
    int row = 0;
    while (std::getline(in, line)) {
        if (strip(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line, '\t');
        std::vector<double> vals;
        for (std::size_t c = has_row_names ? 1 : 0; c < cells.size(); ++c)
            vals.push_back(parse_cell(cells[c], row, "col" + std::to_string(c)));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) return {};
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw InputError("ragged TSV: " + path);
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return M;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path);
    out << contents;
    if (!out) throw InputError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace spcr
