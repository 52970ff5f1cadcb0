#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "featurize.hpp"
#include "ingest.hpp"
#include "io.hpp"

namespace icf {

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// Subjects x features with missing cells, as produced by featurize. Imputation
/// happens later, per training split, in standardize().
struct FeatureMatrix {
    std::vector<std::string> subjects;
    std::vector<std::optional<Label>> labels;
    std::vector<std::string> names;
    std::vector<std::vector<std::optional<double>>> values;  // [row][col]

    std::size_t rows() const { return subjects.size(); }
    std::size_t cols() const { return names.size(); }

    void add(const FeatureVector& fv, std::optional<Label> label) {
        if (names.empty())
            for (const auto& id : fv.ids) names.push_back(feature_name(id));
        else if (fv.ids.size() != names.size())
            fail(ErrorKind::validation, fv.subject + ": feature count differs from earlier subjects");
        subjects.push_back(fv.subject);
        labels.push_back(label);
        values.push_back(fv.values);
    }

    /// +1 for chf, -1 for healthy.
    int sign(std::size_t r) const {
        if (!labels[r]) fail(ErrorKind::validation, subjects[r] + ": unlabeled subject in training data");
        return *labels[r] == Label::chf ? 1 : -1;
    }

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t c = 0; c < names.size(); ++c)
            if (names[c] == name) return c;
        return std::nullopt;
    }
};

/// Columns whose spread over `rows` (missing cells skipped) is at most
/// eps * (|mean| + 1) are dropped. Returns kept column indices in order.
inline std::vector<std::size_t> variance_filter(const FeatureMatrix& m, std::span<const std::size_t> rows, double eps) {
    std::vector<std::size_t> kept;
    std::vector<double> v;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        v.clear();
        for (auto r : rows)
            if (m.values[r][c]) v.push_back(*m.values[r][c]);
        if (v.size() < 2) continue;
        const double mu = stats::mean(v);
        if (stats::pstdev(v, mu) > eps * (std::abs(mu) + 1.0)) kept.push_back(c);
    }
    if (kept.empty()) fail(ErrorKind::degenerate_data, "every feature column is (almost) constant");
    return kept;
}

/// Per-column z-score parameters fitted on training rows.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> sd;

    double apply(std::size_t j, double v) const { return sd[j] > 0.0 ? (v - mean[j]) / sd[j] : 0.0; }
};

inline Scaler fit_scaler(const FeatureMatrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> columns) {
    Scaler s;
    std::vector<double> v;
    for (auto c : columns) {
        v.clear();
        for (auto r : rows)
            if (m.values[r][c]) v.push_back(*m.values[r][c]);
        const double mu = stats::mean(v);
        s.mean.push_back(mu);
        s.sd.push_back(stats::pstdev(v, mu));
    }
    return s;
}

struct Standardized {
    Matrix x;
    std::vector<std::vector<bool>> imputed;  // [row][col]
};

/// Applies the scaler to the chosen rows/columns. Missing cells become 0,
/// the training mean, and are flagged.
inline Standardized standardize(const FeatureMatrix& m, const Scaler& s, std::span<const std::size_t> rows,
                                std::span<const std::size_t> columns) {
    Standardized out{Matrix(rows.size(), columns.size()), {}};
    out.imputed.assign(rows.size(), std::vector<bool>(columns.size(), false));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto& cell = m.values[rows[i]][columns[j]];
            if (cell) out.x(i, j) = s.apply(j, *cell);
            else out.imputed[i][j] = true;
        }
    return out;
}

// ---------------------------------------------------------------------------
// CSV: id,label,<feature names...>; missing cells empty; '#' lines are comments.

inline std::string format_feature_matrix(const FeatureMatrix& m, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "id,label";
    for (const auto& n : m.names) out += "," + io::csv_field(n);
    out += '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += m.subjects[r];
        out += ',';
        if (m.labels[r]) out += std::to_string(static_cast<int>(*m.labels[r]));
        for (const auto& v : m.values[r]) {
            out += ',';
            out += io::format_optional(v, 17);
        }
        out += '\n';
    }
    return out;
}

inline FeatureMatrix parse_feature_matrix(std::string_view text, const std::string& source = "feature matrix") {
    FeatureMatrix m;
    bool header = false;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto raw : io::lines(text)) {
        ++line_no;
        const auto line = io::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto split = io::split_csv(line);
        if (!split) fail(ErrorKind::malformed_input, source + " line " + std::to_string(line_no) + ": unterminated quote");
        const auto& cells = *split;
        if (!header) {
            if (cells.size() < 3 || cells[0] != "id" || cells[1] != "label")
                fail(ErrorKind::validation, source + ": header must start with id,label");
            for (std::size_t c = 2; c < cells.size(); ++c) {
                if (!parse_feature_name(cells[c]))
                    fail(ErrorKind::validation, source + ": bad feature name " + cells[c]);
                m.names.push_back(cells[c]);
            }
            header = true;
            continue;
        }
        if (cells.size() != m.names.size() + 2)
            fail(ErrorKind::validation, source + " line " + std::to_string(line_no) + ": wrong field count");
        std::string id = cells[0];
        if (!seen.insert(id).second)
            fail(ErrorKind::validation, source + " line " + std::to_string(line_no) + ": duplicate id " + id);
        std::optional<Label> label;
        if (cells[1] == "0") label = Label::healthy;
        else if (cells[1] == "1") label = Label::chf;
        else if (!cells[1].empty())
            fail(ErrorKind::validation, source + " line " + std::to_string(line_no) + ": label must be 0, 1 or empty");
        std::vector<std::optional<double>> row;
        row.reserve(m.names.size());
        for (std::size_t c = 2; c < cells.size(); ++c) {
            if (io::trim(cells[c]).empty()) {
                row.emplace_back();
                continue;
            }
            auto v = io::parse_double(cells[c]);
            if (!v) fail(ErrorKind::malformed_input, source + " line " + std::to_string(line_no) + ": bad number");
            row.push_back(*v);
        }
        m.subjects.push_back(std::move(id));
        m.labels.push_back(label);
        m.values.push_back(std::move(row));
    }
    if (!header) fail(ErrorKind::validation, source + ": missing header");
    return m;
}

}  // namespace icf
