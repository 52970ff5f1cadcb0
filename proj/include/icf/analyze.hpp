#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decompose.hpp"
#include "error.hpp"
#include "featurize.hpp"
#include "ingest.hpp"
#include "io.hpp"
#include "stats.hpp"

namespace icf {

/// Pearson correlation of a value column with the 0/1 label (chf = 1).
inline double point_biserial(std::span<const double> values, std::span<const Label> labels) {
    if (values.size() != labels.size()) fail(ErrorKind::validation, "values and labels differ in length");
    std::vector<double> y;
    y.reserve(labels.size());
    bool h = false, c = false;
    for (auto l : labels) {
        y.push_back(static_cast<double>(l));
        (l == Label::chf ? c : h) = true;
    }
    if (!h || !c) fail(ErrorKind::validation, "point-biserial correlation needs both classes");
    auto r = stats::pearson(values, y);
    if (!r) fail(ErrorKind::undefined_correlation, "value column is constant");
    return *r;
}

/// Correlation or nothing when the data cannot define one.
inline std::optional<double> try_point_biserial(std::span<const double> values, std::span<const Label> labels,
                                                std::size_t min_subjects = 3) {
    if (values.size() < min_subjects) return std::nullopt;
    try {
        return point_biserial(values, labels);
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct CorrelationCurve {
    std::vector<double> x;
    std::vector<std::optional<double>> r;
};

inline std::string format_curve(const CorrelationCurve& c, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "x,r\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) out += io::format_double(c.x[i], 12) + "," + io::format_optional(c.r[i], 12) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

struct ScatterPoint {
    std::string id;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<Label> label;
};

inline std::vector<ScatterPoint> mean_variance_scatter(const Cohort& cohort) {
    std::vector<ScatterPoint> out;
    for (const auto& s : cohort.subjects) {
        const double mu = stats::mean(s.values);
        const double sd = stats::pstdev(s.values, mu);
        out.push_back({s.id, mu, sd * sd, s.label});
    }
    return out;
}

inline std::string format_scatter(std::span<const ScatterPoint> pts, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "id,mean,variance,label\n";
    for (const auto& p : pts) {
        out += p.id + "," + io::format_double(p.mean, 12) + "," + io::format_double(p.variance, 12) + ",";
        if (p.label) out += std::to_string(static_cast<int>(*p.label));
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------

/// A subject's decomposition with its label, the unit all cohort analyses use.
struct DecomposedSubject {
    std::string id;
    Label label = Label::healthy;
    Decomposition decomposition;
};

struct CurvePair {
    CorrelationCurve means;
    CorrelationCurve sigmas;
};

/// For component `component` (0-based; m is the trend) and tail `threshold`:
/// sort each subject's K block statistics ascending and correlate the k-th
/// order statistic with the label, k = 1..K. Blocks with a missing tail are
/// skipped, so a subject only reaches the order statistics it has values for.
inline CurvePair order_stat_correlations(std::span<const DecomposedSubject> subjects, std::size_t component,
                                         Threshold threshold, std::size_t k) {
    std::vector<std::vector<double>> means(subjects.size()), sigmas(subjects.size());
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        for (const auto& b : subcomponent_stats(subjects[s].decomposition.component(component), k)) {
            if (auto v = b.get(Statistic::mean, threshold, Channel::self)) means[s].push_back(*v);
            if (auto v = b.get(Statistic::sigma, threshold, Channel::self)) sigmas[s].push_back(*v);
        }
        std::sort(means[s].begin(), means[s].end());
        std::sort(sigmas[s].begin(), sigmas[s].end());
    }
    auto curve = [&](const std::vector<std::vector<double>>& per_subject) {
        CorrelationCurve c;
        for (std::size_t order = 0; order < k; ++order) {
            std::vector<double> v;
            std::vector<Label> l;
            for (std::size_t s = 0; s < subjects.size(); ++s)
                if (order < per_subject[s].size()) {
                    v.push_back(per_subject[s][order]);
                    l.push_back(subjects[s].label);
                }
            c.x.push_back(static_cast<double>(order + 1));
            c.r.push_back(try_point_biserial(v, l));
        }
        return c;
    };
    return {curve(means), curve(sigmas)};
}

// ---------------------------------------------------------------------------

struct ClassBalance {
    Label label = Label::healthy;
    double upper = 0.0;  ///< pooled fraction of terms > m + 2 sigma
    double lower = 0.0;  ///< pooled fraction of terms < m - 2 sigma
    std::size_t terms = 0;
};

struct OutlierBalance {
    std::vector<ClassBalance> classes;  // healthy, chf
    double reference = stats::gaussian_two_sigma_tail();
};

/// Counts of terms beyond mean +/- v sigma of the series itself.
inline std::pair<std::size_t, std::size_t> tail_counts(std::span<const double> x, double v = 2.0) {
    const double mu = stats::mean(x);
    const double sd = stats::pstdev(x, mu);
    std::size_t up = 0, lo = 0;
    for (double t : x) {
        up += t > mu + v * sd;
        lo += t < mu - v * sd;
    }
    return {up, lo};
}

inline OutlierBalance outlier_balance(std::span<const DecomposedSubject> subjects, std::size_t component) {
    OutlierBalance ob;
    for (auto label : {Label::healthy, Label::chf}) {
        std::size_t up = 0, lo = 0, n = 0;
        for (const auto& s : subjects) {
            if (s.label != label) continue;
            const auto x = s.decomposition.component(component);
            const auto [u, l] = tail_counts(x);
            up += u;
            lo += l;
            n += x.size();
        }
        ClassBalance cb{label, 0.0, 0.0, n};
        if (n > 0) {
            cb.upper = static_cast<double>(up) / static_cast<double>(n);
            cb.lower = static_cast<double>(lo) / static_cast<double>(n);
        }
        ob.classes.push_back(cb);
    }
    return ob;
}

inline std::string format_balance(const OutlierBalance& ob, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "class,upper,lower,reference\n";
    for (const auto& c : ob.classes)
        out += std::string(label_name(c.label)) + "," + io::format_double(c.upper, 12) + "," +
               io::format_double(c.lower, 12) + "," + io::format_double(ob.reference, 12) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

inline std::vector<double> default_v_grid(std::size_t points = 21) {
    std::vector<double> g;
    for (std::size_t i = 0; i < points; ++i) g.push_back(2.0 * static_cast<double>(i) / static_cast<double>(points - 1));
    return g;
}

/// Per subject: mean over the K blocks of the std of terms > block mean +
/// v * block std (blocks with <2 such terms skipped); correlated with the label
/// for each v.
inline CorrelationCurve v_sweep(std::span<const DecomposedSubject> subjects, std::size_t component,
                                std::span<const double> v_grid, std::size_t k) {
    std::vector<std::vector<std::span<const double>>> blocks;
    std::vector<std::vector<std::pair<double, double>>> moments;
    for (const auto& s : subjects) {
        blocks.push_back(split(s.decomposition.component(component), k));
        auto& mo = moments.emplace_back();
        for (auto b : blocks.back()) {
            const double mu = stats::mean(b);
            mo.emplace_back(mu, stats::pstdev(b, mu));
        }
    }
    CorrelationCurve c;
    for (double v : v_grid) {
        std::vector<double> vals;
        std::vector<Label> labels;
        for (std::size_t s = 0; s < subjects.size(); ++s) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t b = 0; b < blocks[s].size(); ++b)
                if (auto t = tail_moments(blocks[s][b], moments[s][b].first, moments[s][b].second, v, true)) {
                    sum += t->sigma;
                    ++n;
                }
            if (n == 0) continue;
            vals.push_back(sum / static_cast<double>(n));
            labels.push_back(subjects[s].label);
        }
        c.x.push_back(v);
        c.r.push_back(try_point_biserial(vals, labels));
    }
    return c;
}

}  // namespace icf
