#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "analyze.hpp"
#include "decompose.hpp"
#include "feature_matrix.hpp"
#include "featurize.hpp"
#include "ingest.hpp"
#include "io.hpp"
#include "select.hpp"

namespace icf {

/// Every knob of a batch run. Defaults: window 50, K = 50, 1000 repeats with
/// 50 healthy / 30 chf training subjects.
struct RunConfig {
    std::size_t window = 50;
    std::size_t num_modes = 2;
    std::size_t subseries = 50;
    double tol = 1e-6;
    std::size_t max_iter = 1000;
    double C = 1.0;
    std::size_t splits = 1000;
    std::uint64_t seed = 0;
    std::size_t train_healthy = 50;
    std::size_t train_chf = 30;
    double max_drop_fraction = 0.10;
    double variance_eps = 1e-8;
    std::size_t rfe_step = 1;

    DecomposeOptions decompose_options() const { return {window, num_modes, tol, max_iter}; }

    StabilityOptions stability_options() const {
        StabilityOptions o;
        o.splits = splits;
        o.train_healthy = train_healthy;
        o.train_chf = train_chf;
        o.C = C;
        o.seed = seed;
        o.variance_eps = variance_eps;
        o.rfe_step = rfe_step;
        return o;
    }

    /// `# key=value` lines describing the resolved configuration.
    std::string comment_header() const {
        std::string s;
        auto add = [&](const char* k, const std::string& v) { s += std::string("# ") + k + "=" + v + "\n"; };
        add("window", std::to_string(window));
        add("modes", std::to_string(num_modes));
        add("subseries", std::to_string(subseries));
        add("tol", io::format_double(tol, 17));
        add("max_iter", std::to_string(max_iter));
        add("c", io::format_double(C, 17));
        add("splits", std::to_string(splits));
        add("seed", std::to_string(seed));
        add("train_healthy", std::to_string(train_healthy));
        add("train_chf", std::to_string(train_chf));
        add("max_drop_fraction", io::format_double(max_drop_fraction, 17));
        add("variance_eps", io::format_double(variance_eps, 17));
        add("rfe_step", std::to_string(rfe_step));
        return s;
    }
};

inline Decomposition decompose_subject(const TimeSeries& ts, const RunConfig& cfg) {
    try {
        return decompose(ts.values, cfg.decompose_options());
    } catch (const Error& e) {
        throw Error(e.kind(), ts.id + ": " + e.what());
    }
}

inline FeatureVector featurize_series(const TimeSeries& ts, const RunConfig& cfg) {
    const auto d = decompose_subject(ts, cfg);
    try {
        return featurize_subject(ts.id, d, cfg.subseries);
    } catch (const Error& e) {
        throw Error(e.kind(), ts.id + ": " + e.what());
    }
}

inline FeatureMatrix featurize_cohort(const Cohort& c, const RunConfig& cfg) {
    FeatureMatrix m;
    for (const auto& s : c.subjects) m.add(featurize_series(s, cfg), s.label);
    return m;
}

/// Requires a fully labeled cohort.
inline std::vector<DecomposedSubject> decompose_cohort(const Cohort& c, const RunConfig& cfg) {
    require_both_classes(c);
    std::vector<DecomposedSubject> out;
    out.reserve(c.subjects.size());
    for (const auto& s : c.subjects) out.push_back({s.id, *s.label, decompose_subject(s, cfg)});
    return out;
}

/// CSV t,x,F1..Fm,R at 12 significant digits.
inline std::string format_decomposition(std::span<const double> x, const Decomposition& d,
                                        std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "t,x";
    for (std::size_t i = 0; i < d.modes.size(); ++i) out += ",F" + std::to_string(i + 1);
    out += ",R\n";
    for (std::size_t t = 0; t < x.size(); ++t) {
        out += std::to_string(t) + "," + io::format_double(x[t], 12);
        for (const auto& f : d.modes) out += "," + io::format_double(f[t], 12);
        out += "," + io::format_double(d.residual[t], 12) + "\n";
    }
    return out;
}

}  // namespace icf
