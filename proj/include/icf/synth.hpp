#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include "error.hpp"
#include "ingest.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace icf {

/// Generator parameters for one synthetic subject. Magnitudes in seconds
/// unless stated otherwise.
struct SubjectProfile {
    double base_mean = 0.8;
    double base_std = 0.05;
    double burst_rate = 0.0;         ///< expected bursts per 1000 beats
    double burst_magnitude = 0.0;    ///< mean burst height in units of base_std
    double slow_drift_amplitude = 0.0;
    double drift_period = 3000.0;    ///< beats
    std::size_t length = 20000;

    void validate() const {
        if (!(base_mean > 0.0)) fail(ErrorKind::validation, "base_mean must be positive");
        if (base_std < 0.0 || burst_rate < 0.0 || burst_magnitude < 0.0 || slow_drift_amplitude < 0.0)
            fail(ErrorKind::validation, "profile magnitudes must be nonnegative");
        if (!(drift_period > 0.0)) fail(ErrorKind::validation, "drift_period must be positive");
    }
};

inline constexpr double kMinInterval = 0.2;

/// base_mean + sinusoidal drift + N(0, base_std) jitter + one-sided bursts.
/// Bursts start at the arrivals of a Poisson process, last 1-3 beats and have
/// height burst_magnitude * base_std * (0.5 + Exp(1)). Values are clipped
/// below at 0.2 s.
inline TimeSeries gen_subject(const SubjectProfile& p, std::uint64_t seed, std::string id = "synthetic") {
    p.validate();
    Rng rng(seed);
    TimeSeries ts;
    ts.id = std::move(id);
    ts.values.resize(p.length);
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t t = 0; t < p.length; ++t) {
        const double drift =
            p.slow_drift_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / p.drift_period + phase);
        ts.values[t] = p.base_mean + drift + p.base_std * rng.normal();
    }
    if (p.burst_rate > 0.0 && p.burst_magnitude > 0.0) {
        const double rate = p.burst_rate / 1000.0;
        double pos = rng.exponential(rate);
        while (pos < static_cast<double>(p.length)) {
            const auto start = static_cast<std::size_t>(pos);
            const std::size_t duration = 1 + rng.index(3);
            const double height = p.burst_magnitude * p.base_std * (0.5 + rng.exponential(1.0));
            for (std::size_t t = start; t < std::min(start + duration, p.length); ++t) ts.values[t] += height;
            pos += rng.exponential(rate);
        }
    }
    for (auto& v : ts.values) v = std::max(v, kMinInterval);
    return ts;
}

/// Class templates and per-subject jitter for gen_cohort. Healthy subjects
/// beat slower, vary more and show more, larger slow-beat bursts.
struct CohortDesign {
    SubjectProfile healthy{.base_mean = 0.80,
                           .base_std = 0.050,
                           .burst_rate = 10.0,
                           .burst_magnitude = 4.0,
                           .slow_drift_amplitude = 0.05};
    SubjectProfile chf{.base_mean = 0.76,
                       .base_std = 0.048,
                       .burst_rate = 3.0,
                       .burst_magnitude = 2.5,
                       .slow_drift_amplitude = 0.05};
    double jitter = 0.15;  ///< relative spread of each parameter across subjects
};

inline SubjectProfile jittered(const SubjectProfile& base, double jitter, Rng& rng) {
    auto scale = [&](double v) { return v * std::max(0.1, 1.0 + jitter * rng.normal()); };
    SubjectProfile p = base;
    p.base_mean = scale(base.base_mean);
    p.base_std = scale(base.base_std);
    p.burst_rate = scale(base.burst_rate);
    p.burst_magnitude = scale(base.burst_magnitude);
    p.slow_drift_amplitude = scale(base.slow_drift_amplitude);
    return p;
}

/// Subjects h0001.. then c0001..; subject i draws its profile and series from
/// derive_seed(seed, "subject", i).
inline Cohort gen_cohort(std::size_t n_healthy, std::size_t n_chf, std::uint64_t seed, std::size_t length = 20000,
                         const CohortDesign& design = {}) {
    if (n_healthy == 0 || n_chf == 0) fail(ErrorKind::validation, "gen_cohort needs at least one subject per class");
    Cohort c;
    c.provenance = "synthetic";
    auto name = [](char prefix, std::size_t i) {
        std::string s = std::to_string(i + 1);
        return std::string(1, prefix) + std::string(4 - std::min<std::size_t>(4, s.size()), '0') + s;
    };
    for (std::size_t i = 0; i < n_healthy + n_chf; ++i) {
        const bool healthy = i < n_healthy;
        Rng rng(derive_seed(seed, "subject", i));
        auto p = jittered(healthy ? design.healthy : design.chf, design.jitter, rng);
        p.length = length;
        auto ts = gen_subject(p, rng.next(), healthy ? name('h', i) : name('c', i - n_healthy));
        ts.label = healthy ? Label::healthy : Label::chf;
        c.subjects.push_back(std::move(ts));
    }
    return c;
}

/// Writes `<id>.rr` files plus `manifest.csv` into dir.
inline void write_cohort(const Cohort& c, const std::filesystem::path& dir, std::string_view header_comment = {}) {
    std::filesystem::create_directories(dir);
    std::string manifest(header_comment);
    manifest += "id,path,label\n";
    for (const auto& s : c.subjects) {
        const auto file = s.id + ".rr";
        io::write_atomic(dir / file, format_rr(s));
        manifest += s.id + "," + file + "," + (s.label ? std::string(label_name(*s.label)) : std::string()) + "\n";
    }
    io::write_atomic(dir / "manifest.csv", manifest);
}

}  // namespace icf
