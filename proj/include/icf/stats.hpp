#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace icf::stats {

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

/// Population (divide by n) standard deviation about a supplied mean.
inline double pstdev(std::span<const double> x, double mu) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(s / static_cast<double>(x.size()));
}

inline double pstdev(std::span<const double> x) { return pstdev(x, mean(x)); }

inline double variance(std::span<const double> x) {
    double sd = pstdev(x);
    return sd * sd;
}

/// Quantile by linear interpolation between order statistics
/// (h = (n-1)p; q1 of {1,2,3,4} is 1.75). Input need not be sorted.
inline double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// Pearson correlation; nullopt when either column has zero spread.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Average ranks (ties share the mean rank), 1-based.
inline std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    return pearson(ra, rb);
}

/// 1 - Phi(2): one-sided probability mass beyond two standard deviations.
inline double gaussian_two_sigma_tail() { return 0.5 * std::erfc(2.0 / std::sqrt(2.0)); }

}  // namespace icf::stats
