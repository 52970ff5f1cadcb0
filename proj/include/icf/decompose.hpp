#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace icf {

/// Symmetric nonnegative convolution mask a_{-N..N} defining the low-pass
/// filter. Stored as 2N+1 coefficients, index N is the center tap.
class Mask {
public:
    enum class Shape { fejer, custom };

    /// Triangular mask a_j = (N+1-|j|)/(N+1)^2. Its frequency response is a
    /// squared Fejér kernel, so it is nonnegative everywhere and (I-L)^n
    /// converges.
    static Mask fejer(std::size_t window) {
        if (window == 0) fail(ErrorKind::degenerate_filter, "window size must be >= 1");
        const double denom = static_cast<double>((window + 1) * (window + 1));
        std::vector<double> a(2 * window + 1);
        for (std::size_t k = 0; k < a.size(); ++k) {
            const auto j = static_cast<double>(k) - static_cast<double>(window);
            a[k] = (static_cast<double>(window + 1) - std::abs(j)) / denom;
        }
        return Mask(std::move(a), window, Shape::fejer);
    }

    /// Arbitrary mask; must be odd-length, symmetric, nonnegative and sum to 1.
    static Mask custom(std::vector<double> coefficients) {
        if (coefficients.size() < 3 || coefficients.size() % 2 == 0)
            fail(ErrorKind::degenerate_filter, "mask needs an odd length of at least 3");
        const std::size_t window = coefficients.size() / 2;
        double sum = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            if (coefficients[k] < 0.0) fail(ErrorKind::degenerate_filter, "mask coefficients must be nonnegative");
            if (coefficients[k] != coefficients[coefficients.size() - 1 - k])
                fail(ErrorKind::degenerate_filter, "mask must be symmetric");
            sum += coefficients[k];
        }
        if (std::abs(sum - 1.0) > 1e-12) fail(ErrorKind::degenerate_filter, "mask must sum to 1");
        return Mask(std::move(coefficients), window, Shape::custom);
    }

    std::size_t window() const noexcept { return window_; }
    Shape shape() const noexcept { return shape_; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }

    /// a_j for j in [-N, N].
    double operator[](std::ptrdiff_t j) const { return coeffs_[static_cast<std::size_t>(j + static_cast<std::ptrdiff_t>(window_))]; }

    /// Real-valued DTFT a_0 + 2 sum_j a_j cos(j w).
    double frequency_response(double omega) const {
        double r = coeffs_[window_];
        for (std::size_t j = 1; j <= window_; ++j)
            r += 2.0 * coeffs_[window_ + j] * std::cos(static_cast<double>(j) * omega);
        return r;
    }

private:
    Mask(std::vector<double> a, std::size_t window, Shape shape)
        : coeffs_(std::move(a)), window_(window), shape_(shape) {}

    std::vector<double> coeffs_;
    std::size_t window_;
    Shape shape_;
};

namespace detail {

inline void require_length(std::size_t n, std::size_t window) {
    if (n < 2 * window + 1)
        fail(ErrorKind::insufficient_length, "series of length " + std::to_string(n) +
                                                 " is shorter than 2N+1 = " + std::to_string(2 * window + 1));
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Reusable buffers for repeated filtering of equal-length series.
class LowpassKernel {
public:
    explicit LowpassKernel(const Mask& mask) : mask_(mask) {}

    /// out = L(x). Half-sample mirror extension: x[-1-i] = x[i],
    /// x[n+i] = x[n-1-i] (valid while N <= n).
    void apply(std::span<const double> x, std::span<double> out) {
        const std::size_t n = x.size();
        const std::size_t pad = mask_.window();
        ext_.resize(n + 2 * pad);
        for (std::size_t k = 0; k < pad; ++k) {
            ext_[pad - 1 - k] = x[k];
            ext_[pad + n + k] = x[n - 1 - k];
        }
        std::copy(x.begin(), x.end(), ext_.begin() + static_cast<std::ptrdiff_t>(pad));
        if (mask_.shape() == Mask::Shape::fejer) fejer(out);
        else direct(out);
    }

private:
    // The triangular mask is the self-convolution of a box of width N+1, so
    // it is applied as two running sums in O(n) regardless of N.
    void fejer(std::span<double> out) {
        const std::size_t window = mask_.window();
        const std::size_t w = window + 1;
        const std::size_t nb = out.size() + window;
        box_.resize(nb);
        const double* e = ext_.data();
        double s = 0.0;
        for (std::size_t p = 0; p < w; ++p) s += e[p];
        box_[0] = s;
        for (std::size_t k = 1; k < nb; ++k) {
            s += e[k + window] - e[k - 1];
            box_[k] = s;
        }
        const double scale = 1.0 / static_cast<double>(w * w);
        const double* b = box_.data();
        s = 0.0;
        for (std::size_t q = 0; q < w; ++q) s += b[q];
        out[0] = s * scale;
        for (std::size_t t = 1; t < out.size(); ++t) {
            s += b[t + window] - b[t - 1];
            out[t] = s * scale;
        }
    }

    void direct(std::span<double> out) {
        const auto a = mask_.coefficients();
        for (std::size_t t = 0; t < out.size(); ++t) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * ext_[t + k];
            out[t] = s;
        }
    }

    const Mask& mask_;
    std::vector<double> ext_;
    std::vector<double> box_;
};

}  // namespace detail

/// L(x)(t) = sum_j a_j x(t+j) with mirror extension at both ends.
inline std::vector<double> lowpass(std::span<const double> x, const Mask& mask) {
    detail::require_length(x.size(), mask.window());
    std::vector<double> out(x.size());
    detail::LowpassKernel(mask).apply(x, out);
    return out;
}

struct ModeResult {
    std::vector<double> mode;
    std::size_t iterations = 0;
};

/// Approximates T(x) = lim (I-L)^n x. Iterates h <- h - L(h) from h = x until
/// ||L(h)|| / ||h|| < tol or max_iter steps. An h that has shrunk to rounding
/// level relative to x counts as zero and ends the loop early.
inline ModeResult extract_mode(std::span<const double> x, const Mask& mask, double tol, std::size_t max_iter) {
    detail::require_length(x.size(), mask.window());
    ModeResult r{std::vector<double>(x.begin(), x.end()), 0};
    auto& h = r.mode;
    detail::LowpassKernel kernel(mask);
    std::vector<double> low(x.size());
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * detail::norm2(x);
    while (r.iterations < max_iter) {
        const double hn = detail::norm2(h);
        if (hn <= floor || !std::isfinite(hn)) break;
        kernel.apply(h, low);
        if (detail::norm2(low) / hn < tol) break;
        for (std::size_t t = 0; t < h.size(); ++t) h[t] -= low[t];
        ++r.iterations;
    }
    if (detail::norm2(h) <= floor) std::fill(h.begin(), h.end(), 0.0);
    return r;
}

struct DecomposeOptions {
    std::size_t window = 50;
    std::size_t num_modes = 2;
    double tol = 1e-6;
    std::size_t max_iter = 1000;
};

/// Mode functions F_1..F_m and the trend R with x = sum F_i + R.
struct Decomposition {
    std::vector<std::vector<double>> modes;
    std::vector<double> residual;
    std::size_t window = 0;
    std::vector<std::size_t> iterations_per_mode;

    std::size_t length() const { return residual.size(); }

    /// Component c in 0..m-1 is a mode function, c == m is the trend.
    std::span<const double> component(std::size_t c) const {
        return c < modes.size() ? std::span<const double>(modes[c]) : std::span<const double>(residual);
    }

    std::size_t component_count() const { return modes.size() + 1; }

    std::vector<double> reconstruct() const {
        std::vector<double> x = residual;
        for (const auto& f : modes)
            for (std::size_t t = 0; t < x.size(); ++t) x[t] += f[t];
        return x;
    }
};

inline Decomposition decompose(std::span<const double> x, const Mask& mask, std::size_t num_modes, double tol,
                               std::size_t max_iter) {
    detail::require_length(x.size(), mask.window());
    if (num_modes == 0) fail(ErrorKind::validation, "num_modes must be >= 1");
    Decomposition d;
    d.window = mask.window();
    std::vector<double> rest(x.begin(), x.end());
    for (std::size_t k = 0; k < num_modes; ++k) {
        auto m = extract_mode(rest, mask, tol, max_iter);
        for (std::size_t t = 0; t < rest.size(); ++t) rest[t] -= m.mode[t];
        d.iterations_per_mode.push_back(m.iterations);
        d.modes.push_back(std::move(m.mode));
    }
    d.residual = std::move(rest);
    return d;
}

inline Decomposition decompose(std::span<const double> x, const DecomposeOptions& opts = {}) {
    return decompose(x, Mask::fejer(opts.window), opts.num_modes, opts.tol, opts.max_iter);
}

}  // namespace icf
