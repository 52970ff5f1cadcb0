#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "feature_matrix.hpp"
#include "rng.hpp"

namespace icf {

// ---------------------------------------------------------------------------
// Linear soft-margin SVM
//
// Minimizes (1/2)||w||^2 + C sum_i max(0, 1 - y_i (w.x_i + b)) through its dual
//   min_a (1/2) a'Qa - e'a,  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j x_i.x_j
// with SMO using second-order working-set selection. w = sum a_i y_i x_i.

struct SvmOptions {
    double C = 1.0;
    double eps = 1e-9;  ///< maximal KKT violation at termination
    std::size_t max_iter = 10'000'000;
};

struct DualSolution {
    std::vector<double> alpha;
    double bias = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

inline void require_two_classes(std::span<const int> y) {
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == -1) neg = true;
        else fail(ErrorKind::validation, "labels must be +1 or -1");
    }
    if (!pos || !neg) fail(ErrorKind::validation, "training data must contain both classes");
}

inline Matrix gram(const Matrix& x) {
    Matrix k(x.rows, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = i; j < x.rows; ++j) {
            double s = 0.0;
            for (std::size_t f = 0; f < x.cols; ++f) s += x(i, f) * x(j, f);
            k(i, j) = k(j, i) = s;
        }
    return k;
}

/// Midpoint of the set of b minimizing sum_i max(0, 1 - y_i (f_i + b)).
/// Every breakpoint y_i - f_i raises the slope by one, starting from minus
/// the number P of positive labels, so the minimizers are the P-th and
/// (P+1)-th smallest breakpoints and everything between.
inline double hinge_bias_midpoint(std::span<const double> f, std::span<const int> y) {
    std::vector<double> p(y.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        p[i] = y[i] - f[i];
        pos += y[i] == 1;
    }
    std::sort(p.begin(), p.end());
    return 0.5 * (p[pos - 1] + p[pos]);
}

}  // namespace detail

/// SMO on a precomputed linear-kernel Gram matrix.
inline DualSolution solve_svm_dual(const Matrix& k, std::span<const int> y, const SvmOptions& opts) {
    detail::require_two_classes(y);
    const std::size_t n = y.size();
    const double c = opts.C;
    constexpr double tau = 1e-12;
    std::vector<double> a(n, 0.0), g(n, -1.0);
    auto upper = [&](std::size_t t) { return a[t] >= c; };
    auto lower = [&](std::size_t t) { return a[t] <= 0.0; };
    auto q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * k(i, j); };

    DualSolution sol;
    for (; sol.iterations < opts.max_iter; ++sol.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (!upper(t) && -g[t] >= gmax) gmax = -g[t], i = t;
            } else if (!lower(t) && g[t] >= gmax) {
                gmax = g[t], i = t;
            }
        }
        if (i == n) break;
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            double diff = 0.0;
            if (y[t] == 1) {
                if (lower(t)) continue;
                diff = gmax + g[t];
                gmax2 = std::max(gmax2, g[t]);
            } else {
                if (upper(t)) continue;
                diff = gmax - g[t];
                gmax2 = std::max(gmax2, -g[t]);
            }
            if (diff > 0.0) {
                double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
                if (quad <= 0.0) quad = tau;
                const double obj = -(diff * diff) / quad;
                if (obj <= best) best = obj, j = t;
            }
        }
        if (gmax + gmax2 < opts.eps || j == n) break;

        const double ai = a[i], aj = a[j];
        double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if (quad <= 0.0) quad = tau;
        if (y[i] != y[j]) {
            const double delta = (-g[i] - g[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) a[j] = 0.0, a[i] = diff;
            } else if (a[i] < 0.0) {
                a[i] = 0.0, a[j] = -diff;
            }
            if (diff > 0.0) {
                if (a[i] > c) a[i] = c, a[j] = c - diff;
            } else if (a[j] > c) {
                a[j] = c, a[i] = c + diff;
            }
        } else {
            const double delta = (g[i] - g[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) a[i] = c, a[j] = sum - c;
            } else if (a[j] < 0.0) {
                a[j] = 0.0, a[i] = sum;
            }
            if (sum > c) {
                if (a[j] > c) a[j] = c, a[i] = sum - c;
            } else if (a[i] < 0.0) {
                a[i] = 0.0, a[j] = sum;
            }
        }
        const double di = a[i] - ai, dj = a[j] - aj;
        for (std::size_t t = 0; t < n; ++t) g[t] += q(i, t) * di + q(j, t) * dj;
    }

    // b: middle of every bias optimal for this w. With free support vectors
    // the set is a single point; otherwise it is an interval.
    std::vector<double> f(n);
    for (std::size_t t = 0; t < n; ++t) f[t] = y[t] * (g[t] + 1.0);
    sol.bias = detail::hinge_bias_midpoint(f, y);
    sol.alpha = std::move(a);
    return sol;
}

/// Trained weights over the columns they were fitted on, plus the optional
/// scaler and feature names that make the model usable on raw features.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double C = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::string> features;
    Scaler scaler;

    double decision(std::span<const double> standardized) const {
        double s = bias;
        for (std::size_t f = 0; f < weights.size(); ++f) s += weights[f] * standardized[f];
        return s;
    }
};

inline double hinge_objective(const Matrix& x, std::span<const int> y, std::span<const double> w, double b, double c) {
    double obj = 0.0;
    for (double v : w) obj += 0.5 * v * v;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double s = b;
        for (std::size_t f = 0; f < x.cols; ++f) s += w[f] * x(i, f);
        obj += c * std::max(0.0, 1.0 - y[i] * s);
    }
    return obj;
}

inline std::vector<double> primal_weights(const Matrix& x, std::span<const int> y, std::span<const double> alpha) {
    std::vector<double> w(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        if (alpha[i] == 0.0) continue;
        const double s = alpha[i] * y[i];
        for (std::size_t f = 0; f < x.cols; ++f) w[f] += s * x(i, f);
    }
    return w;
}

/// The solver is deterministic; the seed is carried for provenance.
inline LinearModel train_linear_svm(const Matrix& x, std::span<const int> y, double c, std::uint64_t seed = 0) {
    if (x.rows != y.size()) fail(ErrorKind::validation, "row count and label count differ");
    if (!(c > 0.0)) fail(ErrorKind::validation, "C must be positive");
    const auto sol = solve_svm_dual(detail::gram(x), y, {.C = c});
    LinearModel m;
    m.weights = primal_weights(x, y, sol.alpha);
    m.bias = sol.bias;
    m.C = c;
    m.seed = seed;
    return m;
}

// ---------------------------------------------------------------------------
// Recursive feature elimination

struct RfeOptions {
    double C = 1.0;
    std::size_t step = 1;  ///< features removed per round; 1 = classic SVM-RFE
};

/// Ranks the columns of x, best first: element 0 is the last survivor. Each
/// round retrains on the survivors and drops the smallest |w| (ties: lower
/// column index first).
inline std::vector<std::size_t> svm_rfe(const Matrix& x, std::span<const int> y, const RfeOptions& opts = {}) {
    if (x.cols == 0) fail(ErrorKind::validation, "no features to rank");
    detail::require_two_classes(y);
    const std::size_t step = std::max<std::size_t>(1, opts.step);
    std::vector<std::size_t> alive(x.cols);
    std::iota(alive.begin(), alive.end(), 0);
    std::vector<std::size_t> eliminated;
    Matrix k = detail::gram(x);
    const SvmOptions svm{.C = opts.C};

    while (alive.size() > 1) {
        const auto sol = solve_svm_dual(k, y, svm);
        std::vector<std::pair<double, std::size_t>> score;
        score.reserve(alive.size());
        for (auto f : alive) {
            double w = 0.0;
            for (std::size_t i = 0; i < x.rows; ++i) w += sol.alpha[i] * y[i] * x(i, f);
            score.emplace_back(std::abs(w), f);
        }
        std::sort(score.begin(), score.end());
        const std::size_t drop = std::min(step, alive.size() - 1);
        for (std::size_t d = 0; d < drop; ++d) {
            const auto f = score[d].second;
            eliminated.push_back(f);
            for (std::size_t i = 0; i < x.rows; ++i)
                for (std::size_t j = 0; j < x.rows; ++j) k(i, j) -= x(i, f) * x(j, f);
            alive.erase(std::find(alive.begin(), alive.end(), f));
        }
    }
    eliminated.push_back(alive.front());
    std::reverse(eliminated.begin(), eliminated.end());
    return eliminated;
}

// ---------------------------------------------------------------------------
// Fitting on a FeatureMatrix and prediction

/// Variance filter is not applied here; `columns` is taken as given.
inline LinearModel fit_model(const FeatureMatrix& m, std::span<const std::size_t> rows,
                             std::span<const std::size_t> columns, double c, std::uint64_t seed = 0) {
    const auto scaler = fit_scaler(m, rows, columns);
    const auto z = standardize(m, scaler, rows, columns);
    std::vector<int> y;
    for (auto r : rows) y.push_back(m.sign(r));
    auto model = train_linear_svm(z.x, y, c, seed);
    model.scaler = scaler;
    for (auto col : columns) model.features.push_back(m.names[col]);
    return model;
}

struct Prediction {
    int label = 1;  ///< +1 chf, -1 healthy; a zero margin maps to +1
    double margin = 0.0;
};

/// Raw feature values keyed by the model's feature names. A name absent from
/// the vector is an error; a present-but-missing value is imputed as 0 after
/// scaling, as in training.
inline Prediction predict(const LinearModel& model, const FeatureVector& fv) {
    std::vector<double> z(model.features.size(), 0.0);
    for (std::size_t j = 0; j < model.features.size(); ++j) {
        const auto want = parse_feature_name(model.features[j]);
        std::size_t pos = fv.ids.size();
        for (std::size_t p = 0; p < fv.ids.size(); ++p)
            if (want && fv.ids[p] == *want) {
                pos = p;
                break;
            }
        if (pos == fv.ids.size())
            fail(ErrorKind::validation, fv.subject + ": missing required feature " + model.features[j]);
        if (fv.values[pos]) z[j] = model.scaler.apply(j, *fv.values[pos]);
    }
    Prediction p;
    p.margin = model.decision(z);
    p.label = p.margin >= 0.0 ? 1 : -1;
    return p;
}

// ---------------------------------------------------------------------------
// Repeated-split stability ranking

struct StabilityOptions {
    std::size_t splits = 1000;
    std::size_t train_healthy = 50;
    std::size_t train_chf = 30;
    double C = 1.0;
    std::uint64_t seed = 0;
    std::size_t top_k = 10;
    double variance_eps = 1e-8;
    std::size_t rfe_step = 1;
};

struct RepeatRecord {
    std::vector<std::size_t> top;  ///< column indices, best first
    std::size_t errors = 0;
    std::size_t test_size = 0;
};

struct RankResult {
    std::vector<std::string> names;
    std::vector<std::size_t> frequency;   ///< appearances in per-split top-k
    std::vector<double> mean_rank;        ///< mean RFE rank; filtered columns count as last
    std::vector<std::size_t> order;       ///< consensus ranking, best first (a permutation)
    std::map<std::size_t, std::size_t> error_histogram;  ///< test errors -> repeats
    std::vector<RepeatRecord> repeats;

    double mean_accuracy() const {
        double acc = 0.0;
        for (const auto& r : repeats)
            acc += r.test_size ? 1.0 - static_cast<double>(r.errors) / static_cast<double>(r.test_size) : 1.0;
        return repeats.empty() ? 0.0 : acc / static_cast<double>(repeats.size());
    }
};

/// One stratified split: the first train_* members of each shuffled class
/// train, the rest test.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(const FeatureMatrix& m,
                                                                                      std::size_t train_healthy,
                                                                                      std::size_t train_chf, Rng& rng) {
    std::vector<std::size_t> healthy, chf;
    for (std::size_t r = 0; r < m.rows(); ++r) (m.sign(r) > 0 ? chf : healthy).push_back(r);
    if (train_healthy > healthy.size() || train_chf > chf.size())
        fail(ErrorKind::validation, "train counts (" + std::to_string(train_healthy) + " healthy, " +
                                        std::to_string(train_chf) + " chf) exceed class sizes (" +
                                        std::to_string(healthy.size()) + ", " + std::to_string(chf.size()) + ")");
    if (train_healthy == 0 || train_chf == 0) fail(ErrorKind::validation, "each class needs at least one training subject");
    rng.shuffle(healthy.begin(), healthy.end());
    rng.shuffle(chf.begin(), chf.end());
    std::vector<std::size_t> train(healthy.begin(), healthy.begin() + static_cast<std::ptrdiff_t>(train_healthy));
    train.insert(train.end(), chf.begin(), chf.begin() + static_cast<std::ptrdiff_t>(train_chf));
    std::vector<std::size_t> test(healthy.begin() + static_cast<std::ptrdiff_t>(train_healthy), healthy.end());
    test.insert(test.end(), chf.begin() + static_cast<std::ptrdiff_t>(train_chf), chf.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

/// Runs one split: variance filter and scaling on train, RFE, then a model on
/// the top-k columns scored on the test rows.
inline RepeatRecord run_repeat(const FeatureMatrix& m, const StabilityOptions& opts, std::size_t repeat,
                               std::vector<std::size_t>* full_rank = nullptr) {
    Rng rng(derive_seed(opts.seed, "rank", repeat));
    const auto [train, test] = stratified_split(m, opts.train_healthy, opts.train_chf, rng);
    const auto kept = variance_filter(m, train, opts.variance_eps);
    const auto scaler = fit_scaler(m, train, kept);
    const auto z = standardize(m, scaler, train, kept);
    std::vector<int> y;
    for (auto r : train) y.push_back(m.sign(r));
    const auto ranked = svm_rfe(z.x, y, {.C = opts.C, .step = opts.rfe_step});

    RepeatRecord rec;
    const std::size_t k = std::min(opts.top_k, ranked.size());
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < k; ++i) top.push_back(kept[ranked[i]]);
    rec.top = top;
    if (full_rank) {
        full_rank->clear();
        for (auto r : ranked) full_rank->push_back(kept[r]);
    }

    const auto model = fit_model(m, train, top, opts.C, derive_seed(opts.seed, "rank", repeat));
    const auto zt = standardize(m, model.scaler, test, top);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double margin = model.decision(zt.x.row(i));
        const int label = margin >= 0.0 ? 1 : -1;
        rec.errors += (label != m.sign(test[i]));
    }
    rec.test_size = test.size();
    return rec;
}

inline RankResult stability_rank(const FeatureMatrix& m, const StabilityOptions& opts) {
    if (opts.splits == 0) fail(ErrorKind::validation, "splits must be >= 1");
    RankResult res;
    res.names = m.names;
    const std::size_t d = m.cols();
    res.frequency.assign(d, 0);
    std::vector<double> rank_sum(d, 0.0);
    std::vector<std::size_t> full;
    for (std::size_t s = 0; s < opts.splits; ++s) {
        auto rec = run_repeat(m, opts, s, &full);
        for (auto c : rec.top) ++res.frequency[c];
        std::vector<double> r(d, static_cast<double>(d));
        for (std::size_t i = 0; i < full.size(); ++i) r[full[i]] = static_cast<double>(i + 1);
        for (std::size_t c = 0; c < d; ++c) rank_sum[c] += r[c];
        ++res.error_histogram[rec.errors];
        res.repeats.push_back(std::move(rec));
    }
    res.mean_rank.resize(d);
    for (std::size_t c = 0; c < d; ++c) res.mean_rank[c] = rank_sum[c] / static_cast<double>(opts.splits);
    res.order.resize(d);
    std::iota(res.order.begin(), res.order.end(), 0);
    std::stable_sort(res.order.begin(), res.order.end(), [&](std::size_t a, std::size_t b) {
        if (res.frequency[a] != res.frequency[b]) return res.frequency[a] > res.frequency[b];
        return res.mean_rank[a] < res.mean_rank[b];
    });
    return res;
}

// ---------------------------------------------------------------------------
// Output formats

inline std::string format_ranking(const RankResult& r, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "feature,rank,frequency\n";
    for (std::size_t i = 0; i < r.order.size(); ++i) {
        const auto c = r.order[i];
        out += io::csv_field(r.names[c]) + "," + std::to_string(i + 1) + "," + std::to_string(r.frequency[c]) + "\n";
    }
    return out;
}

inline std::string format_error_histogram(const RankResult& r, std::string_view header_comment = {}) {
    std::string out(header_comment);
    out += "errors,repeats\n";
    for (const auto& [errors, repeats] : r.error_histogram)
        out += std::to_string(errors) + "," + std::to_string(repeats) + "\n";
    return out;
}

/// Line-oriented `key value...` text:
///   format icf-linear-model 1 / C / seed / bias / feature <name> <mean> <sd> <weight>
inline std::string format_model(const LinearModel& m) {
    std::string out = "format icf-linear-model 1\n";
    out += "C " + io::format_double(m.C, 17) + "\n";
    out += "seed " + std::to_string(m.seed) + "\n";
    out += "bias " + io::format_double(m.bias, 17) + "\n";
    for (std::size_t j = 0; j < m.features.size(); ++j)
        out += "feature " + m.features[j] + " " + io::format_double(m.scaler.mean[j], 17) + " " +
               io::format_double(m.scaler.sd[j], 17) + " " + io::format_double(m.weights[j], 17) + "\n";
    return out;
}

inline LinearModel parse_model(std::string_view text) {
    LinearModel m;
    bool format_ok = false;
    auto bad = [](const std::string& why) { fail(ErrorKind::malformed_input, "model file: " + why); };
    for (auto raw : io::lines(text)) {
        const auto line = io::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> tok;
        std::size_t s = 0;
        while (s < line.size()) {
            auto e = line.find(' ', s);
            if (e == std::string_view::npos) e = line.size();
            if (e > s) tok.push_back(line.substr(s, e - s));
            s = e + 1;
        }
        auto num = [&](std::size_t i) {
            auto v = io::parse_double(tok.at(i));
            if (!v) bad("bad number in line: " + std::string(line));
            return *v;
        };
        if (tok[0] == "format") {
            if (tok.size() != 3 || tok[1] != "icf-linear-model" || tok[2] != "1") bad("unsupported format");
            format_ok = true;
        } else if (tok[0] == "C" && tok.size() == 2) {
            m.C = num(1);
        } else if (tok[0] == "seed" && tok.size() == 2) {
            m.seed = std::stoull(std::string(tok[1]));
        } else if (tok[0] == "bias" && tok.size() == 2) {
            m.bias = num(1);
        } else if (tok[0] == "feature" && tok.size() == 5) {
            if (!parse_feature_name(tok[1])) bad("bad feature name " + std::string(tok[1]));
            m.features.emplace_back(tok[1]);
            m.scaler.mean.push_back(num(2));
            m.scaler.sd.push_back(num(3));
            m.weights.push_back(num(4));
        } else {
            bad("unrecognized line: " + std::string(line));
        }
    }
    if (!format_ok) bad("missing format line");
    if (m.features.empty()) bad("no features");
    return m;
}

}  // namespace icf
