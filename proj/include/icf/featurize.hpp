#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decompose.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace icf {

enum class Aggregator { whole, mean, q1, q3 };
enum class Statistic { mean, sigma };
enum class Threshold { zero, plus1, plus2, minus1, minus2 };
enum class Channel { self, maxima, minima };

inline constexpr std::array kAggregators{Aggregator::whole, Aggregator::mean, Aggregator::q1, Aggregator::q3};
inline constexpr std::array kStatistics{Statistic::mean, Statistic::sigma};
inline constexpr std::array kThresholds{Threshold::zero, Threshold::plus1, Threshold::plus2, Threshold::minus1,
                                        Threshold::minus2};
inline constexpr std::array kChannels{Channel::self, Channel::maxima, Channel::minima};

inline constexpr std::size_t kFeaturesPerComponent = 120;

/// Signed multiple of sigma: +1 means terms > m + sigma, -2 terms < m - 2 sigma.
constexpr int threshold_multiple(Threshold t) {
    switch (t) {
        case Threshold::zero: return 0;
        case Threshold::plus1: return 1;
        case Threshold::plus2: return 2;
        case Threshold::minus1: return -1;
        case Threshold::minus2: return -2;
    }
    return 0;
}

/// Mean and population std of the terms strictly beyond mean + v*sigma
/// (upper) or strictly below mean - v*sigma (lower). Missing when fewer than
/// two terms qualify.
struct TailMoments {
    double mean = 0.0;
    double sigma = 0.0;
};

inline std::optional<TailMoments> tail_moments(std::span<const double> x, double mean, double sigma, double v,
                                               bool upper) {
    const double cut = upper ? mean + v * sigma : mean - v * sigma;
    double s = 0.0;
    std::size_t n = 0;
    for (double t : x) {
        if (upper ? t > cut : t < cut) {
            s += t;
            ++n;
        }
    }
    if (n < 2) return std::nullopt;
    const double mu = s / static_cast<double>(n);
    double ss = 0.0;
    for (double t : x)
        if (upper ? t > cut : t < cut) ss += (t - mu) * (t - mu);
    return TailMoments{mu, std::sqrt(ss / static_cast<double>(n))};
}

/// The ten outlier statistics of one series: (m, sigma) of the whole series
/// and of each of the four tails.
struct OutlierStats {
    double m = 0.0;
    double sigma = 0.0;
    std::array<std::optional<TailMoments>, 4> tails;  // +1, +2, -1, -2

    std::optional<double> get(Statistic s, Threshold t) const {
        if (t == Threshold::zero) return s == Statistic::mean ? m : sigma;
        const auto& tail = tails[static_cast<std::size_t>(t) - 1];
        if (!tail) return std::nullopt;
        return s == Statistic::mean ? tail->mean : tail->sigma;
    }
};

inline OutlierStats outlier_stats(std::span<const double> x) {
    if (x.size() < 2) fail(ErrorKind::insufficient_data, "outlier statistics need at least 2 terms");
    OutlierStats o;
    o.m = stats::mean(x);
    o.sigma = stats::pstdev(x, o.m);
    for (std::size_t k = 0; k < 4; ++k) {
        const int j = threshold_multiple(kThresholds[k + 1]);
        o.tails[k] = tail_moments(x, o.m, o.sigma, std::abs(j), j > 0);
    }
    return o;
}

/// Values at strict local maxima (U) and minima (L), in time order. A flat run
/// bounded by strictly smaller (larger) neighbours counts once; runs touching
/// either end of the series never count.
struct Extrema {
    std::vector<double> maxima;
    std::vector<double> minima;
};

inline Extrema local_extrema(std::span<const double> x) {
    Extrema e;
    const std::size_t n = x.size();
    std::size_t s = 0;
    while (s < n) {
        std::size_t t = s;
        while (t + 1 < n && x[t + 1] == x[s]) ++t;
        if (s > 0 && t + 1 < n) {
            if (x[s - 1] < x[s] && x[t + 1] < x[s]) e.maxima.push_back(x[s]);
            else if (x[s - 1] > x[s] && x[t + 1] > x[s]) e.minima.push_back(x[s]);
        }
        s = t + 1;
    }
    return e;
}

inline constexpr std::size_t kMinBlockLength = 4;

/// K contiguous blocks of length floor(n/K); the tail remainder is dropped.
inline std::vector<std::span<const double>> split(std::span<const double> x, std::size_t k) {
    if (k == 0) fail(ErrorKind::validation, "subseries count must be >= 1");
    if (x.size() < k * kMinBlockLength)
        fail(ErrorKind::insufficient_data, "series of length " + std::to_string(x.size()) + " cannot be split into " +
                                               std::to_string(k) + " blocks of at least " +
                                               std::to_string(kMinBlockLength));
    const std::size_t len = x.size() / k;
    std::vector<std::span<const double>> blocks;
    blocks.reserve(k);
    for (std::size_t b = 0; b < k; ++b) blocks.push_back(x.subspan(b * len, len));
    return blocks;
}

/// Outlier statistics for the series itself and its maxima/minima channels.
/// A channel with fewer than two terms has every statistic missing.
struct ChannelStats {
    std::array<std::optional<OutlierStats>, 3> channel;

    std::optional<double> get(Statistic s, Threshold t, Channel c) const {
        const auto& o = channel[static_cast<std::size_t>(c)];
        return o ? o->get(s, t) : std::nullopt;
    }
};

inline ChannelStats channel_stats(std::span<const double> x) {
    ChannelStats cs;
    cs.channel[0] = outlier_stats(x);
    const auto ext = local_extrema(x);
    if (ext.maxima.size() >= 2) cs.channel[1] = outlier_stats(ext.maxima);
    if (ext.minima.size() >= 2) cs.channel[2] = outlier_stats(ext.minima);
    return cs;
}

inline std::vector<ChannelStats> subcomponent_stats(std::span<const double> component, std::size_t k) {
    std::vector<ChannelStats> out;
    for (auto block : split(component, k)) out.push_back(channel_stats(block));
    return out;
}

// ---------------------------------------------------------------------------
// Feature identifiers

/// Component index: 1..m for mode functions, 0 for the trend R.
struct ComponentRef {
    std::size_t mode = 0;

    static constexpr ComponentRef trend() { return {0}; }
    constexpr bool is_trend() const { return mode == 0; }

    /// Position in the canonical component order F_1..F_m, R.
    constexpr std::size_t order_key() const { return is_trend() ? static_cast<std::size_t>(-1) : mode; }
    friend constexpr bool operator==(ComponentRef, ComponentRef) = default;
};

struct FeatureId {
    Aggregator aggregator = Aggregator::whole;
    Statistic statistic = Statistic::mean;
    ComponentRef component;
    Threshold threshold = Threshold::zero;
    Channel channel = Channel::self;

    friend constexpr bool operator==(const FeatureId&, const FeatureId&) = default;
};

/// The 120 feature ids of one component in canonical order
/// (aggregator, statistic, threshold, channel).
inline std::vector<FeatureId> component_feature_ids(ComponentRef c) {
    std::vector<FeatureId> ids;
    ids.reserve(kFeaturesPerComponent);
    for (auto a : kAggregators)
        for (auto s : kStatistics)
            for (auto t : kThresholds)
                for (auto ch : kChannels) ids.push_back({a, s, c, t, ch});
    return ids;
}

/// Canonical id list for an m-mode decomposition: F_1..F_m then R.
inline std::vector<FeatureId> feature_ids(std::size_t num_modes) {
    std::vector<FeatureId> ids;
    for (std::size_t c = 1; c <= num_modes + 1; ++c) {
        auto part = component_feature_ids(c <= num_modes ? ComponentRef{c} : ComponentRef::trend());
        ids.insert(ids.end(), part.begin(), part.end());
    }
    return ids;
}

/// `<agg><stat>[<comp>,<thr>,<chan>]`, e.g. "msigma[2,+2,0]".
inline std::string feature_name(const FeatureId& id) {
    static constexpr std::array<std::string_view, 4> agg{"", "m", "q", "Q"};
    static constexpr std::array<std::string_view, 2> stat{"m", "sigma"};
    static constexpr std::array<std::string_view, 5> thr{"0", "+1", "+2", "-1", "-2"};
    static constexpr std::array<std::string_view, 3> chan{"0", "U", "L"};
    std::string s;
    s += agg[static_cast<std::size_t>(id.aggregator)];
    s += stat[static_cast<std::size_t>(id.statistic)];
    s += '[';
    s += id.component.is_trend() ? std::string("R") : std::to_string(id.component.mode);
    s += ',';
    s += thr[static_cast<std::size_t>(id.threshold)];
    s += ',';
    s += chan[static_cast<std::size_t>(id.channel)];
    s += ']';
    return s;
}

inline std::optional<FeatureId> parse_feature_name(std::string_view name) {
    const auto open = name.find('[');
    if (open == std::string_view::npos || name.empty() || name.back() != ']') return std::nullopt;
    FeatureId id;
    const auto head = name.substr(0, open);
    if (head == "m") id.aggregator = Aggregator::whole, id.statistic = Statistic::mean;
    else if (head == "sigma") id.aggregator = Aggregator::whole, id.statistic = Statistic::sigma;
    else if (head == "mm") id.aggregator = Aggregator::mean, id.statistic = Statistic::mean;
    else if (head == "msigma") id.aggregator = Aggregator::mean, id.statistic = Statistic::sigma;
    else if (head == "qm") id.aggregator = Aggregator::q1, id.statistic = Statistic::mean;
    else if (head == "qsigma") id.aggregator = Aggregator::q1, id.statistic = Statistic::sigma;
    else if (head == "Qm") id.aggregator = Aggregator::q3, id.statistic = Statistic::mean;
    else if (head == "Qsigma") id.aggregator = Aggregator::q3, id.statistic = Statistic::sigma;
    else return std::nullopt;

    auto body = name.substr(open + 1, name.size() - open - 2);
    const auto c1 = body.find(',');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = body.find(',', c1 + 1);
    if (c2 == std::string_view::npos || body.find(',', c2 + 1) != std::string_view::npos) return std::nullopt;
    const auto comp = body.substr(0, c1);
    const auto thr = body.substr(c1 + 1, c2 - c1 - 1);
    const auto chan = body.substr(c2 + 1);

    if (comp == "R") {
        id.component = ComponentRef::trend();
    } else {
        if (comp.empty() || comp.front() == '0') return std::nullopt;
        std::size_t v = 0;
        for (char ch : comp) {
            if (ch < '0' || ch > '9') return std::nullopt;
            v = v * 10 + static_cast<std::size_t>(ch - '0');
        }
        id.component = ComponentRef{v};
    }

    if (thr == "0") id.threshold = Threshold::zero;
    else if (thr == "+1") id.threshold = Threshold::plus1;
    else if (thr == "+2") id.threshold = Threshold::plus2;
    else if (thr == "-1") id.threshold = Threshold::minus1;
    else if (thr == "-2") id.threshold = Threshold::minus2;
    else return std::nullopt;

    if (chan == "0") id.channel = Channel::self;
    else if (chan == "U") id.channel = Channel::maxima;
    else if (chan == "L") id.channel = Channel::minima;
    else return std::nullopt;
    return id;
}

// ---------------------------------------------------------------------------
// Feature computation

inline std::optional<double> aggregate(Aggregator a, const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    switch (a) {
        case Aggregator::mean: return stats::mean(values);
        case Aggregator::q1: return stats::quantile(values, 0.25);
        case Aggregator::q3: return stats::quantile(values, 0.75);
        case Aggregator::whole: break;
    }
    return std::nullopt;
}

/// 120 values for one component in component_feature_ids order: 30 whole-series
/// statistics, then mean / q1 / q3 of each over the K blocks (missing skipped).
inline std::vector<std::optional<double>> component_features(std::span<const double> component, std::size_t k) {
    const auto blocks = subcomponent_stats(component, k);
    const auto whole = channel_stats(component);
    std::vector<std::optional<double>> out;
    out.reserve(kFeaturesPerComponent);
    std::vector<double> vals;
    for (auto a : kAggregators)
        for (auto s : kStatistics)
            for (auto t : kThresholds)
                for (auto ch : kChannels) {
                    if (a == Aggregator::whole) {
                        out.push_back(whole.get(s, t, ch));
                        continue;
                    }
                    vals.clear();
                    for (const auto& b : blocks)
                        if (auto v = b.get(s, t, ch)) vals.push_back(*v);
                    out.push_back(aggregate(a, vals));
                }
    return out;
}

struct FeatureVector {
    std::string subject;
    std::vector<FeatureId> ids;
    std::vector<std::optional<double>> values;
};

inline FeatureVector featurize_subject(std::string subject, const Decomposition& d, std::size_t k) {
    FeatureVector fv;
    fv.subject = std::move(subject);
    fv.ids = feature_ids(d.modes.size());
    fv.values.reserve(fv.ids.size());
    for (std::size_t c = 0; c < d.component_count(); ++c) {
        std::vector<std::optional<double>> part;
        try {
            part = component_features(d.component(c), k);
        } catch (const Error& e) {
            const std::string which = c < d.modes.size() ? "F" + std::to_string(c + 1) : std::string("R");
            throw Error(e.kind(), "component " + which + ": " + e.what());
        }
        fv.values.insert(fv.values.end(), part.begin(), part.end());
    }
    return fv;
}

}  // namespace icf
