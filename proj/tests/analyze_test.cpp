#include <gtest/gtest.h>

#include <cmath>

#include "icf/analyze.hpp"
#include "icf/rng.hpp"

namespace {

using icf::Label;

std::vector<Label> alternating(std::size_t n) {
    std::vector<Label> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = i % 2 ? Label::chf : Label::healthy;
    return l;
}

// r_pb = (M1 - M0) / s * sqrt(p q), population s.
double textbook_point_biserial(const std::vector<double>& v, const std::vector<Label>& l) {
    double s1 = 0, s0 = 0, n1 = 0, n0 = 0, all = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        all += v[i];
        if (l[i] == Label::chf) s1 += v[i], ++n1;
        else s0 += v[i], ++n0;
    }
    const double n = n1 + n0, mu = all / n;
    double ss = 0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return (s1 / n1 - s0 / n0) / std::sqrt(ss / n) * std::sqrt(n1 / n * n0 / n);
}

TEST(PointBiserial, PerfectAssociation) {
    const auto l = alternating(10);
    std::vector<double> v;
    for (auto x : l) v.push_back(x == Label::chf ? 1.0 : 0.0);
    EXPECT_NEAR(icf::point_biserial(v, l), 1.0, 1e-15);
    for (auto& x : v) x = -3.0 * x;
    EXPECT_NEAR(icf::point_biserial(v, l), -1.0, 1e-15);
}

TEST(PointBiserial, MatchesTextbookFormula) {
    icf::Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> v;
        std::vector<Label> l;
        for (int i = 0; i < 40 + rep; ++i) {
            l.push_back(rng.uniform() < 0.4 ? Label::chf : Label::healthy);
            v.push_back(rng.normal() + (l.back() == Label::chf ? 0.7 : 0.0));
        }
        EXPECT_NEAR(icf::point_biserial(v, l), textbook_point_biserial(v, l), 1e-12);
    }
}

TEST(PointBiserial, IndependentLabelsGiveSmallR) {
    icf::Rng rng(2);
    std::vector<double> v;
    std::vector<Label> l;
    for (int i = 0; i < 10000; ++i) {
        v.push_back(rng.normal());
        l.push_back(rng.uniform() < 0.5 ? Label::chf : Label::healthy);
    }
    EXPECT_LT(std::abs(icf::point_biserial(v, l)), 0.05);
}

TEST(PointBiserial, AffineInvariance) {
    icf::Rng rng(3);
    const auto l = alternating(50);
    std::vector<double> v, w;
    for (std::size_t i = 0; i < 50; ++i) v.push_back(rng.normal() + static_cast<double>(l[i]));
    for (double x : v) w.push_back(4.5 * x - 12.0);
    EXPECT_NEAR(icf::point_biserial(v, l), icf::point_biserial(w, l), 1e-12);
}

TEST(PointBiserial, Errors) {
    const auto l = alternating(6);
    try {
        (void)icf::point_biserial(std::vector<double>(6, 1.0), l);
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::undefined_correlation);
    }
    try {
        (void)icf::point_biserial(std::vector<double>{1, 2, 3}, std::vector<Label>(3, Label::chf));
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::validation);
    }
    EXPECT_FALSE(icf::try_point_biserial(std::vector<double>{1, 2}, alternating(2)).has_value());
}

TEST(TailCounts, GaussianTwoSigmaFraction) {
    icf::Rng rng(4);
    std::vector<double> x(1'000'000);
    for (auto& v : x) v = rng.normal();
    const auto [up, lo] = icf::tail_counts(x);
    const double ref = icf::stats::gaussian_two_sigma_tail();
    EXPECT_NEAR(ref, 0.02275, 1e-5);
    EXPECT_NEAR(static_cast<double>(up) / 1e6, ref, 0.0015);
    EXPECT_NEAR(static_cast<double>(lo) / 1e6, ref, 0.0015);
}

icf::DecomposedSubject subject(std::string id, Label label, std::vector<double> mode) {
    icf::Decomposition d;
    d.residual.assign(mode.size(), 0.0);
    d.modes.push_back(std::move(mode));
    return {std::move(id), label, std::move(d)};
}

TEST(OutlierBalance, SpikesRaiseUpperFraction) {
    icf::Rng rng(5);
    std::vector<icf::DecomposedSubject> s;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> x(5000);
        for (auto& v : x) v = rng.normal();
        if (i % 2) {
            for (std::size_t t = 0; t < x.size(); t += 40) x[t] += 6.0;
        }
        s.push_back(subject("s" + std::to_string(i), i % 2 ? Label::chf : Label::healthy, x));
    }
    const auto b = icf::outlier_balance(s, 0);
    ASSERT_EQ(b.classes.size(), 2u);
    EXPECT_EQ(b.classes[0].label, Label::healthy);
    EXPECT_NEAR(b.classes[0].upper, b.reference, 0.004);
    EXPECT_NEAR(b.classes[0].lower, b.reference, 0.004);
    EXPECT_GT(b.classes[1].upper, b.classes[1].lower + 0.01);
    EXPECT_EQ(b.classes[1].terms, 15000u);
    const auto csv = icf::format_balance(b);
    EXPECT_EQ(csv.rfind("class,upper,lower,reference\nhealthy,", 0), 0u);
}

std::vector<icf::DecomposedSubject> random_cohort(std::size_t n, std::size_t len, double chf_tail_boost,
                                                  std::uint64_t seed) {
    icf::Rng rng(seed);
    std::vector<icf::DecomposedSubject> s;
    for (std::size_t i = 0; i < n; ++i) {
        const Label l = rng.uniform() < 0.5 ? Label::chf : Label::healthy;
        std::vector<double> x(len);
        for (auto& v : x) {
            v = rng.normal();
            if (l == Label::healthy && v > 1.5) v *= 1.0 + chf_tail_boost * rng.uniform();
        }
        s.push_back(subject("s" + std::to_string(i), l, x));
    }
    return s;
}

TEST(OrderStatistics, SingleBlockIsWholeSeriesCorrelation) {
    const auto s = random_cohort(40, 300, 0.5, 6);
    const auto curves = icf::order_stat_correlations(s, 0, icf::Threshold::plus1, 1);
    std::vector<double> m, sg;
    std::vector<Label> l;
    for (const auto& d : s) {
        const auto o = icf::outlier_stats(d.decomposition.modes[0]);
        m.push_back(*o.get(icf::Statistic::mean, icf::Threshold::plus1));
        sg.push_back(*o.get(icf::Statistic::sigma, icf::Threshold::plus1));
        l.push_back(d.label);
    }
    ASSERT_EQ(curves.means.r.size(), 1u);
    EXPECT_NEAR(*curves.means.r[0], icf::point_biserial(m, l), 1e-12);
    EXPECT_NEAR(*curves.sigmas.r[0], icf::point_biserial(sg, l), 1e-12);
}

TEST(OrderStatistics, RandomLabelsStayNearZero) {
    const auto s = random_cohort(120, 400, 0.0, 7);
    const auto curves = icf::order_stat_correlations(s, 0, icf::Threshold::plus2, 4);
    ASSERT_EQ(curves.sigmas.x, (std::vector<double>{1, 2, 3, 4}));
    for (const auto& r : curves.sigmas.r) {
        ASSERT_TRUE(r.has_value());
        EXPECT_LT(std::abs(*r), 0.35);
    }
}

TEST(OrderStatistics, PlantedTailEffectIsDetected) {
    const auto s = random_cohort(80, 400, 1.0, 8);
    const auto curves = icf::order_stat_correlations(s, 0, icf::Threshold::plus2, 4);
    for (const auto& r : curves.sigmas.r) EXPECT_LT(*r, -0.5);  // healthy has the wider upper tail
}

TEST(VSweep, TwoSigmaPointMatchesMsigmaFeature) {
    const auto s = random_cohort(50, 600, 0.6, 9);
    const std::size_t k = 6;
    std::vector<double> feature;
    std::vector<Label> l;
    const icf::FeatureId id{icf::Aggregator::mean, icf::Statistic::sigma, {1}, icf::Threshold::plus2,
                            icf::Channel::self};
    const auto ids = icf::component_feature_ids({1});
    const auto pos = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    for (const auto& d : s) {
        const auto f = icf::component_features(d.decomposition.modes[0], k);
        feature.push_back(*f[pos]);
        l.push_back(d.label);
    }
    const std::vector<double> grid{0.0, 1.0, 2.0};
    const auto c = icf::v_sweep(s, 0, grid, k);
    ASSERT_EQ(c.r.size(), 3u);
    EXPECT_NEAR(*c.r[2], icf::point_biserial(feature, l), 1e-9);
}

TEST(VSweep, DefaultGrid) {
    const auto g = icf::default_v_grid();
    ASSERT_EQ(g.size(), 21u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 2.0);
    EXPECT_NEAR(g[1], 0.1, 1e-15);
}

TEST(Scatter, MeanAndPopulationVariance) {
    icf::Cohort c;
    c.subjects.push_back({"a", {1.0, 2.0, 3.0, 4.0}, Label::chf, 0});
    const auto p = icf::mean_variance_scatter(c);
    EXPECT_DOUBLE_EQ(p[0].mean, 2.5);
    EXPECT_DOUBLE_EQ(p[0].variance, 1.25);
    EXPECT_EQ(icf::format_scatter(p), "id,mean,variance,label\na,2.5,1.25,1\n");
}

}  // namespace
