#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "icf/analyze.hpp"
#include "icf/pipeline.hpp"
#include "icf/select.hpp"
#include "icf/synth.hpp"

namespace {

TEST(GenSubject, PlainGaussianMean) {
    const icf::SubjectProfile p{.base_mean = 0.8, .base_std = 0.05, .length = 20000};
    const auto ts = icf::gen_subject(p, 3);
    ASSERT_EQ(ts.values.size(), 20000u);
    const double se = 0.05 / std::sqrt(20000.0);
    EXPECT_NEAR(icf::stats::mean(ts.values), 0.8, 3.0 * se);
    EXPECT_NEAR(icf::stats::pstdev(ts.values), 0.05, 0.002);
}

TEST(GenSubject, BurstsSkewUpperTail) {
    const icf::SubjectProfile p{.base_mean = 0.8, .base_std = 0.05, .burst_rate = 10, .burst_magnitude = 4,
                                .length = 20000};
    const auto [up, lo] = icf::tail_counts(icf::gen_subject(p, 4).values);
    EXPECT_GT(up, lo);
}

TEST(GenSubject, DeterministicAndClipped) {
    const icf::SubjectProfile p{.base_mean = 0.3, .base_std = 0.2, .burst_rate = 5, .burst_magnitude = 2,
                                .slow_drift_amplitude = 0.1, .length = 5000};
    const auto a = icf::gen_subject(p, 9), b = icf::gen_subject(p, 9), c = icf::gen_subject(p, 10);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    for (double v : a.values) EXPECT_GE(v, icf::kMinInterval);
}

TEST(GenSubject, InvalidProfile) {
    EXPECT_THROW((void)icf::gen_subject({.base_mean = 0.0}, 1), icf::Error);
    EXPECT_THROW((void)icf::gen_subject({.base_std = -1.0}, 1), icf::Error);
}

TEST(GenCohort, CountsLabelsAndIds) {
    const auto c = icf::gen_cohort(10, 10, 1, 2000);
    ASSERT_EQ(c.subjects.size(), 20u);
    EXPECT_EQ(c.count(icf::Label::healthy), 10u);
    EXPECT_EQ(c.count(icf::Label::chf), 10u);
    EXPECT_EQ(c.subjects.front().id, "h0001");
    EXPECT_EQ(c.subjects.back().id, "c0010");
    EXPECT_THROW((void)icf::gen_cohort(0, 3, 1), icf::Error);
}

TEST(GenCohort, HealthyBeatsSlowerAndMoreIrregularly) {
    const auto c = icf::gen_cohort(30, 30, 2, 20000);
    const auto pts = icf::mean_variance_scatter(c);
    double mh = 0, mc = 0, vh = 0, vc = 0;
    for (const auto& p : pts) {
        (p.label == icf::Label::healthy ? mh : mc) += p.mean / 30.0;
        (p.label == icf::Label::healthy ? vh : vc) += p.variance / 30.0;
    }
    EXPECT_GT(mh, mc);
    EXPECT_GT(vh, vc);
}

TEST(GenCohort, PrefixStable) {
    // Subject i depends on (seed, i) only, so growing the cohort keeps earlier subjects.
    const auto a = icf::gen_cohort(3, 2, 5, 1000), b = icf::gen_cohort(3, 4, 5, 1000);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.subjects[i].values, b.subjects[i].values);
}

TEST(GenCohort, WriteAndReadBack) {
    const auto dir = std::filesystem::temp_directory_path() / "icf_synth_roundtrip";
    std::filesystem::remove_all(dir);
    const auto c = icf::gen_cohort(2, 2, 7, 500);
    icf::write_cohort(c, dir, "# seed=7\n");
    const auto back = icf::read_manifest(dir / "manifest.csv");
    ASSERT_EQ(back.subjects.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(back.subjects[i].id, c.subjects[i].id);
        EXPECT_EQ(back.subjects[i].label, c.subjects[i].label);
        for (std::size_t t = 0; t < 500; ++t)
            EXPECT_NEAR(back.subjects[i].values[t], c.subjects[i].values[t], 5e-12 * c.subjects[i].values[t]);
    }
    std::filesystem::remove_all(dir);
}

TEST(GenCohort, PipelineSeparatesSmallCohort) {
    icf::RunConfig cfg;
    cfg.splits = 30;
    cfg.train_healthy = 21;
    cfg.train_chf = 14;
    const auto m = icf::featurize_cohort(icf::gen_cohort(30, 20, 1, 20000), cfg);
    const auto res = icf::stability_rank(m, cfg.stability_options());
    EXPECT_GE(res.mean_accuracy(), 0.90);
}

}  // namespace
