#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "icf/ingest.hpp"
#include "icf/rng.hpp"

namespace fs = std::filesystem;

namespace {

class IngestFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("icf_ingest_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& body) {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << body;
        return p;
    }

    fs::path dir_;
};

TEST(ParseRr, PlainValues) {
    const auto ts = icf::parse_rr("0.8\n0.9\n1.1\n", "s");
    EXPECT_EQ(ts.values, (std::vector<double>{0.8, 0.9, 1.1}));
    EXPECT_EQ(ts.dropped, 0u);
}

TEST(ParseRr, NonPositiveDropped) {
    const auto ts = icf::parse_rr("0.8\n-1.0\n0.9\n", "s", {.max_drop_fraction = 0.5});
    EXPECT_EQ(ts.values, (std::vector<double>{0.8, 0.9}));
    EXPECT_EQ(ts.dropped, 1u);
}

TEST(ParseRr, CrlfAndBlankLines) {
    const auto ts = icf::parse_rr("0.8\r\n\r\n0.9\r\n\n", "s");
    EXPECT_EQ(ts.values, (std::vector<double>{0.8, 0.9}));
    EXPECT_EQ(ts.dropped, 0u);
}

TEST(ParseRr, HalfGarbageIsMalformed) {
    try {
        (void)icf::parse_rr("0.8\nabc\n0.9\nxyz\n", "s");
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::malformed_input);
    }
}

TEST(ParseRr, DropThresholdIsConfigurable) {
    std::string text;
    for (int i = 0; i < 19; ++i) text += "0.8\n";
    text += "0\n0\n";  // 2 of 21 lines, about 9.5%
    EXPECT_EQ(icf::parse_rr(text, "s").dropped, 2u);
    EXPECT_THROW((void)icf::parse_rr(text, "s", {.max_drop_fraction = 0.05}), icf::Error);
}

TEST(ParseRr, TrailingGarbageOnNumberIsRejected) {
    const auto ts = icf::parse_rr("0.8\n0.9s\n0.7\n0.7\n0.7\n0.7\n0.7\n0.7\n0.7\n0.7\n0.7\n", "s");
    EXPECT_EQ(ts.dropped, 1u);
    EXPECT_EQ(ts.values.size(), 10u);
}

TEST(ParseRr, Deterministic) {
    const std::string text = "0.81\n0.79\n1.02\n";
    EXPECT_EQ(icf::parse_rr(text, "a").values, icf::parse_rr(text, "a").values);
}

TEST(ParseRr, EmitterRoundTripTwelveDigits) {
    icf::Rng rng(4);
    icf::TimeSeries ts{"x", {}, std::nullopt, 0};
    for (int i = 0; i < 500; ++i) ts.values.push_back(0.3 + 1.5 * rng.uniform());
    const auto back = icf::parse_rr(icf::format_rr(ts), "x");
    ASSERT_EQ(back.values.size(), ts.values.size());
    for (std::size_t i = 0; i < ts.values.size(); ++i)
        EXPECT_NEAR(back.values[i], ts.values[i], 5e-12 * ts.values[i]);
}

TEST_F(IngestFiles, UnreadableFileIsIoError) {
    try {
        (void)icf::read_rr(dir_ / "nope.rr");
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::io);
    }
}

TEST_F(IngestFiles, ManifestLoadsInOrder) {
    write("a.rr", "0.8\n0.9\n");
    write("b.rr", "0.7\n0.6\n0.65\n");
    const auto m = write("m.csv", "id,path,label\nsB,b.rr,chf\nsA,a.rr,healthy\n");
    const auto c = icf::read_manifest(m);
    ASSERT_EQ(c.subjects.size(), 2u);
    EXPECT_EQ(c.subjects[0].id, "sB");
    EXPECT_EQ(c.subjects[0].label, icf::Label::chf);
    EXPECT_EQ(c.subjects[1].values, (std::vector<double>{0.8, 0.9}));
    EXPECT_EQ(c.provenance, m);
    EXPECT_TRUE(c.labeled());
}

TEST_F(IngestFiles, DuplicateIdIsValidationError) {
    write("a.rr", "0.8\n");
    const auto m = write("m.csv", "id,path,label\ns,a.rr,chf\ns,a.rr,healthy\n");
    try {
        (void)icf::read_manifest(m);
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::validation);
    }
}

TEST_F(IngestFiles, EmptyLabelIsAbsent) {
    write("a.rr", "0.8\n0.9\n");
    const auto c = icf::read_manifest(write("m.csv", "id,path,label\ns,a.rr,\n"));
    EXPECT_FALSE(c.subjects[0].label.has_value());
    EXPECT_FALSE(c.labeled());
    EXPECT_THROW(icf::require_both_classes(c), icf::Error);
}

TEST_F(IngestFiles, MissingReferencedFileNamesRow) {
    const auto m = write("m.csv", "id,path,label\ns,gone.rr,chf\n");
    try {
        (void)icf::read_manifest(m);
        FAIL();
    } catch (const icf::Error& e) {
        EXPECT_EQ(e.kind(), icf::ErrorKind::io);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
}

TEST_F(IngestFiles, BadHeaderAndLabelRejected) {
    write("a.rr", "0.8\n");
    EXPECT_THROW((void)icf::read_manifest(write("h.csv", "id,file,label\ns,a.rr,chf\n")), icf::Error);
    EXPECT_THROW((void)icf::read_manifest(write("l.csv", "id,path,label\ns,a.rr,sick\n")), icf::Error);
}

TEST(Cohort, ClassCounts) {
    icf::Cohort c;
    c.subjects.push_back({"a", {1.0}, icf::Label::healthy, 0});
    c.subjects.push_back({"b", {1.0}, icf::Label::healthy, 0});
    EXPECT_THROW(icf::require_both_classes(c), icf::Error);
    c.subjects.push_back({"c", {1.0}, icf::Label::chf, 0});
    EXPECT_NO_THROW(icf::require_both_classes(c));
    EXPECT_EQ(c.count(icf::Label::healthy), 2u);
}

}  // namespace
