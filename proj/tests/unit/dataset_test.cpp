#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "yoloea/dataset.hpp"
#include "yoloea/errors.hpp"

using namespace yoloea;

namespace {

std::size_t parse_error_line(std::string_view text, bool expect_conf)
{
    try {
        parse_labels(text, 100, 100, expect_conf);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

} // namespace

TEST(ParseLabels, Basic)
{
    const LabelFile f = parse_labels("0 0.5 0.5 0.5 0.5\n", 100, 100, false, "img");
    ASSERT_EQ(f.records.size(), 1u);
    EXPECT_EQ(f.records[0].class_id, 0);
    EXPECT_EQ(f.boxes()[0], (Box{25, 25, 75, 75}));
    EXPECT_EQ(f.image_id, "img");

    EXPECT_TRUE(parse_labels("", 100, 100, false).records.empty());
    EXPECT_TRUE(parse_labels("\n  \n\r\n", 100, 100, true).records.empty());
}

TEST(ParseLabels, NonSquareImageAndPredictions)
{
    const LabelFile f = parse_labels("2 0.25 0.5 0.5 1 0.75\r\n\n1\t0.5 0.5 0.1 0.1 1\n", 640, 480, true);
    ASSERT_EQ(f.records.size(), 2u);
    EXPECT_EQ(f.boxes()[0], (Box{0, 0, 320, 480}));
    const auto dets = f.detections();
    EXPECT_EQ(dets[0].class_id, 2);
    EXPECT_EQ(dets[0].confidence, 0.75);
    EXPECT_EQ(dets[1].confidence, 1.0);
}

TEST(ParseLabels, Errors)
{
    EXPECT_EQ(parse_error_line("0 0.5 0.5", false), 1u);
    EXPECT_EQ(parse_error_line("0 0.5 0.5 0.2 0.2\n\n0 0.5 x 0.2 0.2", false), 3u);
    EXPECT_EQ(parse_error_line("0 0.5 0.5 0.2 1.2", false), 1u);
    EXPECT_EQ(parse_error_line("0 0.5 0.5 0.2 0.2 0.9", false), 1u);
    EXPECT_EQ(parse_error_line("0 0.5 0.5 0.2 0.2", true), 1u);
    EXPECT_EQ(parse_error_line("0 0.5 0.5 0.2 0.2 1.5", true), 1u);
    EXPECT_EQ(parse_error_line("-1 0.5 0.5 0.2 0.2", false), 1u);
    EXPECT_EQ(parse_error_line("1.5 0.5 0.5 0.2 0.2", false), 1u);
    EXPECT_EQ(parse_error_line("0 nan 0.5 0.2 0.2", false), 1u);
    EXPECT_EQ(parse_error_line("0 0.1 0.5 0.4 0.2", false), 1u);  // x extent below 0
    EXPECT_EQ(parse_error_line("0 0.5 0.9 0.2 0.4", false), 1u);  // y extent above 1
    EXPECT_THROW(parse_labels("", 0, 10, false), std::invalid_argument);
}

TEST(ParseLabels, RoundTrip)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const bool preds = trial % 2 == 0;
        LabelFile f{"x", 640, 480, {}};
        for (int n = trial % 7; n > 0; --n) {
            LabelRecord r;
            r.class_id = cls(rng);
            r.w = u(rng);
            r.h = u(rng);
            r.cx = r.w / 2 + u(rng) * (1 - r.w);
            r.cy = r.h / 2 + u(rng) * (1 - r.h);
            if (preds)
                r.confidence = u(rng);
            f.records.push_back(r);
        }
        const std::string text = serialize_labels(f);
        const LabelFile again = parse_labels(text, 640, 480, preds, "x");
        ASSERT_EQ(again, f);
        ASSERT_EQ(serialize_labels(again), text);
    }
}

TEST(Manifest, Parse)
{
    const auto m = parse_manifest("image_id,width,height\na,640,480\n\n b , 10 , 20 \r\n");
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m[1].image_id, "b");
    EXPECT_EQ(m[1].height, 20);
    EXPECT_THROW(parse_manifest("a,640\n"), ParseError);
    EXPECT_THROW(parse_manifest("a,0,10\n"), ParseError);
    EXPECT_THROW(parse_manifest("a,1,1\na,2,2\n"), ParseError);
}

TEST(LoadLabelDir, ReadsManifestImagesAndRejectsStrays)
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "yoloea_dataset_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "a.txt") << "0 0.5 0.5 0.5 0.5\n";

    const std::vector<ManifestEntry> manifest{{"a", 100, 100}, {"b", 50, 50}};
    const auto files = load_label_dir(dir, manifest, false);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[0].records.size(), 1u);
    EXPECT_TRUE(files[1].records.empty());

    std::ofstream(dir / "stray.txt") << "";
    EXPECT_THROW(load_label_dir(dir, manifest, false), Error);
    fs::remove(dir / "stray.txt");

    std::ofstream(dir / "b.txt") << "0 0.5\n";
    EXPECT_THROW(load_label_dir(dir, manifest, false), ParseError);
    fs::remove_all(dir);
}

TEST(MakeSamples, PairsById)
{
    const LabelFile g{"a", 10, 10, {{0, 0.5, 0.5, 0.2, 0.2, std::nullopt}}};
    const LabelFile p{"a", 10, 10, {{0, 0.5, 0.5, 0.2, 0.2, 0.8}}};
    const auto s = make_samples({g}, {p});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].detections.size(), 1u);
    EXPECT_EQ(s[0].ground_truths.size(), 1u);
    EXPECT_THROW(make_samples({g}, {LabelFile{"zz", 10, 10, {}}}), Error);
}

TEST(Occlusion, HandCases)
{
    const Box unit{0, 0, 1, 1};
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit, {2, 2, 3, 3}}), 0.0);
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit}), 0.0);
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit, {-1, -1, 2, 2}}), 1.0);
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit, {0, 0, 0.5, 1}, {0, 0, 0.5, 1}}), 0.5);
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit, {0, 0, 0.5, 1}, {0.25, 0, 0.75, 1}}), 0.75);
    // Touching edges cover nothing.
    EXPECT_EQ(occlusion_fraction(0, std::vector<Box>{unit, {1, 0, 2, 1}}), 0.0);
}

TEST(Occlusion, Errors)
{
    EXPECT_THROW(occlusion_fraction(0, std::vector<Box>{{1, 1, 1, 3}}), DegenerateBoxError);
    EXPECT_THROW(occlusion_fraction(2, std::vector<Box>{{0, 0, 1, 1}}), std::out_of_range);
}

TEST(Occlusion, Classification)
{
    EXPECT_TRUE(classify_occluded(0.05));
    EXPECT_FALSE(classify_occluded(0.35));
    EXPECT_FALSE(classify_occluded(0.0));
    EXPECT_TRUE(classify_occluded(0.349999));
    EXPECT_FALSE(classify_occluded(0.049999));
    EXPECT_FALSE(classify_occluded(1.0));
}

TEST(OcclusionProperty, BoundedMonotoneAndInvariant)
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> count(1, 10);
    std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-50.0, 50.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Box> boxes;
        for (int n = count(rng); n > 0; --n)
            boxes.push_back(oracle::random_box(rng, 0.0, 10.0, 0.2));
        const double s = scale(rng), t = shift(rng);
        std::vector<Box> moved;
        for (const Box& b : boxes)
            moved.push_back({b.x_min * s + t, b.y_min * s + t, b.x_max * s + t, b.y_max * s + t});

        double prev = 0.0;
        for (std::size_t k = 1; k <= boxes.size(); ++k) {
            const std::vector<Box> prefix(boxes.begin(), boxes.begin() + static_cast<long>(k));
            const double f = occlusion_fraction(0, prefix);
            ASSERT_GE(f, 0.0);
            ASSERT_LE(f, 1.0);
            ASSERT_GE(f, prev - 1e-12);
            prev = f;
        }
        ASSERT_NEAR(occlusion_fraction(0, moved), occlusion_fraction(0, boxes), 1e-9);
    }
}

TEST(OcclusionProperty, AgreesWithMonteCarlo)
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Box> boxes;
        for (int n = 0; n < 6; ++n)
            boxes.push_back(oracle::random_box(rng, 0.0, 10.0, 0.5));
        EXPECT_NEAR(occlusion_fraction(0, boxes), oracle::occlusion_monte_carlo(0, boxes, 200000, 100 + trial), 5e-3);
    }
}

TEST(Summarize, Examples)
{
    const LabelFile disjoint{"a", 100, 100, {{0, 0.2, 0.2, 0.2, 0.2, {}}, {0, 0.7, 0.7, 0.2, 0.2, {}}}};
    DatasetSummary s = summarize({disjoint});
    EXPECT_EQ(s.classes.at(0).total, 2u);
    EXPECT_EQ(s.classes.at(0).occluded, 0u);

    // Class-1 box covers the right 10% of the class-0 box.
    const LabelFile tenth{"b", 100, 100, {{0, 0.5, 0.5, 0.4, 0.4, {}}, {1, 0.68, 0.5, 0.04, 0.4, {}}}};
    s = summarize({tenth});
    EXPECT_EQ(s.classes.at(0).occluded, 1u);
    EXPECT_EQ(s.classes.at(1).occluded, 0u);  // fully covered: fraction 1.0
    EXPECT_EQ(s.total, 2u);
    EXPECT_EQ(s.occluded, 1u);

    s = summarize({});
    EXPECT_EQ(s.total, 0u);
    EXPECT_TRUE(s.classes.empty());

    const LabelFile preds{"c", 10, 10, {{0, 0.5, 0.5, 0.2, 0.2, 0.5}}};
    EXPECT_THROW(summarize({preds}), Error);
    const LabelFile flat{"d", 10, 10, {{0, 0.5, 0.5, 0.0, 0.2, {}}}};
    EXPECT_THROW(summarize({flat}), DegenerateBoxError);
}
