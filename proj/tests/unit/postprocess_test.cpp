#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "yoloea/postprocess.hpp"

using namespace yoloea;

namespace {

std::vector<Detection> random_detections(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_int_distribution<int> cls(0, 2);
    // Coarse confidences force plenty of ties.
    std::uniform_int_distribution<int> conf(0, 10);
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < n; ++i)
        dets.push_back({cls(rng), conf(rng) / 10.0, oracle::random_box(rng, 0.0, 30.0, 1.0)});
    return dets;
}

} // namespace

TEST(ConfidenceFilter, Examples)
{
    const std::vector<Detection> dets{{0, 0.9, {0, 0, 1, 1}}, {0, 0.3, {0, 0, 1, 1}}, {1, 0.5, {0, 0, 1, 1}}};
    EXPECT_EQ(confidence_filter(dets, 0.0), dets);
    const auto kept = confidence_filter(dets, 0.5);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].confidence, 0.9);
    EXPECT_EQ(kept[1].confidence, 0.5);

    const std::vector<Detection> with_one{{0, 1.0, {0, 0, 1, 1}}, {0, 0.99, {0, 0, 1, 1}}};
    EXPECT_EQ(confidence_filter(with_one, 1.0).size(), 1u);
}

TEST(Nms, Examples)
{
    const Box b{10, 10, 20, 20};
    EXPECT_EQ(nms({{0, 0.4, b}}, 0.5).size(), 1u);

    const auto same = nms({{0, 0.8, b}, {0, 0.9, b}}, 0.5);
    ASSERT_EQ(same.size(), 1u);
    EXPECT_EQ(same[0].confidence, 0.9);

    EXPECT_EQ(nms({{0, 0.8, b}, {1, 0.9, b}}, 0.5).size(), 2u);
    EXPECT_TRUE(nms({}, 0.5).empty());
}

TEST(Nms, TieBreakKeepsLowerIndexAndSortsOutput)
{
    const Box b{0, 0, 10, 10};
    const std::vector<Detection> dets{{0, 0.5, {50, 50, 60, 60}}, {0, 0.7, b}, {0, 0.7, {0, 0, 10, 9}}};
    const auto out = nms(dets, 0.5);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0], dets[1]);
    EXPECT_EQ(out[1], dets[0]);
}

TEST(NmsProperty, MatchesBruteForceAndIsIdempotent)
{
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> count(0, 50);
    std::uniform_real_distribution<double> thresh(0.05, 0.95);
    for (int trial = 0; trial < 300; ++trial) {
        const auto dets = random_detections(rng, count(rng));
        const double t = thresh(rng);
        const auto out = nms(dets, t);
        ASSERT_EQ(out, oracle::nms_bruteforce(dets, t));
        ASSERT_EQ(nms(out, t), out);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = i + 1; j < out.size(); ++j)
                if (out[i].class_id == out[j].class_id)
                    ASSERT_LT(iou(out[i].box, out[j].box), t);
    }
}
