#include <gtest/gtest.h>

#include <algorithm>

#include "caadam/arch.hpp"
#include "caadam/error.hpp"

using namespace caadam;

TEST(Summarize, ShallowRegressionNet) {
    const ArchitectureSummary s = summarize(NetworkSpec{8, {64, 32}, 1});
    ASSERT_EQ(s.layers.size(), 3u);
    EXPECT_EQ(s.layers[0].connections, 512u);
    EXPECT_EQ(s.layers[1].connections, 2048u);
    EXPECT_EQ(s.layers[2].connections, 32u);
    EXPECT_EQ(s.layers[2].index, 2u);
    EXPECT_EQ(s.c_min, 32u);
    EXPECT_EQ(s.c_max, 2048u);
    EXPECT_EQ(s.c_median, 512.0);
    EXPECT_EQ(s.depth, 3u);
}

TEST(Summarize, SingleLayer) {
    const ArchitectureSummary s = summarize(NetworkSpec{2, {}, 2});
    EXPECT_EQ(s.c_min, 4u);
    EXPECT_EQ(s.c_max, 4u);
    EXPECT_EQ(s.c_median, 4.0);
    EXPECT_EQ(s.depth, 1u);
}

TEST(Summarize, EvenCountMedian) {
    const std::vector<std::size_t> c{100, 200};
    EXPECT_EQ(summarize(c).c_median, 150.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_EQ(median({5, 1, 3}), 3.0);
}

TEST(Summarize, Errors) {
    EXPECT_THROW(summarize(std::vector<std::size_t>{}), StructuralError);
    EXPECT_THROW(summarize(std::vector<std::size_t>{3, 0}), StructuralError);
}

TEST(Summarize, NetworkAndSpecAgree) {
    Rng rng(1);
    const NetworkSpec spec{5, {9, 2, 7}, 3, OutputHead::softmax_classification};
    const Network net(spec, rng);
    EXPECT_EQ(summarize(net), summarize(spec));
    EXPECT_EQ(summarize(net), summarize(net));
}

TEST(Summarize, StatisticsMatchBruteForceUnderPermutation) {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> widths(2 + rng.below(5));
        for (auto& w : widths) w = 1 + rng.below(128);
        std::vector<std::size_t> perm = widths;
        rng.shuffle(perm);
        for (const auto& hidden : {widths, perm}) {
            const NetworkSpec spec{1 + rng.below(20), hidden, 1 + rng.below(4)};
            const ArchitectureSummary s = summarize(spec);
            std::vector<std::size_t> counts;
            for (const auto& [in, out] : spec.layer_dims()) counts.push_back(in * out);
            std::vector<std::size_t> sorted = counts;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            const double med = n % 2 ? static_cast<double>(sorted[n / 2])
                                     : (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2;
            EXPECT_EQ(s.c_min, sorted.front());
            EXPECT_EQ(s.c_max, sorted.back());
            EXPECT_EQ(s.c_median, med);
            EXPECT_LE(static_cast<double>(s.c_min), s.c_median);
            EXPECT_LE(s.c_median, static_cast<double>(s.c_max));
            EXPECT_EQ(s.depth, n);
            for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(s.layers[i].connections, counts[i]);
        }
    }
}
