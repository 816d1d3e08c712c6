#include <gtest/gtest.h>

#include <random>

#include "mdpsim/generators.hpp"
#include "mdpsim/threshold_search.hpp"

using namespace mdpsim;

namespace {

/// Rises to a plateau at [peakLo, peakHi] then falls; optional flat steps.
std::vector<double> unimodal(std::mt19937_64& rng, std::size_t n)
{
    const std::size_t peakLo = rng() % n;
    const std::size_t peakHi = std::min(n - 1, peakLo + rng() % 4);
    std::vector<double> v(n);
    double level = 1.0;
    for (std::size_t i = peakLo + 1; i-- > 0;) {
        v[i] = level;
        if (rng() % 3 != 0)
            level -= 0.01 * double(1 + rng() % 5);
    }
    level = 1.0;
    for (std::size_t i = peakLo; i < n; ++i) {
        if (i > peakHi && rng() % 3 != 0)
            level -= 0.01 * double(1 + rng() % 5);
        v[i] = level;
    }
    return v;
}

} // namespace

TEST(Geomean, Values)
{
    EXPECT_DOUBLE_EQ(geomean({2, 8}), 4.0);
    EXPECT_DOUBLE_EQ(geomean({3.5}), 3.5);
    EXPECT_DOUBLE_EQ(geomean({1, 1, 1}), 1.0);
    EXPECT_NEAR(geomean({1, 10, 100}), 10.0, 1e-12);
    EXPECT_THROW(geomean({}), ArgumentError);
    EXPECT_THROW(geomean({1, 0}), ArgumentError);
    EXPECT_THROW(geomean({-2, 2}), ArgumentError);
}

TEST(Maximise, SinglePoint)
{
    int calls = 0;
    auto f = [&](StoreDistance) { ++calls; return 1.0; };
    for (auto mode : {SearchMode::Exhaustive, SearchMode::Binary}) {
        calls = 0;
        const auto r = maximiseThreshold(f, 7, 7, mode);
        EXPECT_EQ(calls, 1);
        EXPECT_EQ(r.bestThreshold, 7u);
        EXPECT_EQ(r.evaluated.size(), 1u);
    }
}

TEST(Maximise, BadRanges)
{
    auto f = [](StoreDistance) { return 1.0; };
    EXPECT_THROW(maximiseThreshold(f, 0, 4, SearchMode::Exhaustive), ArgumentError);
    EXPECT_THROW(maximiseThreshold(f, 5, 4, SearchMode::Binary), ArgumentError);
    EXPECT_THROW(maximiseThreshold(f, 1, kInfiniteDistance, SearchMode::Binary), ArgumentError);
    EXPECT_THROW(maximiseOver(f, {}, SearchMode::Binary), ArgumentError);
    EXPECT_THROW(maximiseOver(f, {3, 2}, SearchMode::Binary), ArgumentError);
    EXPECT_THROW(maximiseOver(f, {2, 2}, SearchMode::Binary), ArgumentError);
}

TEST(Maximise, TiesGoToSmallestThreshold)
{
    auto flat = [](StoreDistance) { return 2.0; };
    EXPECT_EQ(maximiseThreshold(flat, 3, 40, SearchMode::Exhaustive).bestThreshold, 3u);
    EXPECT_EQ(maximiseThreshold(flat, 3, 40, SearchMode::Binary).bestThreshold, 3u);
}

TEST(Maximise, BinaryMatchesExhaustiveOnUnimodalCurves)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 1 + rng() % 100;
        const auto v = unimodal(rng, n);
        auto f = [&](StoreDistance t) { return v[t - 1]; };
        const auto ex = maximiseThreshold(f, 1, n, SearchMode::Exhaustive);
        const auto bi = maximiseThreshold(f, 1, n, SearchMode::Binary);
        const auto argmax = std::max_element(v.begin(), v.end()) - v.begin() + 1;
        ASSERT_EQ(ex.bestThreshold, StoreDistance(argmax)) << trial;
        ASSERT_EQ(ex.evaluated.size(), n);
        ASSERT_EQ(bi.bestScore(), ex.bestScore()) << trial;
        ASSERT_LE(bi.evaluated.size(), n);
    }
}

TEST(Maximise, BinaryProbesLogarithmically)
{
    auto f = [](StoreDistance t) { return -std::abs(double(t) - 700.0); };
    const auto r = maximiseThreshold(f, 1, 1024, SearchMode::Binary);
    EXPECT_EQ(r.bestThreshold, 700u);
    EXPECT_LE(r.evaluated.size(), 24u);
    EXPECT_TRUE(std::is_sorted(r.evaluated.begin(), r.evaluated.end()));
}

TEST(Maximise, ScoreOfUnprobedThrows)
{
    auto f = [](StoreDistance t) { return double(t); };
    const auto r = maximiseThreshold(f, 1, 2, SearchMode::Exhaustive);
    EXPECT_EQ(r.scoreOf(2), 2.0);
    EXPECT_THROW(r.scoreOf(3), ArgumentError);
}

TEST(Breakpoints, OnePerDistinctLabelSet)
{
    StoreDistanceProfile p;
    p.perPc[1].add(3, 10);
    p.perPc[2].add(3, 10);
    p.perPc[3].add(9, 10);
    p.perPc[4].add(kInfiniteDistance, 10);
    p.perPc[5].add(40, 10);
    p.perPc[6].add(1, 10);
    EXPECT_EQ(labelBreakpoints(p, 1, 32), (std::vector<StoreDistance>{1, 2, 4, 10}));
    EXPECT_EQ(labelBreakpoints(p, 4, 9), (std::vector<StoreDistance>{4}));
    EXPECT_EQ(labelBreakpoints(p, 4, 10), (std::vector<StoreDistance>{4, 10}));

    // Thresholds between breakpoints select the same loads.
    const auto bps = labelBreakpoints(p, 1, 64);
    for (StoreDistance t = 1; t <= 64; ++t) {
        const auto below = *std::prev(std::upper_bound(bps.begin(), bps.end(), t));
        ASSERT_EQ(labelLoads(p, t).pcs, labelLoads(p, below).pcs) << t;
    }
}

namespace {

std::vector<Trace> smallSuite()
{
    return {genDependentChain(120, 3, 1, 4), genDependentChain(120, 12, 2, 4),
            genPixelAvg(21, 4, 3, 3), genAliasStorm(40, 8, 4, 6)};
}

StoreDistanceProfile profileAll(const std::vector<Trace>& ts)
{
    std::vector<StoreDistanceProfile> parts;
    for (const auto& t : ts)
        parts.push_back(profileTrace(t));
    return mergeProfiles(parts);
}

} // namespace

TEST(Search, BinaryAgreesWithExhaustive)
{
    const auto traces = smallSuite();
    const auto prof = profileAll(traces);
    const auto p = smallCore();
    const auto ex = searchThreshold(traces, prof, p.core, p.predictor, 1, 24, SearchMode::Exhaustive);
    const auto bi = searchThreshold(traces, prof, p.core, p.predictor, 1, 24, SearchMode::Binary);
    EXPECT_EQ(ex.evaluated.size(), 24u);
    EXPECT_LE(bi.evaluated.size(), ex.evaluated.size());
    EXPECT_DOUBLE_EQ(bi.bestScore(), ex.bestScore());
    EXPECT_EQ(ex.trainSet.size(), traces.size());
    EXPECT_EQ(ex.trainSet[0], traces[0].name);

    // The objective is the geomean of labelled IPCs.
    EXPECT_DOUBLE_EQ(ex.scoreOf(5), labelledGeomeanIpc(traces, prof, p.core, p.predictor, 5));
}

TEST(Search, JobsDoNotChangeResult)
{
    const auto traces = smallSuite();
    const auto prof = profileAll(traces);
    const auto p = mediumCore();
    const auto a = searchThreshold(traces, prof, p.core, p.predictor, 1, 16, SearchMode::Binary, 1);
    const auto b = searchThreshold(traces, prof, p.core, p.predictor, 1, 16, SearchMode::Binary, 4);
    EXPECT_EQ(a.evaluated, b.evaluated);
    EXPECT_EQ(a.bestThreshold, b.bestThreshold);
}

TEST(Search, RejectsBadInput)
{
    const auto p = smallCore();
    const auto traces = smallSuite();
    const auto prof = profileAll(traces);
    EXPECT_THROW(searchThreshold({}, prof, p.core, p.predictor, 1, 4), ArgumentError);
    EXPECT_THROW(searchThreshold(traces, prof, p.core, p.predictor, 0, 4), ArgumentError);
    EXPECT_THROW(searchThreshold(traces, prof, p.core, p.predictor, 5, 4), ArgumentError);
}

TEST(Search, CsvAndSummary)
{
    SearchResult r;
    r.evaluated = {{1, 1.5}, {2, 2.25}};
    r.bestThreshold = 2;
    r.trainSet = {"a", "b", "c"};
    EXPECT_EQ(searchResultCsv(r), "threshold,geomean_ipc\n1,1.500000\n2,2.250000\n");
    EXPECT_EQ(searchSummary(r, SearchMode::Binary),
              "# best_threshold=2 geomean_ipc=2.250000 mode=binary probes=2 traces=3");
}
