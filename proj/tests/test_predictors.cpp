#include <gtest/gtest.h>

#include "mdpsim/predictor_config.hpp"

using namespace mdpsim;

namespace {

constexpr std::uint64_t kLoad = 0x400100;
constexpr std::uint64_t kStore = 0x400200;

LoadQuery q(std::uint64_t pc, std::uint64_t seq = 1000, const BranchHistory* h = nullptr)
{
    return {pc, seq, 0, h};
}

StoreSets storeSets(std::uint32_t slots, std::uint64_t clearPeriod = 0)
{
    return StoreSets(StoreSetsConfig{64, 32, slots, clearPeriod});
}

/// Two PCs mapping to the same SSIT row.
std::pair<std::uint64_t, std::uint64_t> collidingPcs(std::uint32_t entries)
{
    const std::uint64_t a = 0x400000;
    for (std::uint64_t b = a + 4;; b += 4)
        if (ssitIndex(b, entries) == ssitIndex(a, entries))
            return {a, b};
}

BranchHistory historyOf(std::uint64_t bits, unsigned n)
{
    BranchHistory h;
    for (unsigned i = n; i-- > 0;)
        h.push((bits >> i) & 1);
    return h;
}

} // namespace

TEST(History, FoldXorsSlices)
{
    const BranchHistory h = historyOf(0b1101, 4);
    EXPECT_TRUE(h.bit(0));
    EXPECT_FALSE(h.bit(1));
    EXPECT_EQ(h.fold(4, 4), 0b1101u);
    EXPECT_EQ(h.fold(4, 2), 0b01u ^ 0b11u);
    EXPECT_EQ(h.fold(3, 2), 0b01u ^ 0b1u);
    EXPECT_EQ(h.fold(0, 8), 0u);
    EXPECT_EQ(h.fold(8, 0), 0u);
    EXPECT_THROW(h.fold(BranchHistory::kMaxBits + 1, 4), ArgumentError);
}

TEST(History, LongRegisterShiftsAcrossWords)
{
    BranchHistory h;
    h.push(true);
    for (int i = 0; i < 200; ++i)
        h.push(false);
    EXPECT_TRUE(h.bit(200));
    EXPECT_FALSE(h.bit(199));
    EXPECT_EQ(h.fold(256, 64), 1ull << (200 % 64));
}

TEST(SsitIndex, InRange)
{
    for (std::uint32_t e : {1u, 2u, 64u, 1024u})
        for (std::uint64_t pc = 0; pc < 5000; pc += 4)
            ASSERT_LT(ssitIndex(pc * 977, e), e);
    EXPECT_EQ(ssitIndex(0xdeadbeef, 1), 0u);
}

TEST(SsitIndex, CollisionCount)
{
    auto [a, b] = collidingPcs(64);
    EXPECT_EQ(ssitCollisions({a, b}, 64), 2u);
    EXPECT_EQ(ssitCollisions({a}, 64), 0u);
    EXPECT_EQ(ssitCollisions({}, 64), 0u);
}

TEST(StoreSetsTest, RejectsBadConfig)
{
    EXPECT_THROW(StoreSets(StoreSetsConfig{0, 32, 2, 0}), ConfigError);
    EXPECT_THROW(StoreSets(StoreSetsConfig{48, 32, 2, 0}), ConfigError);
    EXPECT_THROW(StoreSets(StoreSetsConfig{64, 0, 2, 0}), ConfigError);
    EXPECT_THROW(StoreSets(StoreSetsConfig{64, 32, 0, 0}), ConfigError);
    EXPECT_NO_THROW(StoreSets(StoreSetsConfig{64, 24, 3, 0}));
}

TEST(StoreSetsTest, EmptyTablesPredictNothing)
{
    auto ss = storeSets(2);
    ss.registerStore({kStore, 1, 0});
    EXPECT_TRUE(ss.queryLoad(q(kLoad)).empty());
    EXPECT_EQ(ss.tablePopulation(), (std::vector<std::size_t>{0, 0}));
}

TEST(StoreSetsTest, MergeRules)
{
    auto ss = storeSets(2);
    const auto& st = ss.state();

    ss.trainViolation({kLoad, kStore, nullptr});
    const auto s0 = st.ssit[ss.index(kLoad)];
    ASSERT_TRUE(s0);
    EXPECT_EQ(st.ssit[ss.index(kStore)], s0);

    // Load already has a set: the new store joins it.
    const std::uint64_t store2 = kStore + 0x40;
    ss.trainViolation({kLoad, store2, nullptr});
    EXPECT_EQ(st.ssit[ss.index(store2)], s0);

    // Store already has a set: the new load joins it.
    const std::uint64_t load2 = kLoad + 0x80;
    ss.trainViolation({load2, kStore, nullptr});
    EXPECT_EQ(st.ssit[ss.index(load2)], s0);

    // Both have different sets: the smaller id wins for both.
    const std::uint64_t l3 = kLoad + 0x400, s3 = kStore + 0x400;
    ss.trainViolation({l3, s3, nullptr});
    const auto s1 = st.ssit[ss.index(l3)];
    ASSERT_TRUE(s1);
    ASSERT_NE(*s1, *s0);
    ss.trainViolation({l3, kStore, nullptr});
    EXPECT_EQ(st.ssit[ss.index(l3)], std::min(s0, s1));
    EXPECT_EQ(st.ssit[ss.index(kStore)], std::min(s0, s1));
}

TEST(StoreSetsTest, TrainingJoinsLoadAndStoreRows)
{
    auto ss = storeSets(2);
    for (std::uint64_t k = 0; k < 40; ++k) {
        const std::uint64_t l = 0x500000 + 0x1234 * k, s = 0x600000 + 0x88 * k;
        ss.trainViolation({l, s, nullptr});
        EXPECT_EQ(ss.state().ssit[ss.index(l)], ss.state().ssit[ss.index(s)]);
    }
}

TEST(StoreSetsTest, QueryDoesNotMutate)
{
    auto ss = storeSets(2);
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.registerStore({kStore, 1, 0});
    const StoreSetsState before = ss.state();
    const auto pop = ss.tablePopulation();
    for (int i = 0; i < 10; ++i)
        ss.queryLoad(q(kLoad + 4 * i));
    EXPECT_EQ(ss.state(), before);
    EXPECT_EQ(ss.tablePopulation(), pop);
    EXPECT_EQ(ss.stats().queries, 10u);
}

TEST(StoreSetsTest, CollidingLoadsShareFate)
{
    auto [a, b] = collidingPcs(64);
    auto ss = storeSets(2);
    ss.trainViolation({a, kStore, nullptr});
    ss.registerStore({kStore, 5, 0});
    const auto pa = ss.queryLoad(q(a));
    EXPECT_EQ(pa.waitFor, std::vector<std::uint64_t>{5});
    EXPECT_EQ(ss.queryLoad(q(b)), pa);
}

TEST(StoreSetsTest, MultiSlotFifo)
{
    auto ss = storeSets(2);
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.registerStore({kStore, 1, 0});
    ss.registerStore({kStore, 2, 0});
    EXPECT_EQ(ss.queryLoad(q(kLoad)).waitFor, (std::vector<std::uint64_t>{1, 2}));
    ss.registerStore({kStore, 3, 0});
    EXPECT_EQ(ss.queryLoad(q(kLoad)).waitFor, (std::vector<std::uint64_t>{2, 3}));
    ss.storeExecuted(2);
    EXPECT_EQ(ss.queryLoad(q(kLoad)).waitFor, (std::vector<std::uint64_t>{3}));
    ss.storeExecuted(1);  // already evicted
    EXPECT_EQ(ss.queryLoad(q(kLoad)).waitFor, (std::vector<std::uint64_t>{3}));
    ss.storeExecuted(3);
    EXPECT_TRUE(ss.queryLoad(q(kLoad)).empty());
}

TEST(StoreSetsTest, SingleSlotOverwrites)
{
    auto ss = storeSets(1);
    EXPECT_EQ(ss.name(), "storesets");
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.registerStore({kStore, 1, 0});
    ss.registerStore({kStore, 2, 0});
    ss.registerStore({kStore, 3, 0});
    EXPECT_EQ(ss.queryLoad(q(kLoad)).waitFor, std::vector<std::uint64_t>{3});
}

TEST(StoreSetsTest, PeriodicClear)
{
    auto ss = storeSets(2, 10);
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.tick(8);
    ss.registerStore({kStore, 1, 0});
    ss.tick(1);
    EXPECT_FALSE(ss.queryLoad(q(kLoad)).empty());
    ss.tick(1);
    EXPECT_TRUE(ss.queryLoad(q(kLoad)).empty());
    EXPECT_EQ(ss.tablePopulation(), (std::vector<std::size_t>{0, 0}));
    EXPECT_EQ(ss.state().opsSinceClear, 0u);

    ss.trainViolation({kLoad, kStore, nullptr});
    ss.tick(25);
    EXPECT_EQ(ss.state().opsSinceClear, 5u);
    EXPECT_EQ(ss.tablePopulation()[0], 0u);
}

TEST(StoreSetsTest, ZeroPeriodNeverClears)
{
    auto ss = storeSets(2, 0);
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.tick(10'000'000);
    EXPECT_EQ(ss.tablePopulation()[0], 2u);
}

TEST(StoreSetsTest, DefaultClearPeriod)
{
    StoreSets ss(StoreSetsConfig{});
    EXPECT_EQ(ss.config().clearPeriod, 125000u);
    ss.trainViolation({kLoad, kStore, nullptr});
    ss.tick(124999);
    EXPECT_EQ(ss.tablePopulation()[0], 2u);
    ss.tick(1);
    EXPECT_EQ(ss.tablePopulation()[0], 0u);
}

namespace {

Phast phast(std::vector<unsigned> lengths = {2, 8, 32, 128}, std::uint32_t rows = 128,
            std::uint32_t assoc = 4)
{
    return Phast(PhastConfig{rows, assoc, 16, std::move(lengths)});
}

} // namespace

TEST(PhastTest, RejectsBadConfig)
{
    EXPECT_THROW(phast({2, 8}, 100), ConfigError);
    EXPECT_THROW(phast({2, 8}, 128, 0), ConfigError);
    EXPECT_THROW(phast({}), ConfigError);
    EXPECT_THROW(phast({8, 8}), ConfigError);
    EXPECT_THROW(phast({8, 2}), ConfigError);
    EXPECT_THROW(phast({2, 2000}), ConfigError);
    EXPECT_THROW(Phast(PhastConfig{128, 4, 0, {2}}), ConfigError);
    EXPECT_THROW(Phast(PhastConfig{128, 4, 33, {2}}), ConfigError);
}

TEST(PhastTest, EmptyPredictsNothing)
{
    auto p = phast();
    const auto h = historyOf(0b1011, 4);
    p.registerStore({kStore, 1, 0});
    EXPECT_TRUE(p.queryLoad(q(kLoad, 2, &h)).empty());
    EXPECT_EQ(p.tablePopulation(), (std::vector<std::size_t>{0, 0, 0, 0}));
}

TEST(PhastTest, AllocatesShortestThenLonger)
{
    auto p = phast();
    const auto h = historyOf(0xabcdef, 24);
    p.trainViolation({kLoad, kStore, &h});
    EXPECT_EQ(p.tablePopulation(), (std::vector<std::size_t>{1, 0, 0, 0}));
    p.trainViolation({kLoad, kStore, &h});
    EXPECT_EQ(p.tablePopulation(), (std::vector<std::size_t>{1, 1, 0, 0}));
    p.trainViolation({kLoad, kStore, &h});
    p.trainViolation({kLoad, kStore, &h});
    EXPECT_EQ(p.tablePopulation(), (std::vector<std::size_t>{1, 1, 1, 1}));
    p.trainViolation({kLoad, kStore, &h});
    EXPECT_EQ(p.tablePopulation(), (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(PhastTest, PredictsYoungestInflightInstance)
{
    auto p = phast();
    const auto h = historyOf(0x5, 3);
    p.trainViolation({kLoad, kStore, &h});
    EXPECT_TRUE(p.queryLoad(q(kLoad, 10, &h)).empty());
    p.registerStore({kStore, 3, 0});
    p.registerStore({kStore, 7, 0});
    p.registerStore({kStore + 4, 8, 0});
    EXPECT_EQ(p.queryLoad(q(kLoad, 10, &h)).waitFor, std::vector<std::uint64_t>{7});
    p.storeExecuted(7);
    EXPECT_EQ(p.queryLoad(q(kLoad, 10, &h)).waitFor, std::vector<std::uint64_t>{3});
    p.storeExecuted(3);
    EXPECT_TRUE(p.queryLoad(q(kLoad, 10, &h)).empty());
}

TEST(PhastTest, LongestHitProvides)
{
    auto p = phast();
    const auto h = historyOf(0b00000011, 8);
    p.trainViolation({kLoad, kStore, &h});
    p.trainViolation({kLoad, kStore, &h});
    auto hit = p.provider(kLoad, &h);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->table, 1u);

    // Same newest two outcomes, different older ones: only the 2-bit table matches.
    const auto other = historyOf(0b00100011, 8);
    hit = p.provider(kLoad, &other);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->table, 0u);

    // A later violation rewrites the provider's store and allocates above it.
    const auto slot1 = p.provider(kLoad, &h)->slot;
    p.trainViolation({kLoad, kStore + 0x10, &h});
    EXPECT_EQ(p.state().tables[1][slot1].storePc, kStore + 0x10);
    hit = p.provider(kLoad, &h);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->table, 2u);
    EXPECT_EQ(p.state().tables[2][hit->slot].storePc, kStore + 0x10);
}

TEST(PhastTest, QueryDoesNotMutate)
{
    auto p = phast();
    const auto h = historyOf(0x3, 2);
    p.trainViolation({kLoad, kStore, &h});
    p.registerStore({kStore, 1, 0});
    const PhastState before = p.state();
    for (int i = 0; i < 5; ++i)
        p.queryLoad(q(kLoad, 2, &h));
    EXPECT_EQ(p.state(), before);
}

TEST(PhastTest, ReplacesLeastUsefulLowestIndex)
{
    // One row, two ways, one table: every load competes for the same set.
    auto p = phast({2}, 1, 2);
    const auto h = historyOf(0, 2);
    const std::uint64_t l1 = 0x1000, l2 = 0x2000, l3 = 0x3000, l4 = 0x4000;
    p.trainViolation({l1, kStore, &h});
    p.trainViolation({l2, kStore, &h});
    const auto& ways = p.state().tables[0];
    EXPECT_EQ(ways[0].tag, p.tagOf(0, l1, &h));
    EXPECT_EQ(ways[1].tag, p.tagOf(0, l2, &h));

    p.trainViolation({l3, kStore, &h});  // tie at 0: way 0 goes
    EXPECT_EQ(ways[0].tag, p.tagOf(0, l3, &h));

    p.predictionOutcome(q(l3, 1, &h), kStore, true);
    EXPECT_EQ(ways[0].useful, 1);
    p.trainViolation({l4, kStore, &h});  // way 1 is less useful
    EXPECT_EQ(ways[1].tag, p.tagOf(0, l4, &h));
    EXPECT_EQ(ways[0].tag, p.tagOf(0, l3, &h));
}

TEST(PhastTest, UsefulCounterSaturates)
{
    auto p = phast({2});
    const auto h = historyOf(1, 2);
    p.trainViolation({kLoad, kStore, &h});
    const auto slot = p.provider(kLoad, &h)->slot;
    const auto& way = p.state().tables[0][slot];
    for (int i = 0; i < 6; ++i)
        p.predictionOutcome(q(kLoad, 1, &h), kStore, true);
    EXPECT_EQ(way.useful, Phast::kUsefulMax);
    p.predictionOutcome(q(kLoad, 1, &h), kStore + 4, false);  // other store: ignored
    EXPECT_EQ(way.useful, Phast::kUsefulMax);
    for (int i = 0; i < 6; ++i)
        p.predictionOutcome(q(kLoad, 1, &h), kStore, false);
    EXPECT_EQ(way.useful, 0);
}

TEST(OracleTest, WaitsOnOverlappingInflightOlderStores)
{
    Trace t;
    t.events = {TraceEvent::store(0, 0x10, 0x100, 8), TraceEvent::store(1, 0x14, 0x200, 8),
                TraceEvent::store(2, 0x18, 0x104, 4), TraceEvent::load(3, 0x1c, 0x100, 8),
                TraceEvent::store(4, 0x20, 0x100, 8)};
    OraclePredictor o(t);
    o.registerStore({0x10, 1, 0});
    o.registerStore({0x14, 2, 1});
    o.registerStore({0x18, 3, 2});
    o.registerStore({0x20, 5, 4});
    EXPECT_EQ(o.queryLoad({0x1c, 4, 3, nullptr}).waitFor, (std::vector<std::uint64_t>{1, 3}));
    o.storeExecuted(1);
    EXPECT_EQ(o.queryLoad({0x1c, 4, 3, nullptr}).waitFor, std::vector<std::uint64_t>{3});
    o.storeExecuted(3);
    EXPECT_TRUE(o.queryLoad({0x1c, 4, 3, nullptr}).empty());
    EXPECT_EQ(o.stats().queries, 3u);
    EXPECT_EQ(o.stats().predictionsMade, 2u);
}

TEST(NeverTest, AlwaysIndependent)
{
    NeverPredictor n;
    n.registerStore({kStore, 1, 0});
    n.trainViolation({kLoad, kStore, nullptr});
    EXPECT_TRUE(n.queryLoad(q(kLoad)).empty());
    EXPECT_EQ(n.stats(), (MdpStats{1, 0, 0}));
}

TEST(Bypass, LabelledLoadsSkipInnerPredictor)
{
    auto ss = storeSets(2);
    LabelSet labels;
    labels.pcs = {kLoad};
    BypassWrapper w(ss, labels);
    const std::uint64_t other = kLoad + 0x1000;

    w.trainViolation({kLoad, kStore, nullptr});
    EXPECT_EQ(ss.tablePopulation()[0], 0u);
    w.trainViolation({other, kStore, nullptr});
    EXPECT_EQ(ss.tablePopulation()[0], 2u);

    ss.trainViolation({kLoad, kStore, nullptr});
    w.registerStore({kStore, 1, 0});
    EXPECT_TRUE(w.queryLoad(q(kLoad)).empty());
    EXPECT_EQ(ss.stats().queries, 0u);
    EXPECT_FALSE(w.queryLoad(q(other)).empty());
    EXPECT_EQ(ss.stats().queries, 1u);
    EXPECT_EQ(w.stats(), (MdpStats{1, 1, 1}));
    EXPECT_TRUE(w.isLabelled(kLoad));
    EXPECT_FALSE(w.isLabelled(other));
    EXPECT_EQ(w.name(), ss.name());
    EXPECT_EQ(w.tablePopulation(), ss.tablePopulation());
}

TEST(Bypass, EmptyLabelsAreTransparent)
{
    auto a = storeSets(2), b = storeSets(2);
    BypassWrapper w(b, LabelSet{});
    for (std::uint64_t k = 0; k < 20; ++k) {
        a.trainViolation({kLoad + 4 * k, kStore + 8 * k, nullptr});
        w.trainViolation({kLoad + 4 * k, kStore + 8 * k, nullptr});
        a.registerStore({kStore + 8 * k, k + 1, 0});
        w.registerStore({kStore + 8 * k, k + 1, 0});
        ASSERT_EQ(a.queryLoad(q(kLoad + 4 * k)), w.queryLoad(q(kLoad + 4 * k)));
    }
    EXPECT_EQ(a.state(), b.state());
}

TEST(PredictorConfigTest, FactoryAndNames)
{
    Trace t;
    t.events = {TraceEvent::other(0, 0)};
    PredictorConfig c;
    for (auto k : {PredictorKind::StoreSets, PredictorKind::XsStoreSets, PredictorKind::Phast,
                   PredictorKind::Oracle, PredictorKind::Never}) {
        c.kind = k;
        EXPECT_EQ(makePredictor(c, t)->name(), toString(k));
        EXPECT_EQ(parsePredictorKind(toString(k)), k);
    }
    EXPECT_THROW(parsePredictorKind("tage"), ConfigError);

    c.kind = PredictorKind::StoreSets;
    c.slots = 4;
    EXPECT_EQ(c.storeSets().slots, 1u);
    c.kind = PredictorKind::XsStoreSets;
    EXPECT_EQ(c.storeSets().slots, 4u);

    c.ssitEntries = 100;
    EXPECT_THROW(makePredictor(c, t), ConfigError);
}
