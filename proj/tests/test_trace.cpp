#include <gtest/gtest.h>

#include <random>

#include "mdpsim/generators.hpp"
#include "mdpsim/trace.hpp"

using namespace mdpsim;

namespace {

std::string header(const std::string& name = "t") { return "#mdp-trace v1 name=" + name + "\n"; }

} // namespace

TEST(TraceParse, EmptyEventSection)
{
    const Trace t = parseTrace(header("empty"));
    EXPECT_EQ(t.name, "empty");
    EXPECT_TRUE(t.empty());
}

TEST(TraceParse, SingleLoadRecord)
{
    const Trace t = parseTrace(header() + "L pc=0x40 seq=0 addr=0x1000 size=4\n");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.events[0], TraceEvent::load(0, 0x40, 0x1000, 4));
}

TEST(TraceParse, AllKindsAndFieldOrder)
{
    const Trace t = parseTrace(header() +
                               "S seq=1 size=8 addr=0x20 pc=0x10\n"
                               "# comment\n"
                               "\n"
                               "B pc=0x14 taken=1 seq=2\n"
                               "O pc=0x18 seq=7\n");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.events[0], TraceEvent::store(1, 0x10, 0x20, 8));
    EXPECT_EQ(t.events[1], TraceEvent::branch(2, 0x14, true));
    EXPECT_EQ(t.events[2], TraceEvent::other(7, 0x18));
}

TEST(TraceParse, ToleratesMissingFinalNewlineAndCrLf)
{
    const Trace t = parseTrace(header() + "O pc=0x4 seq=0\r\nO pc=0x8 seq=1");
    EXPECT_EQ(t.size(), 2u);
}

TEST(TraceParse, ErrorsCarryOffsets)
{
    const std::string h = header();
    struct Bad { std::string body; std::size_t offset; };
    const Bad cases[] = {
        {"X pc=0x4 seq=0\n", h.size()},
        {"L pc=0x4 seq=0 addr=0x10\n", h.size()},               // size missing
        {"O pc=0x4 seq=0 addr=0x10 size=4\n", h.size()},        // addr on non-memory op
        {"B pc=0x4 seq=0\n", h.size()},                         // taken missing
        {"L pc=0x4 seq=0 addr=0x10 size=3\n", h.size() + 25},   // bad size
        {"O pc=0x4 seq=0 foo=1\n", h.size() + 15},              // unknown field
        {"O pc=0x4 pc=0x8 seq=0\n", h.size() + 9},              // duplicate
        {"O pc=4 seq=0\n", h.size() + 2},                       // hex needs 0x
        {"O seq=0\n", h.size()},                                // pc missing
        {"O pc=0x4 seq\n", h.size() + 9},                       // not key=value
    };
    for (const auto& c : cases) {
        try {
            parseTrace(h + c.body);
            ADD_FAILURE() << "accepted: " << c.body;
        } catch (const OrderingError&) {
            ADD_FAILURE() << "ordering error for: " << c.body;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.offset(), c.offset) << c.body << e.what();
        }
    }
}

TEST(TraceParse, MissingHeader)
{
    EXPECT_THROW(parseTrace(""), ParseError);
    EXPECT_THROW(parseTrace("O pc=0x4 seq=0\n"), ParseError);
}

TEST(TraceParse, SeqRegressionIsOrderingError)
{
    const std::string h = header();
    const std::string first = "O pc=0x4 seq=5\n";
    try {
        parseTrace(h + first + "O pc=0x8 seq=5\n");
        FAIL();
    } catch (const OrderingError& e) {
        EXPECT_EQ(e.offset(), h.size() + first.size());
    }
}

TEST(TraceSerialize, EmptyTraceIsHeaderOnly)
{
    Trace t;
    t.name = "nothing";
    EXPECT_EQ(serializeTrace(t), "#mdp-trace v1 name=nothing\n");
}

TEST(TraceSerialize, CanonicalRecords)
{
    Trace t;
    t.name = "x";
    t.events = {TraceEvent::load(0, 0x40, 0x1000, 4), TraceEvent::store(1, 0xabc, 0xff0, 1),
                TraceEvent::branch(2, 0x44, false), TraceEvent::other(3, 0x48)};
    EXPECT_EQ(serializeTrace(t), "#mdp-trace v1 name=x\n"
                                 "L pc=0x40 seq=0 addr=0x1000 size=4\n"
                                 "S pc=0xabc seq=1 addr=0xff0 size=1\n"
                                 "B pc=0x44 seq=2 taken=0\n"
                                 "O pc=0x48 seq=3\n");
}

TEST(TraceRoundTrip, RandomTracesText)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Trace t = genRandomTrace(1000, 64 << (seed % 5), seed);
        const std::string bytes = serializeTrace(t);
        const Trace back = parseTrace(bytes);
        EXPECT_EQ(back, t);
        EXPECT_EQ(serializeTrace(back), bytes);
    }
}

TEST(TraceRoundTrip, ExtremeValues)
{
    Trace t;
    t.name = "edge";
    t.events = {TraceEvent::load(0, 0, 0, 1),
                TraceEvent::store(~0ull - 1, ~0ull, ~0ull - 8, 8),
                TraceEvent::branch(~0ull, 0x1, true)};
    EXPECT_EQ(parseTrace(serializeTrace(t)), t);
    EXPECT_EQ(parseTraceBinary(serializeTraceBinary(t)), t);
}

TEST(TraceRoundTrip, Binary)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Trace t = genRandomTrace(500, 256, seed);
        const std::string bytes = serializeTraceBinary(t);
        EXPECT_EQ(bytes.size(), 8 + 4 + t.name.size() + 8 + 27 * t.size());
        EXPECT_EQ(parseTraceBinary(bytes), t);
    }
}

TEST(TraceBinary, RejectsCorruption)
{
    Trace t = genRandomTrace(10, 64, 1);
    const std::string good = serializeTraceBinary(t);
    EXPECT_THROW(parseTraceBinary(good.substr(0, good.size() - 1)), ParseError);
    EXPECT_THROW(parseTraceBinary("MDPTRB02" + good.substr(8)), ParseError);

    std::string badKind = good;
    badKind[8 + 4 + t.name.size() + 8] = 9;
    EXPECT_THROW(parseTraceBinary(badKind), ParseError);

    std::swap(t.events[0].seq, t.events[1].seq);
    EXPECT_THROW(parseTraceBinary(serializeTraceBinary(t)), OrderingError);
}

TEST(TraceFile, LoadDetectsEncoding)
{
    const Trace t = genRandomTrace(100, 64, 3);
    const std::string dir = ::testing::TempDir();
    writeFile(dir + "/t.trace", serializeTrace(t));
    writeFile(dir + "/t.bin", serializeTraceBinary(t));
    EXPECT_EQ(loadTrace(dir + "/t.trace"), t);
    EXPECT_EQ(loadTrace(dir + "/t.bin"), t);
    EXPECT_THROW(loadTrace(dir + "/does-not-exist"), IoError);
}

TEST(TraceEvent, OverlapIsByteGranular)
{
    const auto a = TraceEvent::store(0, 0, 0x100, 8);
    EXPECT_TRUE(a.overlaps(TraceEvent::load(1, 0, 0x107, 1)));
    EXPECT_FALSE(a.overlaps(TraceEvent::load(1, 0, 0x108, 1)));
    EXPECT_FALSE(a.overlaps(TraceEvent::load(1, 0, 0xfc, 4)));
    EXPECT_TRUE(a.overlaps(TraceEvent::load(1, 0, 0xfe, 4)));
}

TEST(TraceValidate, RejectsBadEvents)
{
    Trace t;
    t.events = {TraceEvent::other(1, 0), TraceEvent::other(1, 4)};
    EXPECT_THROW(validateTrace(t), ArgumentError);
    t.events = {TraceEvent::load(0, 0, 0x10, 3)};
    EXPECT_THROW(validateTrace(t), ArgumentError);
    t.events = {TraceEvent::other(0, 0)};
    t.events[0].addr = 4;
    EXPECT_THROW(validateTrace(t), ArgumentError);
    t.events = {TraceEvent::load(0, 0, 0x10, 4), TraceEvent::branch(3, 4, true)};
    EXPECT_NO_THROW(validateTrace(t));
}
