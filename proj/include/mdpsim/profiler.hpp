#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdpsim/error.hpp"
#include "mdpsim/trace.hpp"

namespace mdpsim {

/// Store distance: 1-based position, youngest first, of the first older
/// store whose bytes overlap the load. kInfiniteDistance when none does.
using StoreDistance = std::uint64_t;

inline constexpr StoreDistance kInfiniteDistance = std::numeric_limits<std::uint64_t>::max();

/// Histograms keep exact distances up to this cap. Anything longer lands in
/// the overflow bucket, which compares above every admissible threshold.
inline constexpr StoreDistance kDistanceCap = 1u << 16;
inline constexpr StoreDistance kOverflowDistance = kDistanceCap + 1;

inline std::string distanceToString(StoreDistance d)
{
    if (d == kInfiniteDistance)
        return "inf";
    if (d == kOverflowDistance)
        return "ovf";
    return std::to_string(d);
}

inline bool parseDistance(std::string_view s, StoreDistance& d)
{
    if (s == "inf") { d = kInfiniteDistance; return true; }
    if (s == "ovf") { d = kOverflowDistance; return true; }
    std::uint64_t v = 0;
    if (!detail::parseDec(s, v) || v == 0 || v > kOverflowDistance)
        return false;
    d = v;
    return true;
}

/// Brute-force ground truth: walks backwards from the load, counting stores.
inline StoreDistance storeDistanceOracle(const Trace& t, std::size_t loadIndex)
{
    if (loadIndex >= t.events.size())
        throw ArgumentError("storeDistanceOracle: index out of range");
    const auto& load = t.events[loadIndex];
    if (!load.isLoad())
        throw ArgumentError("storeDistanceOracle: event is not a load");
    StoreDistance n = 0;
    for (std::size_t i = loadIndex; i-- > 0;) {
        const auto& e = t.events[i];
        if (!e.isStore())
            continue;
        ++n;
        if (e.overlaps(load))
            return n;
    }
    return kInfiniteDistance;
}

/// Single streaming pass computing the distance of every dynamic load, in
/// trace order. Tracks the ordinal of the last store to write each byte.
inline std::vector<StoreDistance> computeStoreDistances(const Trace& t)
{
    std::vector<StoreDistance> out;
    std::unordered_map<std::uint64_t, std::uint64_t> lastWriter;
    std::uint64_t stores = 0;
    for (const auto& e : t.events) {
        if (e.isStore()) {
            ++stores;
            for (std::uint64_t b = 0; b < e.size; ++b)
                lastWriter[e.addr + b] = stores;
        } else if (e.isLoad()) {
            std::uint64_t youngest = 0;
            for (std::uint64_t b = 0; b < e.size; ++b) {
                auto it = lastWriter.find(e.addr + b);
                if (it != lastWriter.end() && it->second > youngest)
                    youngest = it->second;
            }
            out.push_back(youngest == 0 ? kInfiniteDistance : stores - youngest + 1);
        }
    }
    return out;
}

struct DistanceHistogram
{
    std::map<StoreDistance, std::uint64_t> buckets;
    std::uint64_t total = 0;

    void add(StoreDistance d, std::uint64_t count = 1)
    {
        if (count == 0)
            return;
        if (d != kInfiniteDistance && d > kDistanceCap)
            d = kOverflowDistance;
        buckets[d] += count;
        total += count;
    }

    bool empty() const { return total == 0; }
    bool operator==(const DistanceHistogram&) const = default;
};

struct StoreDistanceProfile
{
    std::map<std::uint64_t, DistanceHistogram> perPc;

    std::uint64_t totalExecutions(std::uint64_t pc) const
    {
        auto it = perPc.find(pc);
        return it == perPc.end() ? 0 : it->second.total;
    }

    bool contains(std::uint64_t pc) const { return perPc.count(pc) != 0; }
    bool empty() const { return perPc.empty(); }
    bool operator==(const StoreDistanceProfile&) const = default;
};

inline StoreDistanceProfile profileTrace(const Trace& t)
{
    StoreDistanceProfile p;
    auto distances = computeStoreDistances(t);
    std::size_t k = 0;
    for (const auto& e : t.events)
        if (e.isLoad())
            p.perPc[e.pc].add(distances[k++]);
    return p;
}

/// Pointwise histogram sum.
inline StoreDistanceProfile mergeProfiles(const std::vector<StoreDistanceProfile>& ps)
{
    StoreDistanceProfile out;
    for (const auto& p : ps)
        for (const auto& [pc, h] : p.perPc)
            for (const auto& [d, c] : h.buckets)
                out.perPc[pc].add(d, c);
    return out;
}

/// A distance seen in at least `confidence` of executions wins; otherwise
/// the shortest observed distance.
inline StoreDistance selectDistance(const DistanceHistogram& h, double confidence = 0.95)
{
    if (h.empty())
        throw ArgumentError("selectDistance: empty histogram");
    for (const auto& [d, c] : h.buckets)
        if (double(c) / double(h.total) >= confidence)
            return d;
    return h.buckets.begin()->first;
}

struct LabelSet
{
    std::set<std::uint64_t> pcs;
    StoreDistance threshold = 1;
    std::string source;

    bool contains(std::uint64_t pc) const { return pcs.count(pc) != 0; }
    std::size_t size() const { return pcs.size(); }
    bool empty() const { return pcs.empty(); }
};

/// Labels every profiled load whose selected distance is >= threshold.
inline LabelSet labelLoads(const StoreDistanceProfile& p, StoreDistance threshold,
                           double confidence = 0.95, std::string source = {})
{
    if (threshold < 1)
        throw ArgumentError("labelLoads: threshold must be >= 1");
    LabelSet out;
    out.threshold = threshold;
    out.source = std::move(source);
    for (const auto& [pc, h] : p.perPc)
        if (!h.empty() && selectDistance(h, confidence) >= threshold)
            out.pcs.insert(pc);
    return out;
}

/// Train-vs-reference label agreement over the static loads of the
/// reference profile.
struct ProfileComparison
{
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0, missing = 0;

    std::uint64_t total() const { return tp + tn + fp + fn + missing; }
    double percent(std::uint64_t part) const
    { return total() == 0 ? 0.0 : 100.0 * double(part) / double(total()); }
    bool operator==(const ProfileComparison&) const = default;
};

inline ProfileComparison compareLabelSets(const LabelSet& trainLabels,
                                          const StoreDistanceProfile& trainProfile,
                                          const LabelSet& refLabels,
                                          const StoreDistanceProfile& refProfile)
{
    if (trainLabels.threshold != refLabels.threshold)
        throw ArgumentError("compareLabelSets: label sets use different thresholds");
    ProfileComparison c;
    for (const auto& [pc, h] : refProfile.perPc) {
        if (!trainProfile.contains(pc)) {
            ++c.missing;
            continue;
        }
        const bool train = trainLabels.contains(pc);
        const bool ref = refLabels.contains(pc);
        if (train && ref) ++c.tp;
        else if (train)   ++c.fp;
        else if (ref)     ++c.fn;
        else              ++c.tn;
    }
    return c;
}

/// "TP 78.54%, TN 17.58%, FP 0.59%, FN 0.42%, Missing 2.87%"
inline std::string formatComparison(const ProfileComparison& c)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "TP %.2f%%, TN %.2f%%, FP %.2f%%, FN %.2f%%, Missing %.2f%%",
                  c.percent(c.tp), c.percent(c.tn), c.percent(c.fp), c.percent(c.fn),
                  c.percent(c.missing));
    return buf;
}

// ---------------------------------------------------------------------------
// File formats

inline constexpr std::string_view kProfileHeader = "#mdp-profile v1";
inline constexpr std::string_view kLabelHeader = "#mdp-labels v1 threshold=";

inline std::string serializeProfile(const StoreDistanceProfile& p)
{
    std::string out(kProfileHeader);
    out += '\n';
    for (const auto& [pc, h] : p.perPc) {
        out += "pc=";
        detail::appendHex(out, pc);
        out += " total=";
        detail::appendDec(out, h.total);
        for (const auto& [d, c] : h.buckets) {
            out += " dist:";
            out += distanceToString(d);
            out += '=';
            detail::appendDec(out, c);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

/// Yields (offset, line) for each line of `bytes`, with '\r' stripped.
template <typename Fn>
void forEachLine(std::string_view bytes, Fn&& fn)
{
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        auto nl = bytes.find('\n', pos);
        auto end = nl == std::string_view::npos ? bytes.size() : nl;
        auto line = bytes.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        fn(pos, line);
        pos = end + 1;
    }
}

} // namespace detail

inline StoreDistanceProfile parseProfile(std::string_view bytes)
{
    auto nl = bytes.find('\n');
    auto header = bytes.substr(0, nl);
    if (!header.empty() && header.back() == '\r')
        header.remove_suffix(1);
    if (header != kProfileHeader)
        throw ParseError("missing profile header", 0);
    StoreDistanceProfile p;
    if (nl == std::string_view::npos)
        return p;
    const std::size_t bodyStart = nl + 1;
    detail::forEachLine(bytes.substr(bodyStart), [&](std::size_t rel, std::string_view line) {
        const std::size_t at = bodyStart + rel;
        if (line.empty() || line.front() == '#')
            return;
        auto toks = detail::splitSpaces(line);
        std::uint64_t pc = 0, total = 0;
        if (toks.size() < 2 || toks[0].substr(0, 3) != "pc=" ||
            !detail::parseHex(toks[0].substr(3), pc))
            throw ParseError("expected pc=<hex>", at);
        if (toks[1].substr(0, 6) != "total=" || !detail::parseDec(toks[1].substr(6), total))
            throw ParseError("expected total=<dec>", at);
        if (p.perPc.count(pc))
            throw ParseError("duplicate pc", at);
        DistanceHistogram h;
        for (std::size_t i = 2; i < toks.size(); ++i) {
            auto tok = toks[i];
            auto eq = tok.find('=');
            StoreDistance d = 0;
            std::uint64_t c = 0;
            if (tok.substr(0, 5) != "dist:" || eq == std::string_view::npos ||
                !parseDistance(tok.substr(5, eq - 5), d) ||
                !detail::parseDec(tok.substr(eq + 1), c) || c == 0)
                throw ParseError("bad distance bucket '" + std::string(tok) + "'", at);
            if (h.buckets.count(d))
                throw ParseError("duplicate distance bucket", at);
            h.add(d, c);
        }
        if (h.total != total)
            throw ParseError("bucket counts do not sum to total", at);
        if (h.empty())
            throw ParseError("empty histogram", at);
        p.perPc.emplace(pc, std::move(h));
    });
    return p;
}

inline std::string serializeLabels(const LabelSet& l)
{
    std::string out(kLabelHeader);
    out += distanceToString(l.threshold);
    out += '\n';
    for (auto pc : l.pcs) {
        detail::appendHex(out, pc);
        out += '\n';
    }
    return out;
}

inline LabelSet parseLabels(std::string_view bytes, std::string source = {})
{
    auto nl = bytes.find('\n');
    auto header = bytes.substr(0, nl);
    if (!header.empty() && header.back() == '\r')
        header.remove_suffix(1);
    LabelSet l;
    l.source = std::move(source);
    if (header.substr(0, kLabelHeader.size()) != kLabelHeader ||
        !parseDistance(header.substr(kLabelHeader.size()), l.threshold))
        throw ParseError("missing label header", 0);
    if (nl == std::string_view::npos)
        return l;
    const std::size_t bodyStart = nl + 1;
    detail::forEachLine(bytes.substr(bodyStart), [&](std::size_t rel, std::string_view line) {
        if (line.empty() || line.front() == '#')
            return;
        std::uint64_t pc = 0;
        if (!detail::parseHex(line, pc))
            throw ParseError("expected hex pc", bodyStart + rel);
        l.pcs.insert(pc);
    });
    return l;
}

} // namespace mdpsim
