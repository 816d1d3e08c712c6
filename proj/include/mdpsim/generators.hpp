#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "mdpsim/error.hpp"
#include "mdpsim/trace.hpp"

// Synthetic workloads. Every generator is a pure function of its arguments:
// std::mt19937_64 output is fully specified by the standard, and only raw
// engine output (never a std:: distribution) is consumed.

namespace mdpsim {

namespace detail {

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

/// Appends events with consecutive sequence numbers.
class TraceBuilder
{
  public:
    explicit TraceBuilder(std::string name) { t_.name = std::move(name); }

    void load(std::uint64_t pc, std::uint64_t addr, std::uint8_t size)
    { t_.events.push_back(TraceEvent::load(seq_++, pc, addr, size)); }
    void store(std::uint64_t pc, std::uint64_t addr, std::uint8_t size)
    { t_.events.push_back(TraceEvent::store(seq_++, pc, addr, size)); }
    void branch(std::uint64_t pc, bool taken)
    { t_.events.push_back(TraceEvent::branch(seq_++, pc, taken)); }
    void other(std::uint64_t pc)
    { t_.events.push_back(TraceEvent::other(seq_++, pc)); }

    Trace take() { return std::move(t_); }

  private:
    Trace t_;
    std::uint64_t seq_ = 0;
};

/// `count` distinct 4-byte aligned PCs inside [base, base + span).
inline std::vector<std::uint64_t> distinctPcs(std::mt19937_64& rng, std::size_t count,
                                              std::uint64_t base, std::uint64_t span)
{
    std::vector<std::uint64_t> pcs;
    std::unordered_set<std::uint64_t> seen;
    const std::uint64_t slots = span / 4;
    if (count > slots)
        throw ArgumentError("code region too small for requested static instruction count");
    while (pcs.size() < count) {
        std::uint64_t pc = base + 4 * pick(rng, slots);
        if (seen.insert(pc).second)
            pcs.push_back(pc);
    }
    return pcs;
}

} // namespace detail

/// The x264 pixel_avg kernel: dst[x] = (src1[x] + src2[x] + 1) >> 1 over an
/// i_width x i_height block. Each row is walked in chunks; the chunk width
/// picks one of `nVariants` copies of the loop body (widest that fits the
/// remaining pixels), each copy at its own PCs. src1/src2 are never stored to
/// and dst is never loaded from.
inline Trace genPixelAvg(std::uint64_t width, std::uint64_t height, std::uint64_t nVariants,
                         std::uint64_t seed)
{
    if (width == 0 || height == 0 || nVariants == 0)
        throw ArgumentError("genPixelAvg: width, height and variants must be >= 1");

    std::mt19937_64 rng(seed);
    const std::uint64_t codeBase = 0x400000 + 0x1000 * detail::pick(rng, 256);
    const std::uint64_t dataBase = 0x10000000 + 0x100000 * detail::pick(rng, 64);
    const std::uint64_t stride = (width + 63) & ~std::uint64_t(63);
    const std::uint64_t plane = std::max<std::uint64_t>(stride * height, 0x1000);
    const std::uint64_t src1 = dataBase;
    const std::uint64_t src2 = src1 + plane + 0x1000;
    const std::uint64_t dst = src2 + plane + 0x1000;

    // Variant v moves `chunk[v]` bytes per iteration: widest first, 8/4/2/1,
    // then extra variants repeat the 1-byte tail copy.
    std::vector<std::uint8_t> chunk(nVariants);
    for (std::uint64_t v = 0; v < nVariants; ++v) {
        auto shift = nVariants - 1 - v;
        chunk[v] = std::uint8_t(1u << std::min<std::uint64_t>(shift, 3));
    }
    auto bodyPc = [&](std::uint64_t v) { return codeBase + 0x40 * v; };
    const std::uint64_t outerPc = codeBase + 0x40 * nVariants;

    detail::TraceBuilder b("pixel_avg_" + std::to_string(width) + "x" + std::to_string(height) +
                           "_v" + std::to_string(nVariants) + "_s" + std::to_string(seed));
    for (std::uint64_t y = 0; y < height; ++y) {
        std::uint64_t x = 0;
        while (x < width) {
            const std::uint64_t remaining = width - x;
            // Widest fitting chunk; rotate among same-width variants by row.
            std::uint8_t best = 0;
            for (auto c : chunk)
                if (c <= remaining && c > best)
                    best = c;
            std::vector<std::uint64_t> cands;
            for (std::uint64_t v = 0; v < nVariants; ++v)
                if (chunk[v] == best)
                    cands.push_back(v);
            const std::uint64_t v = cands[(y + x) % cands.size()];
            const std::uint64_t pc = bodyPc(v);
            const std::uint64_t off = y * stride + x;
            b.load(pc + 0x00, src1 + off, best);
            b.load(pc + 0x04, src2 + off, best);
            b.other(pc + 0x08);                       // add
            b.other(pc + 0x0c);                       // +1 >> 1
            b.store(pc + 0x10, dst + off, best);
            b.other(pc + 0x14);                       // x += chunk
            x += best;
            b.branch(pc + 0x18, x < width);
        }
        b.other(outerPc);
        b.branch(outerPc + 4, y + 1 < height);
    }
    return b.take();
}

/// `n` store/load pairs whose loads all have store distance exactly
/// `distance`: each pair is separated by distance-1 padding stores to
/// addresses no load ever reads.
inline Trace genDependentChain(std::uint64_t n, std::uint64_t distance, std::uint64_t seed,
                               std::uint64_t nPairs = 1)
{
    if (n == 0 || distance == 0)
        throw ArgumentError("genDependentChain: n and distance must be >= 1");
    if (nPairs == 0 || nPairs > 128)
        throw ArgumentError("genDependentChain: nPairs must be in [1, 128]");

    std::mt19937_64 rng(seed);
    const std::uint64_t codeBase = 0x500000 + 0x1000 * detail::pick(rng, 256);
    const std::uint64_t dataBase = 0x30000000 + 0x100000 * detail::pick(rng, 64);
    const std::uint64_t padBase = dataBase + 0x10000000;
    constexpr std::uint64_t kSlots = 64;

    // Pair k: store at codeBase + 16k, load +4, use +8.
    const std::uint64_t padPc = codeBase + 0x800;  // pad j at padPc + 4j, wraps every 64
    const std::uint64_t loopPc = codeBase + 0xc;

    detail::TraceBuilder b("chain_n" + std::to_string(n) + "_d" + std::to_string(distance) +
                           "_s" + std::to_string(seed));
    std::uint64_t padCursor = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t pair = codeBase + 0x10 * (i % nPairs);
        const std::uint64_t slot = dataBase + 8 * (i % kSlots);
        b.store(pair, slot, 8);
        for (std::uint64_t p = 1; p < distance; ++p) {
            b.store(padPc + 4 * ((p - 1) % 64), padBase + 8 * padCursor, 8);
            padCursor = (padCursor + 1) % (1u << 20);
        }
        b.load(pair + 0x4, slot, 8);
        b.other(pair + 0x8);
        b.branch(loopPc, i + 1 < n);
    }
    return b.take();
}

/// Many static loads and stores touching disjoint regions, so no load ever
/// depends on a store. PCs are scattered over a small code region, which
/// packs far more static instructions than a small SSIT has rows. The body
/// executes `rounds` times.
inline Trace genAliasStorm(std::uint64_t nStaticLoads, std::uint64_t nStaticStores,
                           std::uint64_t seed, std::uint64_t rounds = 64)
{
    if (nStaticLoads == 0 || nStaticStores == 0 || rounds == 0)
        throw ArgumentError("genAliasStorm: counts must be >= 1");

    std::mt19937_64 rng(seed);
    const std::uint64_t codeBase = 0x600000 + 0x10000 * detail::pick(rng, 64);
    const std::uint64_t codeSpan = 4 * 4 * (nStaticLoads + nStaticStores + 64);
    auto pcs = detail::distinctPcs(rng, nStaticLoads + nStaticStores + 1, codeBase, codeSpan);
    const std::uint64_t loopPc = pcs.back();

    const std::uint64_t loadBase = 0x50000000 + 0x100000 * detail::pick(rng, 64);
    const std::uint64_t storeBase = loadBase + 0x20000000;
    // Each static op walks its own 4 KiB window.
    constexpr std::uint64_t kWindow = 0x1000;

    detail::TraceBuilder b("alias_storm_l" + std::to_string(nStaticLoads) + "_s" +
                           std::to_string(nStaticStores) + "_s" + std::to_string(seed));
    const std::uint64_t width = std::max(nStaticLoads, nStaticStores);
    for (std::uint64_t r = 0; r < rounds; ++r) {
        const std::uint64_t off = (8 * r) % kWindow;
        for (std::uint64_t k = 0; k < width; ++k) {
            if (k < nStaticLoads)
                b.load(pcs[k], loadBase + kWindow * k + off, 8);
            if (k < nStaticStores)
                b.store(pcs[nStaticLoads + k], storeBase + kWindow * k + off, 8);
            if (k % 2 == 1)
                b.other(pcs[k % nStaticLoads] + 2 * 0x100000);
        }
        b.branch(loopPc, r + 1 < rounds);
    }
    return b.take();
}

/// Unstructured memory traffic over a small address pool. Dense aliasing,
/// mixed access sizes and partial overlaps; used as a property-test input.
inline Trace genRandomTrace(std::uint64_t nEvents, std::uint64_t poolBytes, std::uint64_t seed,
                            std::uint64_t nStaticPcs = 32)
{
    if (poolBytes < 8 || nStaticPcs == 0)
        throw ArgumentError("genRandomTrace: pool must hold at least one 8-byte access");
    std::mt19937_64 rng(seed);
    static constexpr std::array<std::uint8_t, 4> kSizes{1, 2, 4, 8};
    detail::TraceBuilder b("random_n" + std::to_string(nEvents) + "_p" +
                           std::to_string(poolBytes) + "_s" + std::to_string(seed));
    const std::uint64_t base = 0x70000000;
    for (std::uint64_t i = 0; i < nEvents; ++i) {
        const std::uint64_t pc = 0x800000 + 4 * detail::pick(rng, nStaticPcs);
        const auto roll = detail::pick(rng, 10);
        const std::uint8_t size = kSizes[detail::pick(rng, 4)];
        const std::uint64_t addr = base + (detail::pick(rng, poolBytes - size + 1) & ~std::uint64_t(size - 1));
        if (roll < 4)
            b.load(pc, addr, size);
        else if (roll < 7)
            b.store(pc | 0x1000, addr, size);
        else if (roll < 8)
            b.branch(pc | 0x2000, detail::pick(rng, 2) == 1);
        else
            b.other(pc | 0x3000);
    }
    return b.take();
}

/// Round-robin interleaving of `blockLen`-event slices from each component.
/// Component k is relocated to its own code (pc + k<<28) and data
/// (addr + k<<40) space so components never alias each other; sequence
/// numbers are renumbered from zero.
inline Trace interleaveTraces(std::string name, const std::vector<Trace>& parts,
                              std::uint64_t blockLen = 64)
{
    if (blockLen == 0)
        throw ArgumentError("interleaveTraces: blockLen must be >= 1");
    Trace out;
    out.name = std::move(name);
    std::vector<std::size_t> cursor(parts.size(), 0);
    std::uint64_t seq = 0;
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const auto& ev = parts[k].events;
            for (std::uint64_t j = 0; j < blockLen && cursor[k] < ev.size(); ++j) {
                TraceEvent e = ev[cursor[k]++];
                e.seq = seq++;
                e.pc += std::uint64_t(k) << 28;
                if (e.isMem())
                    e.addr += std::uint64_t(k) << 40;
                out.events.push_back(e);
                progress = true;
            }
        }
    }
    return out;
}

} // namespace mdpsim
