#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdpsim/predictor.hpp"

namespace mdpsim {

struct PhastConfig
{
    std::uint32_t rows = 128;
    std::uint32_t assoc = 4;
    std::uint32_t tagBits = 16;
    std::vector<unsigned> historyLengths{2, 8, 32, 128};
};

struct PhastWay
{
    bool valid = false;
    std::uint32_t tag = 0;
    std::uint64_t storePc = 0;
    std::uint8_t useful = 0;

    bool operator==(const PhastWay&) const = default;
};

struct PhastState
{
    /// tables[t][row * assoc + way]
    std::vector<std::vector<PhastWay>> tables;

    bool operator==(const PhastState&) const = default;
};

/// Tagged, set-associative tables indexed by load PC hashed with
/// geometrically longer slices of global branch history. Entries remember
/// the PC of the store the load conflicted with; a hit is turned into the
/// youngest in-flight instance of that store.
///
/// This is a reduced model: allocation goes to the shortest table that
/// misses, replacement takes the least-useful way (lowest index on ties),
/// and usefulness is a 2-bit counter moved by prediction outcomes.
class Phast final : public MemDepPredictor
{
  public:
    static constexpr std::uint8_t kUsefulMax = 3;

    explicit Phast(PhastConfig cfg) : cfg_(std::move(cfg))
    {
        if (cfg_.rows == 0 || !std::has_single_bit(cfg_.rows))
            throw ConfigError("phast_rows must be a power of two");
        if (cfg_.assoc == 0)
            throw ConfigError("phast_assoc must be >= 1");
        if (cfg_.tagBits == 0 || cfg_.tagBits > 32)
            throw ConfigError("phast_tag_bits must be in [1, 32]");
        if (cfg_.historyLengths.empty())
            throw ConfigError("phast_lengths must not be empty");
        for (std::size_t i = 0; i < cfg_.historyLengths.size(); ++i) {
            if (cfg_.historyLengths[i] > BranchHistory::kMaxBits)
                throw ConfigError("phast history length too long");
            if (i > 0 && cfg_.historyLengths[i] <= cfg_.historyLengths[i - 1])
                throw ConfigError("phast_lengths must be strictly increasing");
        }
        state_.tables.assign(cfg_.historyLengths.size(),
                             std::vector<PhastWay>(std::size_t(cfg_.rows) * cfg_.assoc));
    }

    Prediction queryLoad(const LoadQuery& q) override
    {
        Prediction p;
        if (auto hit = provider(q.pc, q.history)) {
            const auto& way = state_.tables[hit->table][hit->slot];
            auto it = inflightByPc_.find(way.storePc);
            if (it != inflightByPc_.end() && !it->second.empty())
                p.waitFor.push_back(it->second.back());
        }
        return counted(std::move(p));
    }

    void registerStore(const StoreInfo& s) override
    {
        inflightByPc_[s.pc].push_back(s.seq);
        pcOf_[s.seq] = s.pc;
    }

    void storeExecuted(std::uint64_t seq) override
    {
        auto it = pcOf_.find(seq);
        if (it == pcOf_.end())
            return;
        auto& seqs = inflightByPc_[it->second];
        seqs.erase(std::remove(seqs.begin(), seqs.end(), seq), seqs.end());
        if (seqs.empty())
            inflightByPc_.erase(it->second);
        pcOf_.erase(it);
    }

    void trainViolation(const ViolationInfo& v) override
    {
        std::optional<Hit> longest;
        std::optional<std::size_t> shortestMiss;
        for (std::size_t t = 0; t < state_.tables.size(); ++t) {
            if (auto h = lookup(t, v.loadPc, v.history))
                longest = h;
            else if (!shortestMiss)
                shortestMiss = t;
        }
        if (longest)
            state_.tables[longest->table][longest->slot].storePc = v.storePc;
        if (!shortestMiss)
            return;

        const std::size_t t = *shortestMiss;
        auto& table = state_.tables[t];
        const std::size_t base = std::size_t(rowOf(t, v.loadPc, v.history)) * cfg_.assoc;
        std::size_t victim = base;
        for (std::size_t w = base; w < base + cfg_.assoc; ++w) {
            if (!table[w].valid) { victim = w; break; }
            if (table[w].useful < table[victim].useful)
                victim = w;
        }
        table[victim] = PhastWay{true, tagOf(t, v.loadPc, v.history), v.storePc, 0};
    }

    void predictionOutcome(const LoadQuery& q, std::uint64_t storePc, bool correct) override
    {
        auto hit = provider(q.pc, q.history);
        if (!hit)
            return;
        auto& way = state_.tables[hit->table][hit->slot];
        if (way.storePc != storePc)
            return;
        if (correct && way.useful < kUsefulMax)
            ++way.useful;
        else if (!correct && way.useful > 0)
            --way.useful;
    }

    std::vector<std::size_t> tablePopulation() const override
    {
        std::vector<std::size_t> out;
        for (const auto& table : state_.tables)
            out.push_back(std::size_t(std::count_if(table.begin(), table.end(),
                                                    [](const PhastWay& w) { return w.valid; })));
        return out;
    }

    std::string name() const override { return "phast"; }

    struct Hit
    {
        std::size_t table;
        std::size_t slot;
    };

    /// Longest-history table holding a tag match for this context.
    std::optional<Hit> provider(std::uint64_t pc, const BranchHistory* h) const
    {
        for (std::size_t t = state_.tables.size(); t-- > 0;)
            if (auto hit = lookup(t, pc, h))
                return hit;
        return std::nullopt;
    }

    std::optional<Hit> lookup(std::size_t t, std::uint64_t pc, const BranchHistory* h) const
    {
        const std::size_t base = std::size_t(rowOf(t, pc, h)) * cfg_.assoc;
        const std::uint32_t tag = tagOf(t, pc, h);
        const auto& table = state_.tables[t];
        for (std::size_t w = base; w < base + cfg_.assoc; ++w)
            if (table[w].valid && table[w].tag == tag)
                return Hit{t, w};
        return std::nullopt;
    }

    std::uint32_t rowOf(std::size_t t, std::uint64_t pc, const BranchHistory* h) const
    {
        const unsigned bits = std::countr_zero(cfg_.rows);
        const std::uint64_t hist = h ? h->fold(cfg_.historyLengths[t], bits) : 0;
        const std::uint64_t p = pc >> 2;
        return std::uint32_t((p ^ (p >> bits) ^ hist ^ (t * 0x9e37)) & (cfg_.rows - 1));
    }

    std::uint32_t tagOf(std::size_t t, std::uint64_t pc, const BranchHistory* h) const
    {
        const unsigned len = cfg_.historyLengths[t];
        const std::uint64_t h1 = h ? h->fold(len, cfg_.tagBits) : 0;
        const std::uint64_t h2 = h && cfg_.tagBits > 1 ? h->fold(len, cfg_.tagBits - 1) : 0;
        const std::uint64_t p = pc >> 2;
        const std::uint64_t mask = (std::uint64_t(1) << cfg_.tagBits) - 1;
        return std::uint32_t((p ^ (p >> cfg_.tagBits) ^ h1 ^ (h2 << 1)) & mask);
    }

    const PhastState& state() const { return state_; }
    const PhastConfig& config() const { return cfg_; }

  private:
    PhastConfig cfg_;
    PhastState state_;
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> inflightByPc_;
    std::unordered_map<std::uint64_t, std::uint64_t> pcOf_;  // store seq -> pc
};

} // namespace mdpsim
