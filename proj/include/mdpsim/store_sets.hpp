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

/// XOR-folds `pc` down to log2(entries) bits. `entries` must be a power of two.
inline std::uint32_t ssitIndex(std::uint64_t pc, std::uint32_t entries)
{
    const unsigned bits = std::countr_zero(entries);
    if (bits == 0)
        return 0;
    std::uint64_t acc = 0;
    for (; pc != 0; pc >>= bits)
        acc ^= pc;
    return std::uint32_t(acc & (entries - 1));
}

/// Number of PCs that share an SSIT row with at least one other PC.
inline std::size_t ssitCollisions(const std::vector<std::uint64_t>& pcs, std::uint32_t entries)
{
    std::unordered_map<std::uint32_t, std::size_t> rows;
    for (auto pc : pcs)
        ++rows[ssitIndex(pc, entries)];
    std::size_t n = 0;
    for (const auto& [row, count] : rows)
        if (count > 1)
            n += count;
    return n;
}

struct StoreSetsConfig
{
    std::uint32_t ssitEntries = 64;
    std::uint32_t lfstEntries = 32;
    std::uint32_t slots = 2;              // 1 = original Store Sets
    std::uint64_t clearPeriod = 125000;   // memory ops; 0 disables clearing
};

struct StoreSetsState
{
    std::vector<std::optional<std::uint32_t>> ssit;
    /// Per LFST row, in-flight store seqs oldest first, at most `slots`.
    std::vector<std::vector<std::uint64_t>> lfst;
    std::uint64_t opsSinceClear = 0;
    std::uint32_t nextSsid = 0;

    bool operator==(const StoreSetsState&) const = default;
};

/// Store Sets with a multi-slot LFST. With one slot this is the original
/// algorithm (each new store overwrites the entry); with more, stores queue
/// FIFO and the oldest is evicted when the row is full.
class StoreSets final : public MemDepPredictor
{
  public:
    explicit StoreSets(const StoreSetsConfig& cfg) : cfg_(cfg)
    {
        if (cfg.ssitEntries == 0 || !std::has_single_bit(cfg.ssitEntries))
            throw ConfigError("ssit_entries must be a power of two");
        if (cfg.lfstEntries == 0)
            throw ConfigError("lfst_entries must be >= 1");
        if (cfg.slots == 0)
            throw ConfigError("slots must be >= 1");
        state_.ssit.assign(cfg.ssitEntries, std::nullopt);
        state_.lfst.assign(cfg.lfstEntries, {});
    }

    Prediction queryLoad(const LoadQuery& q) override
    {
        Prediction p;
        if (const auto& ssid = state_.ssit[index(q.pc)])
            p.waitFor = state_.lfst[*ssid % cfg_.lfstEntries];
        return counted(std::move(p));
    }

    void registerStore(const StoreInfo& s) override
    {
        const auto& ssid = state_.ssit[index(s.pc)];
        if (!ssid)
            return;
        const std::uint32_t row = *ssid % cfg_.lfstEntries;
        auto& slots = state_.lfst[row];
        if (slots.size() == cfg_.slots) {
            rowOf_.erase(slots.front());
            slots.erase(slots.begin());
        }
        slots.push_back(s.seq);
        rowOf_[s.seq] = row;
    }

    void storeExecuted(std::uint64_t seq) override
    {
        auto it = rowOf_.find(seq);
        if (it == rowOf_.end())
            return;
        auto& slots = state_.lfst[it->second];
        slots.erase(std::remove(slots.begin(), slots.end(), seq), slots.end());
        rowOf_.erase(it);
    }

    void trainViolation(const ViolationInfo& v) override
    {
        auto& load = state_.ssit[index(v.loadPc)];
        auto& store = state_.ssit[index(v.storePc)];
        if (!load && !store) {
            const std::uint32_t ssid = state_.nextSsid;
            state_.nextSsid = (state_.nextSsid + 1) % cfg_.lfstEntries;
            load = ssid;
            store = ssid;
        } else if (!load) {
            load = store;
        } else if (!store) {
            store = load;
        } else {
            const std::uint32_t winner = std::min(*load, *store);
            load = winner;
            store = winner;
        }
    }

    void tick(std::uint64_t memOps) override
    {
        if (cfg_.clearPeriod == 0)
            return;
        state_.opsSinceClear += memOps;
        if (state_.opsSinceClear >= cfg_.clearPeriod) {
            clear();
            state_.opsSinceClear %= cfg_.clearPeriod;
        }
    }

    void clear()
    {
        std::fill(state_.ssit.begin(), state_.ssit.end(), std::nullopt);
        for (auto& row : state_.lfst)
            row.clear();
        rowOf_.clear();
    }

    std::vector<std::size_t> tablePopulation() const override
    {
        std::size_t ssit = 0, lfst = 0;
        for (const auto& e : state_.ssit)
            ssit += e.has_value();
        for (const auto& row : state_.lfst)
            lfst += row.size();
        return {ssit, lfst};
    }

    std::string name() const override { return cfg_.slots == 1 ? "storesets" : "xs_storesets"; }

    std::uint32_t index(std::uint64_t pc) const { return ssitIndex(pc, cfg_.ssitEntries); }
    const StoreSetsState& state() const { return state_; }
    const StoreSetsConfig& config() const { return cfg_; }

  private:
    StoreSetsConfig cfg_;
    StoreSetsState state_;
    std::unordered_map<std::uint64_t, std::uint32_t> rowOf_;  // store seq -> LFST row
};

} // namespace mdpsim
