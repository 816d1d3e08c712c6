#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mdpsim/error.hpp"
#include "mdpsim/history.hpp"
#include "mdpsim/predictor.hpp"
#include "mdpsim/predictor_config.hpp"
#include "mdpsim/profiler.hpp"
#include "mdpsim/trace.hpp"

namespace mdpsim {

struct CoreConfig
{
    std::string name = "custom";
    std::uint32_t rob = 128;
    std::uint32_t iq = 77;
    std::uint32_t lq = 38;
    std::uint32_t sq = 22;
    std::uint32_t fetchWidth = 4;     // also the commit width
    std::uint32_t issueWidth = 8;
    std::uint32_t mdpReadPorts = 0;   // 0 = unlimited
    std::uint32_t execLatencyLoad = 8;
    std::uint32_t execLatencyStoreAddr = 16;
    std::uint32_t execLatencyOther = 1;
    std::uint32_t flushPenalty = 10;

    void validate() const
    {
        auto need = [](bool ok, const char* what) {
            if (!ok)
                throw ConfigError(what);
        };
        need(rob >= 1 && iq >= 1 && lq >= 1 && sq >= 1, "rob, iq, lq and sq must be >= 1");
        need(lq <= rob && sq <= rob, "lq and sq must not exceed rob");
        need(iq <= rob, "iq must not exceed rob");
        need(fetchWidth >= 1 && issueWidth >= 1, "fetch and issue width must be >= 1");
        need(execLatencyLoad >= 1 && execLatencyStoreAddr >= 1 && execLatencyOther >= 1,
             "execution latencies must be >= 1");
    }
};

/// Window, width, predictor and threshold settings of the small / medium /
/// large evaluation cores. Caches, prefetcher and branch predictor are not
/// modelled, so their rows have no counterpart here.
struct CorePreset
{
    CoreConfig core;
    PredictorConfig predictor;
    StoreDistance threshold = 8;
};

inline CorePreset smallCore()
{
    CorePreset p;
    p.core.name = "small";
    p.core.rob = 128; p.core.iq = 77; p.core.lq = 38; p.core.sq = 22;
    p.core.fetchWidth = 4; p.core.issueWidth = 8;
    p.predictor.kind = PredictorKind::XsStoreSets;
    p.predictor.ssitEntries = 64; p.predictor.lfstEntries = 32;
    p.predictor.slots = 2; p.predictor.clearPeriod = 125000;
    p.threshold = 8;
    return p;
}

inline CorePreset mediumCore()
{
    CorePreset p;
    p.core.name = "medium";
    p.core.rob = 256; p.core.iq = 154; p.core.lq = 77; p.core.sq = 54;
    p.core.fetchWidth = 6; p.core.issueWidth = 8;
    p.predictor.kind = PredictorKind::XsStoreSets;
    p.predictor.ssitEntries = 256; p.predictor.lfstEntries = 128;
    p.predictor.slots = 2; p.predictor.clearPeriod = 125000;
    p.threshold = 13;
    return p;
}

inline CorePreset largeCore()
{
    CorePreset p;
    p.core.name = "large";
    p.core.rob = 512; p.core.iq = 308; p.core.lq = 154; p.core.sq = 108;
    p.core.fetchWidth = 8; p.core.issueWidth = 12;
    p.predictor.kind = PredictorKind::Phast;
    p.predictor.phastRows = 128; p.predictor.phastAssoc = 4; p.predictor.phastTagBits = 16;
    p.threshold = 51;
    return p;
}

inline CorePreset corePreset(const std::string& name)
{
    if (name == "small")  return smallCore();
    if (name == "medium") return mediumCore();
    if (name == "large")  return largeCore();
    throw ConfigError("unknown core preset '" + name + "'");
}

struct SimReport
{
    // Run identification.
    std::string trace;
    std::string core;
    std::string predictor;
    std::uint32_t ssit = 0;          // 0 when not a Store Sets run
    std::uint32_t lfst = 0;
    std::uint32_t ports = 0;
    std::optional<StoreDistance> threshold;  // set for labelled runs

    // Raw counters.
    std::uint64_t cycles = 0;
    std::uint64_t instructions = 0;
    std::uint64_t mdpQueries = 0;
    std::uint64_t falseDeps = 0;
    std::uint64_t violations = 0;
    std::uint64_t flushes = 0;
    std::uint64_t bypassedLoads = 0;
    std::uint64_t loadsDispatched = 0;
    std::uint64_t inflightTrueDeps = 0;  // loads dispatched with an overlapping older store still in the SQ

    double ipc() const { return cycles == 0 ? 0.0 : double(instructions) / double(cycles); }
    double perKi(std::uint64_t n) const
    { return instructions == 0 ? 0.0 : 1e3 * double(n) / double(instructions); }
    double queriesPerKi() const { return perKi(mdpQueries); }
    double falseDepsPerKi() const { return perKi(falseDeps); }
    double violationsPerMi() const
    { return instructions == 0 ? 0.0 : 1e6 * double(violations) / double(instructions); }

    bool operator==(const SimReport&) const = default;
};

inline std::string formatFixed(double v, int digits = 6)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline constexpr const char* kReportCsvHeader =
    "trace,predictor,ssit,lfst,ports,threshold,cycles,instructions,ipc,queries_per_ki,"
    "false_deps_per_ki,violations_per_mi,flushes,bypassed";

inline std::string reportCsvRow(const SimReport& r)
{
    std::string s;
    s += r.trace + ',' + r.predictor + ',';
    s += (r.ssit ? std::to_string(r.ssit) : "-") + ',';
    s += (r.lfst ? std::to_string(r.lfst) : "-") + ',';
    s += std::to_string(r.ports) + ',';
    s += (r.threshold ? distanceToString(*r.threshold) : std::string("none")) + ',';
    s += std::to_string(r.cycles) + ',' + std::to_string(r.instructions) + ',';
    s += formatFixed(r.ipc()) + ',' + formatFixed(r.queriesPerKi()) + ',';
    s += formatFixed(r.falseDepsPerKi()) + ',' + formatFixed(r.violationsPerMi()) + ',';
    s += std::to_string(r.flushes) + ',' + std::to_string(r.bypassedLoads);
    return s;
}

inline std::string reportKeyValues(const SimReport& r)
{
    std::string s;
    auto kv = [&](const char* k, const std::string& v) { s += k; s += '='; s += v; s += '\n'; };
    kv("trace", r.trace);
    kv("core", r.core);
    kv("predictor", r.predictor);
    kv("ssit", std::to_string(r.ssit));
    kv("lfst", std::to_string(r.lfst));
    kv("ports", std::to_string(r.ports));
    kv("threshold", r.threshold ? distanceToString(*r.threshold) : "none");
    kv("cycles", std::to_string(r.cycles));
    kv("instructions", std::to_string(r.instructions));
    kv("ipc", formatFixed(r.ipc()));
    kv("mdp_queries", std::to_string(r.mdpQueries));
    kv("queries_per_ki", formatFixed(r.queriesPerKi()));
    kv("false_deps", std::to_string(r.falseDeps));
    kv("false_deps_per_ki", formatFixed(r.falseDepsPerKi()));
    kv("violations", std::to_string(r.violations));
    kv("violations_per_mi", formatFixed(r.violationsPerMi()));
    kv("flushes", std::to_string(r.flushes));
    kv("bypassed", std::to_string(r.bypassedLoads));
    return s;
}

/// Percent change from `base` to `now`. 0 -> 0 is 0%, 0 -> x is +inf.
inline double percentChange(double base, double now)
{
    if (base == 0.0)
        return now == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 100.0 * (now - base) / base;
}

struct DeltaReport
{
    double ipcPct = 0;
    double queriesPerKiPct = 0;
    double falseDepsPerKiPct = 0;
    double violationsPerMiPct = 0;
};

/// Baseline-vs-labelled deltas. Both runs must cover the same trace on the
/// same core.
inline DeltaReport compareRuns(const SimReport& base, const SimReport& pg)
{
    if (base.trace != pg.trace || base.core != pg.core || base.instructions != pg.instructions)
        throw ArgumentError("compareRuns: reports are from different traces or cores");
    return {percentChange(base.ipc(), pg.ipc()),
            percentChange(base.queriesPerKi(), pg.queriesPerKi()),
            percentChange(base.falseDepsPerKi(), pg.falseDepsPerKi()),
            percentChange(base.violationsPerMi(), pg.violationsPerMi())};
}

namespace detail {

struct InFlight
{
    std::size_t idx = 0;          // trace position
    std::uint64_t seq = 0;        // dynamic sequence number
    const TraceEvent* ev = nullptr;
    std::uint64_t readyCycle = 0;
    std::uint64_t doneCycle = 0;
    bool issued = false;
    bool done = false;

    // Loads.
    bool labelled = false;
    std::vector<std::uint64_t> waitFor;   // unresolved predicted stores
    std::uint64_t forwardSeq = 0;         // youngest store forwarded from, 0 = none
    BranchHistory history;                // GHR at dispatch, for training and refetch
};

/// One simulation: owns the window; the predictor is borrowed.
class Pipeline
{
  public:
    Pipeline(const Trace& trace, const CoreConfig& cfg, MemDepPredictor& mdp,
             const BypassWrapper* labels)
        : trace_(trace), cfg_(cfg), mdp_(mdp), labels_(labels)
    {}

    SimReport run()
    {
        const std::size_t n = trace_.events.size();
        std::uint64_t idle = 0;
        while (committed_ < n) {
            const std::uint64_t before = progress();
            dispatch();
            issue();
            resolve();
            commit();
            ++cycle_;
            idle = progress() == before ? idle + 1 : 0;
            if (idle > 100000 + cfg_.flushPenalty)
                throw InvariantError("pipeline made no progress for 100000 cycles");
        }
        report_.cycles = cycle_;
        report_.instructions = n;
        return report_;
    }

  private:
    std::uint64_t progress() const { return committed_ * 3 + dispatched_ + issuedTotal_; }

    bool isLabelled(std::uint64_t pc) const { return labels_ && labels_->isLabelled(pc); }

    std::optional<std::size_t> findSeq(std::uint64_t seq) const
    {
        auto it = std::lower_bound(rob_.begin(), rob_.end(), seq,
                                   [](const InFlight& e, std::uint64_t s) { return e.seq < s; });
        if (it == rob_.end() || it->seq != seq)
            return std::nullopt;
        return std::size_t(it - rob_.begin());
    }

    void dispatch()
    {
        if (cycle_ < resumeCycle_)
            return;
        std::uint32_t ports = 0;
        for (std::uint32_t k = 0; k < cfg_.fetchWidth && fetch_ < trace_.events.size(); ++k) {
            const TraceEvent& e = trace_.events[fetch_];
            if (rob_.size() >= cfg_.rob || iqCount_ >= cfg_.iq)
                break;
            if (e.isLoad() && lqCount_ >= cfg_.lq)
                break;
            if (e.isStore() && sqCount_ >= cfg_.sq)
                break;
            const bool labelled = e.isLoad() && isLabelled(e.pc);
            if (e.isMem() && !labelled && cfg_.mdpReadPorts != 0) {
                if (ports == cfg_.mdpReadPorts)
                    break;
                ++ports;
            }

            InFlight f;
            f.idx = fetch_;
            f.seq = ++seq_;
            f.ev = &e;
            f.readyCycle = cycle_ + 1;
            if (e.isLoad()) {
                f.labelled = labelled;
                f.history = ghr_;
                LoadQuery q{e.pc, f.seq, fetch_, &f.history};
                auto pred = mdp_.queryLoad(q);
                for (auto s : pred.waitFor)
                    if (auto pos = findSeq(s); pos && rob_[*pos].ev->isStore() && !rob_[*pos].done)
                        f.waitFor.push_back(s);
                for (const auto& older : rob_)
                    if (older.ev->isStore() && older.ev->overlaps(e)) {
                        ++report_.inflightTrueDeps;
                        break;
                    }
                ++report_.loadsDispatched;
                ++lqCount_;
            } else if (e.isStore()) {
                mdp_.registerStore({e.pc, f.seq, fetch_});
                ++sqCount_;
            } else if (e.isBranch()) {
                ghr_.push(e.taken);
            }
            if (e.isMem())
                mdp_.tick(1);

            rob_.push_back(std::move(f));
            ++iqCount_;
            ++fetch_;
            ++dispatched_;
        }
    }

    void issue()
    {
        std::uint32_t issued = 0;
        for (std::size_t i = 0; i < rob_.size() && issued < cfg_.issueWidth; ++i) {
            auto& f = rob_[i];
            if (f.issued || f.readyCycle > cycle_)
                continue;
            if (f.ev->isLoad() && !f.waitFor.empty())
                continue;
            f.issued = true;
            ++issued;
            ++issuedTotal_;
            --iqCount_;
            if (f.ev->isLoad()) {
                // Forward from the youngest older resolved overlapping store;
                // older unresolved stores are speculatively ignored.
                for (std::size_t j = i; j-- > 0;) {
                    const auto& s = rob_[j];
                    if (s.ev->isStore() && s.done && s.ev->overlaps(*f.ev)) {
                        f.forwardSeq = s.seq;
                        break;
                    }
                }
                f.doneCycle = cycle_ + cfg_.execLatencyLoad;
            } else if (f.ev->isStore()) {
                f.doneCycle = cycle_ + cfg_.execLatencyStoreAddr;
            } else {
                f.doneCycle = cycle_ + cfg_.execLatencyOther;
            }
        }
    }

    void resolve()
    {
        for (std::size_t i = 0; i < rob_.size(); ++i) {
            auto& f = rob_[i];
            if (!f.issued || f.done || f.doneCycle > cycle_)
                continue;
            f.done = true;
            if (f.ev->isStore())
                resolveStore(i);
        }
    }

    void resolveStore(std::size_t i)
    {
        const InFlight& store = rob_[i];
        const TraceEvent& se = *store.ev;
        const std::uint64_t storeSeq = store.seq;
        mdp_.storeExecuted(storeSeq);

        std::optional<std::size_t> violator;
        for (std::size_t j = i + 1; j < rob_.size(); ++j) {
            auto& l = rob_[j];
            if (!l.ev->isLoad())
                continue;
            if (!l.issued) {
                auto it = std::find(l.waitFor.begin(), l.waitFor.end(), storeSeq);
                if (it == l.waitFor.end())
                    continue;
                l.waitFor.erase(it);
                const bool overlap = se.overlaps(*l.ev);
                if (!overlap)
                    ++report_.falseDeps;
                mdp_.predictionOutcome({l.ev->pc, l.seq, l.idx, &l.history}, se.pc, overlap);
            } else if (!violator && l.forwardSeq < storeSeq && se.overlaps(*l.ev)) {
                violator = j;
            }
        }
        if (violator)
            flushFrom(*violator, se.pc);
    }

    void flushFrom(std::size_t pos, std::uint64_t storePc)
    {
        const InFlight load = rob_[pos];
        ++report_.violations;
        ++report_.flushes;
        if (!load.labelled)
            mdp_.trainViolation({load.ev->pc, storePc, &load.history});

        while (rob_.size() > pos) {
            auto& f = rob_.back();
            if (!f.issued)
                --iqCount_;
            if (f.ev->isLoad())
                --lqCount_;
            if (f.ev->isStore()) {
                --sqCount_;
                if (!f.done)
                    mdp_.storeExecuted(f.seq);
            }
            rob_.pop_back();
        }
        fetch_ = load.idx;
        ghr_ = load.history;
        resumeCycle_ = cycle_ + 1 + cfg_.flushPenalty;
    }

    void commit()
    {
        for (std::uint32_t k = 0; k < cfg_.fetchWidth && !rob_.empty() && rob_.front().done; ++k) {
            const auto& f = rob_.front();
            if (f.idx != committed_)
                throw InvariantError("commit out of program order");
            if (f.ev->isLoad())
                --lqCount_;
            if (f.ev->isStore())
                --sqCount_;
            ++committed_;
            rob_.pop_front();
        }
    }

    const Trace& trace_;
    const CoreConfig& cfg_;
    MemDepPredictor& mdp_;
    const BypassWrapper* labels_;

    std::deque<InFlight> rob_;
    BranchHistory ghr_;
    std::uint64_t cycle_ = 0;
    std::uint64_t resumeCycle_ = 0;
    std::uint64_t seq_ = 0;
    std::size_t fetch_ = 0;
    std::size_t committed_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t issuedTotal_ = 0;
    std::uint32_t iqCount_ = 0, lqCount_ = 0, sqCount_ = 0;
    SimReport report_;
};

} // namespace detail

/// Runs `trace` on the core. With `labels`, labelled loads bypass `mdp`
/// (no query, no read port, no training on violation). Deterministic.
inline SimReport simulate(const Trace& trace, const CoreConfig& cfg, MemDepPredictor& mdp,
                          const LabelSet* labels = nullptr)
{
    cfg.validate();
    if (trace.empty())
        throw ArgumentError("simulate: trace is empty");
    validateTrace(trace);

    const MdpStats before = mdp.stats();
    SimReport r;
    std::uint64_t bypassed = 0;
    if (labels) {
        BypassWrapper wrapper(mdp, *labels);
        r = detail::Pipeline(trace, cfg, wrapper, &wrapper).run();
        bypassed = wrapper.stats().bypassed;
    } else {
        r = detail::Pipeline(trace, cfg, mdp, nullptr).run();
    }
    r.trace = trace.name;
    r.core = cfg.name;
    r.predictor = mdp.name();
    r.ports = cfg.mdpReadPorts;
    if (labels)
        r.threshold = labels->threshold;
    r.mdpQueries = mdp.stats().queries - before.queries;
    r.bypassedLoads = bypassed;
    return r;
}

/// Builds the predictor from `pcfg` and fills the table-size columns.
inline SimReport simulate(const Trace& trace, const CoreConfig& cfg, const PredictorConfig& pcfg,
                          const LabelSet* labels = nullptr)
{
    auto mdp = makePredictor(pcfg, trace);
    auto r = simulate(trace, cfg, *mdp, labels);
    if (pcfg.kind == PredictorKind::StoreSets || pcfg.kind == PredictorKind::XsStoreSets) {
        r.ssit = pcfg.ssitEntries;
        r.lfst = pcfg.lfstEntries;
    }
    return r;
}

} // namespace mdpsim
