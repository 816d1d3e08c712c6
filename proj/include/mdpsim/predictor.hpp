#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "mdpsim/history.hpp"
#include "mdpsim/profiler.hpp"
#include "mdpsim/trace.hpp"

namespace mdpsim {

/// Store sequence numbers the load must wait for. Empty means the load is
/// predicted memory independent.
struct Prediction
{
    std::vector<std::uint64_t> waitFor;

    bool empty() const { return waitFor.empty(); }
    bool operator==(const Prediction&) const = default;
};

/// Sequence numbers here are dynamic (per dispatch) and strictly increase
/// within a run; `traceIndex` locates the instruction in the trace.
struct LoadQuery
{
    std::uint64_t pc = 0;
    std::uint64_t seq = 0;
    std::size_t traceIndex = 0;
    const BranchHistory* history = nullptr;
};

struct StoreInfo
{
    std::uint64_t pc = 0;
    std::uint64_t seq = 0;
    std::size_t traceIndex = 0;
};

struct ViolationInfo
{
    std::uint64_t loadPc = 0;
    std::uint64_t storePc = 0;
    const BranchHistory* history = nullptr;
};

struct MdpStats
{
    std::uint64_t queries = 0;
    std::uint64_t predictionsMade = 0;  // queries returning a non-empty prediction
    std::uint64_t bypassed = 0;

    bool operator==(const MdpStats&) const = default;
};

/// Common face of every memory dependence predictor.
///
/// queryLoad only reads the tables (statistics aside); trainViolation is the
/// only entry point that allocates table entries.
class MemDepPredictor
{
  public:
    virtual ~MemDepPredictor() = default;

    virtual Prediction queryLoad(const LoadQuery& q) = 0;
    virtual void registerStore(const StoreInfo& s) = 0;
    /// The store resolved its address, or was squashed. Predictions made after
    /// this never name it.
    virtual void storeExecuted(std::uint64_t seq) = 0;
    virtual void trainViolation(const ViolationInfo& v) = 0;
    /// Feedback once a predicted store resolved: did it overlap the load?
    virtual void predictionOutcome(const LoadQuery&, std::uint64_t /*storePc*/, bool /*correct*/) {}
    /// `memOps` more memory operations entered the pipeline.
    virtual void tick(std::uint64_t /*memOps*/) {}

    virtual MdpStats stats() const { return stats_; }
    /// Valid entries per table, for occupancy checks.
    virtual std::vector<std::size_t> tablePopulation() const { return {}; }
    virtual std::string name() const = 0;

  protected:
    Prediction counted(Prediction p)
    {
        ++stats_.queries;
        if (!p.empty())
            ++stats_.predictionsMade;
        return p;
    }

    MdpStats stats_;
};

/// Predicts every load independent.
class NeverPredictor final : public MemDepPredictor
{
  public:
    Prediction queryLoad(const LoadQuery&) override { return counted({}); }
    void registerStore(const StoreInfo&) override {}
    void storeExecuted(std::uint64_t) override {}
    void trainViolation(const ViolationInfo&) override {}
    std::string name() const override { return "never"; }
};

/// Perfect knowledge: waits on exactly the in-flight, unresolved older
/// stores whose bytes overlap the load.
class OraclePredictor final : public MemDepPredictor
{
  public:
    explicit OraclePredictor(const Trace& trace) : trace_(&trace) {}

    Prediction queryLoad(const LoadQuery& q) override
    {
        Prediction p;
        const auto& load = trace_->events.at(q.traceIndex);
        for (const auto& [seq, idx] : inflight_)
            if (seq < q.seq && trace_->events[idx].overlaps(load))
                p.waitFor.push_back(seq);
        return counted(std::move(p));
    }

    void registerStore(const StoreInfo& s) override { inflight_[s.seq] = s.traceIndex; }
    void storeExecuted(std::uint64_t seq) override { inflight_.erase(seq); }
    void trainViolation(const ViolationInfo&) override {}
    std::string name() const override { return "oracle"; }

  private:
    const Trace* trace_;
    std::map<std::uint64_t, std::size_t> inflight_;
};

/// Labelled loads skip the inner predictor entirely: no query, an empty
/// prediction, and no training when they violate. Everything else is
/// forwarded unchanged.
class BypassWrapper final : public MemDepPredictor
{
  public:
    BypassWrapper(MemDepPredictor& inner, const LabelSet& labels)
        : inner_(&inner), labelled_(labels.pcs.begin(), labels.pcs.end())
    {}

    bool isLabelled(std::uint64_t pc) const { return labelled_.count(pc) != 0; }

    Prediction queryLoad(const LoadQuery& q) override
    {
        if (isLabelled(q.pc)) {
            ++bypassed_;
            return {};
        }
        return inner_->queryLoad(q);
    }

    void registerStore(const StoreInfo& s) override { inner_->registerStore(s); }
    void storeExecuted(std::uint64_t seq) override { inner_->storeExecuted(seq); }

    void trainViolation(const ViolationInfo& v) override
    {
        if (!isLabelled(v.loadPc))
            inner_->trainViolation(v);
    }

    void predictionOutcome(const LoadQuery& q, std::uint64_t storePc, bool correct) override
    {
        if (!isLabelled(q.pc))
            inner_->predictionOutcome(q, storePc, correct);
    }

    void tick(std::uint64_t memOps) override { inner_->tick(memOps); }

    MdpStats stats() const override
    {
        auto s = inner_->stats();
        s.bypassed = bypassed_;
        return s;
    }

    std::vector<std::size_t> tablePopulation() const override { return inner_->tablePopulation(); }
    std::string name() const override { return inner_->name(); }

  private:
    MemDepPredictor* inner_;
    std::unordered_set<std::uint64_t> labelled_;
    std::uint64_t bypassed_ = 0;
};

} // namespace mdpsim
