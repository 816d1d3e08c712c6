#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mdpsim/core.hpp"
#include "mdpsim/error.hpp"
#include "mdpsim/parallel.hpp"
#include "mdpsim/profiler.hpp"

namespace mdpsim {

inline double geomean(const std::vector<double>& values)
{
    if (values.empty())
        throw ArgumentError("geomean: no values");
    double acc = 0;
    for (double v : values) {
        if (!(v > 0))
            throw ArgumentError("geomean: values must be positive");
        acc += std::log(v);
    }
    return std::exp(acc / double(values.size()));
}

enum class SearchMode { Exhaustive, Binary };

struct SearchResult
{
    StoreDistance bestThreshold = 0;
    /// Every probed threshold, ascending.
    std::vector<std::pair<StoreDistance, double>> evaluated;
    std::vector<std::string> trainSet;

    double scoreOf(StoreDistance t) const
    {
        for (const auto& [th, s] : evaluated)
            if (th == t)
                return s;
        throw ArgumentError("threshold " + std::to_string(t) + " was not evaluated");
    }

    double bestScore() const { return scoreOf(bestThreshold); }
};

/// Maximises an objective over ascending candidate thresholds.
///
/// Exhaustive evaluates every candidate. Binary assumes the objective rises
/// then falls (flat stretches allowed) and bisects on the direction of the
/// first change right of the midpoint. Either way the answer is the best
/// evaluated point, ties to the smallest threshold.
inline SearchResult maximiseOver(const std::function<double(StoreDistance)>& objective,
                                 const std::vector<StoreDistance>& candidates, SearchMode mode)
{
    if (candidates.empty())
        throw ArgumentError("threshold search: no candidates");
    if (!std::is_sorted(candidates.begin(), candidates.end()) ||
        std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end())
        throw ArgumentError("threshold search: candidates must be strictly ascending");
    std::map<StoreDistance, double> memo;
    auto f = [&](std::size_t i) {
        const StoreDistance t = candidates[i];
        auto it = memo.find(t);
        if (it != memo.end())
            return it->second;
        return memo[t] = objective(t);
    };

    if (mode == SearchMode::Exhaustive) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            f(i);
    } else {
        std::size_t a = 0, b = candidates.size() - 1;
        while (a < b) {
            const std::size_t mid = a + (b - a) / 2;
            const double here = f(mid);
            // Look past a flat stretch to see which way the curve moves.
            std::size_t k = mid + 1;
            while (k < b && f(k) == here)
                ++k;
            if (f(k) > here)
                a = k;
            else
                b = mid;
        }
        f(a);
    }

    SearchResult r;
    r.evaluated.assign(memo.begin(), memo.end());
    r.bestThreshold = r.evaluated.front().first;
    double best = r.evaluated.front().second;
    for (const auto& [t, s] : r.evaluated)
        if (s > best) {
            best = s;
            r.bestThreshold = t;
        }
    return r;
}

/// maximiseOver on every integer in [lo, hi].
inline SearchResult maximiseThreshold(const std::function<double(StoreDistance)>& objective,
                                      StoreDistance lo, StoreDistance hi, SearchMode mode)
{
    if (lo < 1 || lo > hi || hi == kInfiniteDistance)
        throw ArgumentError("threshold search: need 1 <= lo <= hi < inf");
    std::vector<StoreDistance> all;
    for (StoreDistance t = lo; t <= hi; ++t)
        all.push_back(t);
    return maximiseOver(objective, all, mode);
}

/// Smallest threshold of each distinct label set over [lo, hi]: lo itself and
/// d + 1 for every selected distance lo <= d < hi. The label set is constant
/// between consecutive breakpoints.
inline std::vector<StoreDistance> labelBreakpoints(const StoreDistanceProfile& p,
                                                   StoreDistance lo, StoreDistance hi,
                                                   double confidence = 0.95)
{
    std::set<StoreDistance> out{lo};
    for (const auto& [pc, h] : p.perPc) {
        if (h.empty())
            continue;
        const StoreDistance d = selectDistance(h, confidence);
        if (d != kInfiniteDistance && d >= lo && d < hi)
            out.insert(d + 1);
    }
    return {out.begin(), out.end()};
}

/// Geomean IPC over `traces` with loads labelled at threshold `t`.
/// Simulations run on up to `jobs` threads; results are combined in trace order.
inline double labelledGeomeanIpc(const std::vector<Trace>& traces,
                                 const StoreDistanceProfile& profile, const CoreConfig& cfg,
                                 const PredictorConfig& mdp, StoreDistance t, unsigned jobs = 1)
{
    const LabelSet labels = labelLoads(profile, t);
    std::vector<double> ipcs(traces.size());
    parallelFor(traces.size(), jobs,
                [&](std::size_t i) { ipcs[i] = simulate(traces[i], cfg, mdp, &labels).ipc(); });
    return geomean(ipcs);
}

/// Picks the store distance threshold with the best geomean IPC over the
/// training traces, each probe labelling from the same merged profile.
inline SearchResult searchThreshold(const std::vector<Trace>& traces,
                                    const StoreDistanceProfile& profile, const CoreConfig& cfg,
                                    const PredictorConfig& mdp, StoreDistance lo, StoreDistance hi,
                                    SearchMode mode = SearchMode::Exhaustive, unsigned jobs = 1)
{
    if (traces.empty())
        throw ArgumentError("searchThreshold: no training traces");
    if (lo < 1 || lo > hi || hi == kInfiniteDistance)
        throw ArgumentError("searchThreshold: need 1 <= lo <= hi < inf");
    // Neighbouring thresholds often select the same loads; simulate each
    // distinct label set once.
    std::map<std::set<std::uint64_t>, double> byLabels;
    auto objective = [&](StoreDistance t) {
        auto pcs = labelLoads(profile, t).pcs;
        auto it = byLabels.find(pcs);
        if (it != byLabels.end())
            return it->second;
        const double v = labelledGeomeanIpc(traces, profile, cfg, mdp, t, jobs);
        byLabels.emplace(std::move(pcs), v);
        return v;
    };
    // Binary search runs over label-set breakpoints so flat stretches of
    // identical label sets do not stall it.
    auto r = mode == SearchMode::Exhaustive
                 ? maximiseThreshold(objective, lo, hi, mode)
                 : maximiseOver(objective, labelBreakpoints(profile, lo, hi), mode);
    for (const auto& t : traces)
        r.trainSet.push_back(t.name);
    return r;
}

inline std::string searchResultCsv(const SearchResult& r)
{
    std::string s = "threshold,geomean_ipc\n";
    for (const auto& [t, v] : r.evaluated)
        s += distanceToString(t) + ',' + formatFixed(v) + '\n';
    return s;
}

inline std::string searchSummary(const SearchResult& r, SearchMode mode)
{
    return std::string("# best_threshold=") + distanceToString(r.bestThreshold) +
           " geomean_ipc=" + formatFixed(r.bestScore()) +
           " mode=" + (mode == SearchMode::Exhaustive ? "exhaustive" : "binary") +
           " probes=" + std::to_string(r.evaluated.size()) +
           " traces=" + std::to_string(r.trainSet.size());
}

} // namespace mdpsim
