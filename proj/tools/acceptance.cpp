// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 125).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mdpsim/mdpsim.hpp"

using namespace mdpsim;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (pass)
            detail = why;
        pass = false;
    }
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1 -------------------------------------------------------------------------

Outcome oracleEquivalence()
{
    Outcome o;
    std::mt19937_64 rng(20240601);
    static const std::uint64_t pools[] = {8, 16, 64, 256, 1024};
    std::uint64_t loads = 0;
    for (int i = 0; i < 1000 && o.pass; ++i) {
        const std::uint64_t n = 1 + rng() % 10000;
        const std::uint64_t pool = pools[rng() % std::size(pools)];
        const Trace t = genRandomTrace(n, pool, rng(), 1 + rng() % 64);

        const auto fast = computeStoreDistances(t);
        StoreDistanceProfile expect;
        std::size_t k = 0;
        for (std::size_t j = 0; j < t.events.size(); ++j) {
            if (!t.events[j].isLoad())
                continue;
            const StoreDistance d = storeDistanceOracle(t, j);
            if (fast[k] != d) {
                o.fail("trace " + std::to_string(i) + " load " + std::to_string(j) +
                       ": streaming " + distanceToString(fast[k]) + " vs oracle " +
                       distanceToString(d));
                break;
            }
            expect.perPc[t.events[j].pc].add(d);
            ++k;
            ++loads;
        }
        if (o.pass && !(profileTrace(t) == expect))
            o.fail("trace " + std::to_string(i) + ": profile histogram differs from oracle");
    }
    if (o.pass)
        o.detail = "1000 traces, " + std::to_string(loads) + " loads identical";
    return o;
}

// 2 -------------------------------------------------------------------------

Outcome selectionFixtures()
{
    Outcome o;
    auto hist = [](std::initializer_list<std::pair<StoreDistance, std::uint64_t>> b) {
        DistanceHistogram h;
        for (auto [d, c] : b)
            h.add(d, c);
        return h;
    };
    struct Case { DistanceHistogram h; StoreDistance want; const char* name; };
    const Case cases[] = {
        {hist({{5, 96}, {kInfiniteDistance, 4}}), 5, "{5:96, inf:4}"},
        {hist({{3, 50}, {7, 50}}), 3, "{3:50, 7:50}"},
        {hist({{kInfiniteDistance, 100}}), kInfiniteDistance, "{inf:100}"},
    };
    for (const auto& c : cases) {
        const auto got = selectDistance(c.h);
        if (got != c.want)
            o.fail(std::string(c.name) + " -> " + distanceToString(got));
    }
    if (o.pass)
        o.detail = "3 fixtures exact";
    return o;
}

// 3 -------------------------------------------------------------------------

std::vector<PredictorConfig> predictorKinds()
{
    PredictorConfig ss = smallCore().predictor;
    ss.kind = PredictorKind::StoreSets;
    PredictorConfig xs = smallCore().predictor;
    PredictorConfig ph = largeCore().predictor;
    return {ss, xs, ph};
}

Outcome bypassSemantics()
{
    Outcome o;
    const CoreConfig core = smallCore().core;

    // Flush-free traces with arbitrary label subsets.
    std::mt19937_64 rng(77);
    const std::vector<Trace> flushFree{genPixelAvg(61, 16, 3, 1), genPixelAvg(17, 9, 4, 2),
                                       genAliasStorm(200, 40, 3, 8),
                                       interleaveTraces("mixed", {genPixelAvg(33, 8, 3, 4),
                                                                  genAliasStorm(64, 16, 5, 8)})};
    int checked = 0;
    for (const auto& t : flushFree) {
        std::set<std::uint64_t> loadPcs;
        for (const auto& e : t.events)
            if (e.isLoad())
                loadPcs.insert(e.pc);
        for (int variant = 0; variant < 4; ++variant) {
            LabelSet labels;
            labels.threshold = 8;
            for (auto pc : loadPcs)
                if (variant == 3 || (variant > 0 && rng() % 3 == 0))
                    labels.pcs.insert(pc);
            std::uint64_t labelledDynamic = 0;
            for (const auto& e : t.events)
                labelledDynamic += e.isLoad() && labels.contains(e.pc);

            for (const auto& pcfg : predictorKinds()) {
                const auto base = simulate(t, core, pcfg);
                const auto pg = simulate(t, core, pcfg, &labels);
                ++checked;
                if (base.flushes != 0 || pg.flushes != 0) {
                    o.fail(t.name + ": expected a flush-free run");
                    continue;
                }
                if (base.mdpQueries - pg.mdpQueries != labelledDynamic ||
                    pg.bypassedLoads != labelledDynamic)
                    o.fail(t.name + " " + toString(pcfg.kind) + ": queries " +
                           std::to_string(base.mdpQueries) + " -> " +
                           std::to_string(pg.mdpQueries) + ", labelled loads " +
                           std::to_string(labelledDynamic));
            }
        }
    }

    // Labelled loads that violate leave every table empty.
    int violations = 0;
    for (std::uint64_t d : {1u, 2u, 3u}) {
        const Trace t = genDependentChain(400, d, 10 + d, 4);
        const LabelSet all = labelLoads(profileTrace(t), 1);
        for (const auto& pcfg : predictorKinds()) {
            auto mdp = makePredictor(pcfg, t);
            const auto before = mdp->tablePopulation();
            const auto pg = simulate(t, core, *mdp, &all);
            violations += int(pg.violations);
            if (pg.violations == 0)
                o.fail(t.name + ": labelled chain produced no violation");
            if (mdp->tablePopulation() != before)
                o.fail(t.name + " " + toString(pcfg.kind) + ": labelled violation grew a table");
        }
    }
    if (o.pass)
        o.detail = std::to_string(checked) + " flush-free runs exact, " +
                   std::to_string(violations) + " labelled violations, tables untouched";
    return o;
}

// 4 -------------------------------------------------------------------------

std::vector<Trace> generatedCorpus()
{
    std::vector<Trace> ts{genPixelAvg(61, 32, 3, 1), genPixelAvg(5, 3, 1, 2),
                          genAliasStorm(128, 64, 3, 16), genAliasMix(0), genLoadDense(1)};
    for (std::uint64_t d : {1u, 2u, 5u, 13u, 30u})
        ts.push_back(genDependentChain(300, d, d, 1 + d % 5));
    for (std::uint64_t s = 0; s < 12; ++s)
        ts.push_back(genRandomTrace(3000, 16u << (s % 6), 500 + s, 8 + s));
    return ts;
}

Outcome oracleSoundness()
{
    Outcome o;
    PredictorConfig oracle;
    oracle.kind = PredictorKind::Oracle;
    int runs = 0;
    for (const auto& t : generatedCorpus())
        for (const char* preset : {"small", "medium", "large"}) {
            const auto r = simulate(t, corePreset(preset).core, oracle);
            ++runs;
            if (r.violations != 0 || r.falseDeps != 0)
                o.fail(t.name + " on " + preset + ": " + std::to_string(r.violations) +
                       " violations, " + std::to_string(r.falseDeps) + " false deps");
        }
    if (o.pass)
        o.detail = std::to_string(runs) + " runs, zero violations and false deps";
    return o;
}

// 5 -------------------------------------------------------------------------

Outcome ssitSweepShape()
{
    Outcome o;
    const CorePreset p = smallCore();
    const std::vector<std::uint32_t> sizes{16, 32, 64, 128, 256, 512, 1024};
    constexpr int kMixes = 6;
    std::vector<std::vector<double>> base(sizes.size()), pg(sizes.size());
    double fdBase64 = 0, fdPg64 = 0;
    for (int m = 0; m < kMixes; ++m) {
        const Trace t = genAliasMix(m);
        const LabelSet labels = labelLoads(profileTrace(t), p.threshold);
        std::vector<SimReport> b(sizes.size()), l(sizes.size());
        parallelFor(sizes.size(), 2, [&](std::size_t i) {
            PredictorConfig pc = p.predictor;
            pc.ssitEntries = sizes[i];
            pc.lfstEntries = sizes[i] / 2;
            b[i] = simulate(t, p.core, pc);
            l[i] = simulate(t, p.core, pc, &labels);
        });
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            base[i].push_back(b[i].ipc());
            pg[i].push_back(l[i].ipc());
            if (sizes[i] == 64) {
                fdBase64 += b[i].falseDepsPerKi();
                fdPg64 += l[i].falseDepsPerKi();
            }
        }
    }
    std::vector<double> gb, gl;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        gb.push_back(geomean(base[i]));
        gl.push_back(geomean(pg[i]));
    }
    double worstDrop = 0;
    for (std::size_t i = 1; i < sizes.size(); ++i)
        worstDrop = std::min(worstDrop, gb[i] / gb[i - 1] - 1);
    const double gap = gl[2] / gb.back() - 1;
    const double fdCut = fdBase64 > 0 ? 1 - fdPg64 / fdBase64 : 0;

    if (worstDrop < -0.005)
        o.fail("(a) baseline IPC drops " + fmt("%.3f%%", -100 * worstDrop));
    if (gap < -0.01)
        o.fail("(b) labelled@64 is " + fmt("%.3f%%", -100 * gap) + " below baseline@1024");
    if (fdCut < 0.5)
        o.fail("(c) false deps/kI cut only " + fmt("%.1f%%", 100 * fdCut));
    std::string curve;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        curve += " " + std::to_string(sizes[i]) + ":" + fmt("%.3f", gb[i]) + "/" + fmt("%.3f", gl[i]);
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "worst drop " +
               fmt("%.3f%%", 100 * worstDrop) + ", pg64 vs base1024 " + fmt("%+.3f%%", 100 * gap) +
               ", fd/kI@64 cut " + fmt("%.1f%%", 100 * fdCut) + "; ipc base/pg" + curve;
    return o;
}

// 6 -------------------------------------------------------------------------

bool sameExceptPorts(SimReport a, SimReport b)
{
    a.ports = b.ports = 0;
    return a == b;
}

Outcome readPorts()
{
    Outcome o;
    const CorePreset p = smallCore();
    const Trace t = genLoadDense(0);
    const LabelSet labels = labelLoads(profileTrace(t), p.threshold);

    CoreConfig two = p.core, unlimited = p.core;
    two.mdpReadPorts = 2;
    unlimited.mdpReadPorts = 0;
    const double gainTwo =
        simulate(t, two, p.predictor, &labels).ipc() / simulate(t, two, p.predictor).ipc() - 1;
    const double gainInf = simulate(t, unlimited, p.predictor, &labels).ipc() /
                           simulate(t, unlimited, p.predictor).ipc() - 1;
    if (gainTwo < gainInf)
        o.fail("gain with 2 ports " + fmt("%.3f%%", 100 * gainTwo) + " < unlimited " +
               fmt("%.3f%%", 100 * gainInf));

    int compared = 0;
    for (const auto& tr : {t, genAliasMix(1), genRandomTrace(4000, 128, 9)}) {
        const LabelSet l = labelLoads(profileTrace(tr), p.threshold);
        for (const auto& pcfg : predictorKinds())
            for (const LabelSet* lp : {static_cast<const LabelSet*>(nullptr), &l}) {
                CoreConfig zero = p.core;
                zero.mdpReadPorts = 0;
                const auto ref = simulate(tr, zero, pcfg, lp);
                for (std::uint32_t ports : {p.core.fetchWidth, p.core.fetchWidth + 1, 64u}) {
                    CoreConfig c = p.core;
                    c.mdpReadPorts = ports;
                    ++compared;
                    if (!sameExceptPorts(ref, simulate(tr, c, pcfg, lp)))
                        o.fail(tr.name + ": ports=" + std::to_string(ports) +
                               " differs from ports=0");
                }
            }
    }
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "labelled gain 2 ports " +
               fmt("%.3f%%", 100 * gainTwo) + " vs unlimited " + fmt("%.3f%%", 100 * gainInf) +
               ", " + std::to_string(compared) + " port-neutral comparisons";
    return o;
}

// 7 -------------------------------------------------------------------------

Outcome clearPeriod()
{
    Outcome o;
    StoreSets p(smallCore().predictor.storeSets());
    if (p.config().clearPeriod != 125000)
        o.fail("small preset clear period is " + std::to_string(p.config().clearPeriod));
    const std::uint64_t loadPc = 0x4000, storePc = 0x4100;
    p.trainViolation({loadPc, storePc, nullptr});
    for (std::uint64_t op = 0; op < 124998; ++op)
        p.tick(1);
    p.registerStore({storePc, 10, 0});
    p.tick(1);  // 124,999 ops
    const auto before = p.queryLoad({loadPc, 11, 0, nullptr});
    if (before.waitFor != std::vector<std::uint64_t>{10})
        o.fail("no prediction at op 124,999");
    p.tick(1);  // 125,000 ops
    const auto after = p.queryLoad({loadPc, 12, 0, nullptr});
    if (!after.empty())
        o.fail("prediction survived op 125,000");
    if (p.tablePopulation() != std::vector<std::size_t>{0, 0})
        o.fail("tables not empty after clear");
    if (o.pass)
        o.detail = "predicts at 124,999 ops, empty at 125,000";
    return o;
}

// 8 -------------------------------------------------------------------------

Outcome comparisonPartition()
{
    Outcome o;
    std::vector<StoreDistanceProfile> profiles;
    for (std::uint64_t s = 0; s < 6; ++s) {
        profiles.push_back(profileTrace(genRandomTrace(2000 + 500 * s, 64 << s, s, 16 + 4 * s)));
        profiles.push_back(profileTrace(genDependentChain(100, 1 + s, s, 1 + s)));
    }
    profiles.push_back(profileTrace(genAliasMix(2)));
    profiles.push_back(profileTrace(genPixelAvg(30, 4, 3, 9)));
    profiles.push_back(StoreDistanceProfile{});
    int pairs = 0;
    for (const auto& tp : profiles)
        for (const auto& rp : profiles)
            for (StoreDistance th : {StoreDistance(1), StoreDistance(3), StoreDistance(8),
                                     StoreDistance(51), kInfiniteDistance}) {
                const auto tl = labelLoads(tp, th), rl = labelLoads(rp, th);
                const auto c = compareLabelSets(tl, tp, rl, rp);
                ++pairs;
                if (c.total() != rp.perPc.size())
                    o.fail("categories cover " + std::to_string(c.total()) + " of " +
                           std::to_string(rp.perPc.size()) + " loads");
                if (c.total() > 0) {
                    const double sum = c.percent(c.tp) + c.percent(c.tn) + c.percent(c.fp) +
                                       c.percent(c.fn) + c.percent(c.missing);
                    if (std::fabs(sum - 100.0) > 1e-9)
                        o.fail("percentages sum to " + fmt("%.12f", sum));
                }
                if (&tp == &rp && (c.fp || c.fn || c.missing))
                    o.fail("self-comparison has FP/FN/Missing");
            }
    if (o.pass)
        o.detail = std::to_string(pairs) + " comparisons partition exactly";
    return o;
}

// 9 -------------------------------------------------------------------------

Outcome thresholdSearch()
{
    Outcome o;
    std::mt19937_64 rng(9);
    int curves = 0;
    for (int i = 0; i < 2000; ++i) {
        const StoreDistance lo = 1 + rng() % 10;
        const StoreDistance hi = lo + rng() % 80;
        const StoreDistance peak = lo + rng() % (hi - lo + 1);
        // Non-decreasing up to the peak, non-increasing after; some steps flat.
        auto step = [&] { return rng() % 4 == 0 ? 0.0 : 0.001 + double(rng() % 1000) * 1e-5; };
        std::vector<double> v(hi + 2);
        double y = 1.0;
        for (StoreDistance t = peak; t-- > lo;) {
            y -= t + 1 == peak ? 0.001 : step();
            v[t] = y;
        }
        v[peak] = 1.0;
        y = 1.0;
        for (StoreDistance t = peak + 1; t <= hi; ++t) {
            y -= step();
            v[t] = y;
        }
        auto f = [&](StoreDistance t) { return v.at(t); };
        const auto ex = maximiseThreshold(f, lo, hi, SearchMode::Exhaustive);
        const auto bi = maximiseThreshold(f, lo, hi, SearchMode::Binary);
        ++curves;
        StoreDistance argmax = lo;
        for (StoreDistance t = lo; t <= hi; ++t)
            if (v[t] > v[argmax])
                argmax = t;
        if (ex.bestThreshold != argmax)
            o.fail("exhaustive missed the argmax on curve " + std::to_string(i));
        if (bi.bestThreshold != ex.bestThreshold)
            o.fail("binary " + std::to_string(bi.bestThreshold) + " vs exhaustive " +
                   std::to_string(ex.bestThreshold) + " on curve " + std::to_string(i));
    }

    // Mixed suites of simulated traces.
    double worst = 0;
    std::string best;
    std::vector<std::vector<Trace>> suites(2);
    suites[0] = {genAliasMix(7), genLoadDense(7)};
    for (std::uint64_t d : {1u, 3u, 6u, 10u, 16u, 24u, 40u})
        suites[0].push_back(genDependentChain(250, d, 70 + d, 4));
    suites[1] = {genAliasMix(8), genRandomTrace(5000, 512, 8, 48)};
    for (std::uint64_t d : {2u, 5u, 9u, 14u, 20u, 33u, 51u, 60u})
        suites[1].push_back(genDependentChain(200, d, 90 + d, 2));
    for (const char* preset : {"small", "medium", "large"})
      for (std::size_t k = 0; k < suites.size(); ++k) {
        const CorePreset p = corePreset(preset);
        const auto& suite = suites[k];
        std::vector<StoreDistanceProfile> parts;
        for (const auto& t : suite)
            parts.push_back(profileTrace(t));
        const auto prof = mergeProfiles(parts);
        const auto ex = searchThreshold(suite, prof, p.core, p.predictor, 1, 64,
                                        SearchMode::Exhaustive, 2);
        const auto bi = searchThreshold(suite, prof, p.core, p.predictor, 1, 64,
                                        SearchMode::Binary, 2);
        const double loss = 1 - bi.bestScore() / ex.bestScore();
        worst = std::max(worst, loss);
        best += std::string(" ") + preset + "#" + std::to_string(k) + ":" +
                std::to_string(ex.bestThreshold) + "/" + std::to_string(bi.bestThreshold);
        if (loss > 0.001)
            o.fail(std::string(preset) + " suite " + std::to_string(k) + ": binary loses " +
                   fmt("%.3f%%", 100 * loss));
      }
    o.detail = (o.pass ? std::string() : o.detail + "; ") + std::to_string(curves) +
               " unimodal curves exact; suite loss " + fmt("%.4f%%", 100 * worst) +
               " (best exhaustive/binary" + best + ")";
    return o;
}

// 10 ------------------------------------------------------------------------

Outcome determinism()
{
    Outcome o;
    const std::string cfg =
        "name = determinism\nseed = 4\n[core]\npreset = small\n"
        "[workload]\ntrace = gen:alias_mix\ntrace = gen:load_dense seed=2\n"
        "trace = gen:random events=3000 pool=128\n"
        "[labels]\nthresholds = preset, 3, inf\n"
        "[sweep]\nssit = 16, 64, 256\nports = 0, 2\n";
    auto c1 = parseExperimentConfig(cfg);
    auto c2 = parseExperimentConfig(cfg);
    c1.jobs = 1;
    c2.jobs = 3;
    const auto a = runExperiment(c1).csv;
    const auto b = runExperiment(c2).csv;
    const auto again = runExperiment(c1).csv;
    if (a != b || a != again)
        o.fail("experiment CSV differs between reruns");

    const CorePreset p = smallCore();
    std::vector<Trace> suite{genAliasMix(3), genDependentChain(200, 4, 1, 2)};
    const auto prof = mergeProfiles({profileTrace(suite[0]), profileTrace(suite[1])});
    const auto s1 = searchResultCsv(searchThreshold(suite, prof, p.core, p.predictor, 1, 16,
                                                    SearchMode::Exhaustive, 1));
    const auto s2 = searchResultCsv(searchThreshold(suite, prof, p.core, p.predictor, 1, 16,
                                                    SearchMode::Exhaustive, 2));
    if (s1 != s2)
        o.fail("threshold search CSV differs between reruns");
    if (serializeTrace(genAliasMix(5)) != serializeTrace(genAliasMix(5)) ||
        serializeProfile(profileTrace(genAliasMix(5))) !=
            serializeProfile(profileTrace(genAliasMix(5))))
        o.fail("generator or profile bytes differ between reruns");
    if (o.pass)
        o.detail = "experiment (" + std::to_string(std::count(a.begin(), a.end(), '\n') - 1) +
                   " rows), search and generator outputs byte-identical";
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    struct Criterion { int id; const char* name; std::function<Outcome()> run; };
    const std::vector<Criterion> all{
        {1, "store-distance oracle equivalence", oracleEquivalence},
        {2, "selection-rule fixtures", selectionFixtures},
        {3, "bypass semantics", bypassSemantics},
        {4, "oracle predictor soundness", oracleSoundness},
        {5, "SSIT sweep shape", ssitSweepShape},
        {6, "read-port model", readPorts},
        {7, "clear-period boundary", clearPeriod},
        {8, "profile comparison partition", comparisonPartition},
        {9, "threshold search", thresholdSearch},
        {10, "determinism", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (id < 1 || id > int(all.size())) {
            std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], all.size());
            return 125;
        }
        only.insert(id);
    }
    int failed = 0, ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id))
            continue;
        ++ran;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("[%s] %2d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return std::min(failed, 125);
}
