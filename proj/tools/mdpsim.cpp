// mdpsim command line: trace generation, profiling, labelling, experiments
// and threshold search.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mdpsim/mdpsim.hpp"

namespace fs = std::filesystem;
using namespace mdpsim;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kInternal = 3 };

struct Globals
{
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string outDir;
};

fs::path outPath(const Globals& g, const std::string& file)
{
    fs::path p(file);
    if (p.is_relative() && !g.outDir.empty())
        p = fs::path(g.outDir) / p;
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    return p;
}

/// Writes to `file` under the output directory, or stdout when empty or "-".
void emit(const Globals& g, const std::string& file, const std::string& bytes)
{
    if (file.empty() || file == "-") {
        std::fwrite(bytes.data(), 1, bytes.size(), stdout);
        return;
    }
    writeFile(outPath(g, file).string(), bytes);
}

std::vector<Trace> loadAll(const std::vector<std::string>& specs, const Globals& g)
{
    std::vector<Trace> out;
    for (const auto& s : specs)
        out.push_back(loadTraceSpec(s, g.seed));
    return out;
}

int cmdGenTrace(const Globals& g, const std::string& gen, const std::vector<std::string>& args,
                const std::string& out, bool binary)
{
    std::string spec = gen;
    for (const auto& a : args)
        spec += ' ' + a;
    const Trace t = generateFromSpec(spec, g.seed);
    emit(g, out, binary ? serializeTraceBinary(t) : serializeTrace(t));
    return kOk;
}

int cmdProfile(const Globals& g, const std::vector<std::string>& traces, const std::string& out)
{
    std::vector<StoreDistanceProfile> parts;
    for (const auto& t : loadAll(traces, g))
        parts.push_back(profileTrace(t));
    emit(g, out, serializeProfile(mergeProfiles(parts)));
    return kOk;
}

int cmdLabel(const Globals& g, const std::string& profile, const std::string& threshold,
             double confidence, const std::string& out)
{
    StoreDistance t = 0;
    if (!parseDistance(threshold, t) || t < 1)
        throw ArgumentError("bad threshold '" + threshold + "'");
    const auto p = parseProfile(readFile(profile));
    emit(g, out, serializeLabels(labelLoads(p, t, confidence, profile)));
    return kOk;
}

int cmdRun(Globals g, const std::string& config, bool seedGiven, bool jobsGiven)
{
    ExperimentConfig c = loadExperimentConfig(config);
    if (seedGiven)
        c.seed = g.seed;
    if (jobsGiven)
        c.jobs = g.jobs;
    if (g.outDir.empty())
        g.outDir = c.outDir;
    const ExperimentResult r = runExperiment(c);
    const fs::path csv = outPath(g, c.csv);
    writeFile(csv.string(), r.csv);
    std::cout << "wrote " << r.rows.size() << " rows to " << csv.string() << '\n';
    if (!c.gnuplot.empty()) {
        const fs::path gp = outPath(g, c.gnuplot);
        writeFile(gp.string(), gnuplotScript(c, r.rows));
        std::cout << "wrote " << gp.string() << '\n';
    }
    return kOk;
}

int cmdCompare(const Globals& g, const std::string& trainProfile, const std::string& refProfile,
               const std::string& trainLabels, const std::string& refLabels,
               const std::string& threshold, const std::string& out)
{
    const auto tp = parseProfile(readFile(trainProfile));
    const auto rp = parseProfile(readFile(refProfile));
    LabelSet tl, rl;
    if (!threshold.empty()) {
        StoreDistance t = 0;
        if (!parseDistance(threshold, t) || t < 1)
            throw ArgumentError("bad threshold '" + threshold + "'");
        tl = labelLoads(tp, t);
        rl = labelLoads(rp, t);
    } else {
        if (trainLabels.empty() || refLabels.empty())
            throw ArgumentError("give --threshold or both --train-labels and --ref-labels");
        tl = parseLabels(readFile(trainLabels), trainLabels);
        rl = parseLabels(readFile(refLabels), refLabels);
    }
    const auto c = compareLabelSets(tl, tp, rl, rp);
    std::string s = formatComparison(c) + '\n';
    s += "tp=" + std::to_string(c.tp) + " tn=" + std::to_string(c.tn) +
         " fp=" + std::to_string(c.fp) + " fn=" + std::to_string(c.fn) +
         " missing=" + std::to_string(c.missing) + " total=" + std::to_string(c.total()) + '\n';
    emit(g, out, s);
    return kOk;
}

int cmdSearch(const Globals& g, const std::string& preset, const std::vector<std::string>& train,
              const std::string& profile, const std::string& lo, const std::string& hi,
              const std::string& mode, const std::string& out)
{
    const CorePreset p = corePreset(preset);
    StoreDistance a = 0, b = 0;
    if (!parseDistance(lo, a) || !parseDistance(hi, b) || a == kInfiniteDistance ||
        b == kInfiniteDistance)
        throw ArgumentError("--lo and --hi must be finite distances");
    const auto traces = loadAll(train, g);
    StoreDistanceProfile prof;
    if (!profile.empty()) {
        prof = parseProfile(readFile(profile));
    } else {
        std::vector<StoreDistanceProfile> parts;
        for (const auto& t : traces)
            parts.push_back(profileTrace(t));
        prof = mergeProfiles(parts);
    }

    auto run = [&](SearchMode m) { return searchThreshold(traces, prof, p.core, p.predictor, a, b, m, g.jobs); };
    std::string s;
    if (mode == "both") {
        const auto ex = run(SearchMode::Exhaustive);
        const auto bi = run(SearchMode::Binary);
        s = searchResultCsv(ex) + searchSummary(ex, SearchMode::Exhaustive) + '\n' +
            searchSummary(bi, SearchMode::Binary) + '\n';
        s += "# discrepancy_pct=" +
             formatFixed(percentChange(ex.bestScore(), bi.bestScore())) + '\n';
    } else {
        const SearchMode m = mode == "binary" ? SearchMode::Binary : SearchMode::Exhaustive;
        const auto r = run(m);
        s = searchResultCsv(r) + searchSummary(r, m) + '\n';
    }
    emit(g, out, s);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Trace-driven memory dependence prediction simulator"};
    app.require_subcommand(1);
    Globals g;
    auto* seedOpt = app.add_option("--seed", g.seed, "Seed for generated traces")->default_val(1);
    auto* jobsOpt = app.add_option("--jobs", g.jobs, "Worker threads")->default_val(1)
                        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.outDir, "Directory for relative output paths");

    std::string out;

    auto* gen = app.add_subcommand("gen-trace", "Write a synthetic trace");
    std::string genName;
    std::vector<std::string> genArgs;
    bool binary = false;
    gen->add_option("generator", genName, "Generator name")->required()
        ->check(CLI::IsMember(generatorNames()));
    gen->add_option("args", genArgs, "Generator arguments as key=value");
    gen->add_option("-o,--out", out, "Output file (default stdout)");
    gen->add_flag("--binary", binary, "Write the binary trace format");

    auto* prof = app.add_subcommand("profile", "Profile store distances of one or more traces");
    std::vector<std::string> traces;
    prof->add_option("traces", traces, "Trace files or gen:<spec>")->required();
    prof->add_option("-o,--out", out, "Output profile (default stdout)");

    auto* label = app.add_subcommand("label", "Label loads from a profile");
    std::string profilePath, threshold;
    double confidence = 0.95;
    label->add_option("profile", profilePath, "Profile file")->required();
    label->add_option("-t,--threshold", threshold, "Store distance threshold")->required();
    label->add_option("--confidence", confidence, "Selection confidence")->default_val(0.95)
        ->check(CLI::Range(0.0, 1.0));
    label->add_option("-o,--out", out, "Output label file (default stdout)");

    auto* run = app.add_subcommand("run", "Run an experiment config");
    std::string config;
    run->add_option("config", config, "Experiment config file")->required();

    auto* cmp = app.add_subcommand("compare-profiles", "Compare train and reference labels");
    std::string trainProfile, refProfile, trainLabels, refLabels;
    cmp->add_option("--train-profile", trainProfile)->required();
    cmp->add_option("--ref-profile", refProfile)->required();
    cmp->add_option("--train-labels", trainLabels);
    cmp->add_option("--ref-labels", refLabels);
    cmp->add_option("-t,--threshold", threshold, "Label both profiles at this threshold");
    cmp->add_option("-o,--out", out, "Output report (default stdout)");

    auto* search = app.add_subcommand("search-threshold", "Pick a store distance threshold");
    std::string preset = "small", lo = "1", hi = "64", mode = "exhaustive";
    std::vector<std::string> train;
    search->add_option("--core", preset, "Core preset")->default_val("small")
        ->check(CLI::IsMember({"small", "medium", "large"}));
    search->add_option("--train", train, "Training traces (files or gen:<spec>)")->required();
    search->add_option("--profile", profilePath, "Profile to label from (default: profile --train)");
    search->add_option("--lo", lo, "Smallest threshold")->default_val("1");
    search->add_option("--hi", hi, "Largest threshold")->default_val("64");
    search->add_option("--mode", mode, "Search mode")->default_val("exhaustive")
        ->check(CLI::IsMember({"exhaustive", "binary", "both"}));
    search->add_option("-o,--out", out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen)
            return cmdGenTrace(g, genName, genArgs, out, binary);
        if (*prof)
            return cmdProfile(g, traces, out);
        if (*label)
            return cmdLabel(g, profilePath, threshold, confidence, out);
        if (*run)
            return cmdRun(g, config, seedOpt->count() > 0, jobsOpt->count() > 0);
        if (*cmp)
            return cmdCompare(g, trainProfile, refProfile, trainLabels, refLabels, threshold, out);
        if (*search)
            return cmdSearch(g, preset, train, profilePath, lo, hi, mode, out);
    } catch (const InvariantError& e) {
        std::cerr << "mdpsim: internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const ArgumentError& e) {
        std::cerr << "mdpsim: " << e.what() << '\n';
        return kInput;
    } catch (const ConfigError& e) {
        std::cerr << "mdpsim: " << e.what() << '\n';
        return kInput;
    } catch (const ParseError& e) {
        std::cerr << "mdpsim: " << e.what() << '\n';
        return kInput;
    } catch (const IoError& e) {
        std::cerr << "mdpsim: " << e.what() << '\n';
        return kInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "mdpsim: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "mdpsim: internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
