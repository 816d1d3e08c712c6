#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mdpsim/core.hpp"
#include "mdpsim/error.hpp"
#include "mdpsim/parallel.hpp"
#include "mdpsim/predictor_config.hpp"
#include "mdpsim/profiler.hpp"
#include "mdpsim/workloads.hpp"

namespace mdpsim {

inline constexpr std::string_view kGenPrefix = "gen:";

/// "gen:<generator spec>" builds a synthetic trace; anything else is a trace
/// file, relative paths resolved against `baseDir`.
inline Trace loadTraceSpec(const std::string& spec, std::uint64_t seed,
                           const std::filesystem::path& baseDir = {})
{
    if (spec.rfind(kGenPrefix, 0) == 0)
        return generateFromSpec(spec.substr(kGenPrefix.size()), seed);
    std::filesystem::path p(spec);
    if (p.is_relative() && !baseDir.empty())
        p = baseDir / p;
    return loadTrace(p.string());
}

struct ExperimentConfig
{
    std::string name = "experiment";
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string outDir = ".";
    std::filesystem::path baseDir;

    CoreConfig core = smallCore().core;
    PredictorConfig predictor = smallCore().predictor;
    StoreDistance presetThreshold = smallCore().threshold;

    std::vector<std::string> traces;
    /// Profile sources for labelling. Empty: each trace is profiled on itself.
    std::vector<std::string> train;

    bool baseline = true;
    std::vector<StoreDistance> thresholds;  // empty: no labelled runs
    double confidence = 0.95;

    std::vector<std::uint32_t> ssitSweep;   // empty: predictor.ssitEntries
    std::optional<std::uint32_t> lfstFixed; // unset: ssit / 2 when sweeping
    std::vector<std::uint32_t> portsSweep;  // empty: core.mdpReadPorts

    std::string csv = "results.csv";
    std::string gnuplot;                    // empty: no script
};

namespace detail {

inline std::string trim(std::string s)
{
    const auto notSpace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notSpace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notSpace).base(), s.end());
    return s;
}

inline std::vector<std::string> splitList(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream in(v);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("empty item in list '" + v + "'");
        out.push_back(item);
    }
    if (out.empty())
        throw ConfigError("empty list");
    return out;
}

inline std::uint64_t toU64(const std::string& key, const std::string& v)
{
    std::uint64_t n = 0;
    if (!parseDec(v, n))
        throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
    return n;
}

inline std::uint32_t toU32(const std::string& key, const std::string& v)
{
    auto n = toU64(key, v);
    if (n > 0xffffffffu)
        throw ConfigError(key + ": value too large");
    return std::uint32_t(n);
}

inline bool toBool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

} // namespace detail

/// Parses the experiment file: `key = value` lines grouped under [core],
/// [predictor], [workload], [labels], [sweep] and [output]; keys before the
/// first section are global. `#` starts a comment line.
inline ExperimentConfig parseExperimentConfig(std::string_view text,
                                              const std::filesystem::path& baseDir = {})
{
    using namespace detail;
    ExperimentConfig c;
    c.baseDir = baseDir;
    std::string section;
    std::map<std::string, std::string> core, pred;
    std::optional<std::string> preset;
    std::optional<std::string> thresholdsText;

    std::istringstream in{std::string(text)};
    std::size_t lineNo = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineNo;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#')
            continue;
        const std::string where = "line " + std::to_string(lineNo) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            static const std::vector<std::string> known{"core", "predictor", "workload",
                                                        "labels", "sweep", "output"};
            if (std::find(known.begin(), known.end(), section) == known.end())
                throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError(where + "empty key or value");

        try {
            if (section.empty()) {
                if (key == "name") c.name = val;
                else if (key == "seed") c.seed = toU64(key, val);
                else if (key == "jobs") c.jobs = std::max(1u, toU32(key, val));
                else if (key == "out_dir") c.outDir = val;
                else throw ConfigError("unknown key '" + key + "'");
            } else if (section == "core") {
                if (key == "preset") preset = val;
                else if (!core.emplace(key, val).second)
                    throw ConfigError("duplicate key '" + key + "'");
            } else if (section == "predictor") {
                if (!pred.emplace(key, val).second)
                    throw ConfigError("duplicate key '" + key + "'");
            } else if (section == "workload") {
                if (key == "trace") c.traces.push_back(val);
                else if (key == "train") c.train.push_back(val);
                else throw ConfigError("unknown key '" + key + "'");
            } else if (section == "labels") {
                if (key == "thresholds") thresholdsText = val;
                else if (key == "confidence") {
                    std::size_t used = 0;
                    c.confidence = std::stod(val, &used);
                    if (used != val.size() || !(c.confidence > 0 && c.confidence <= 1))
                        throw ConfigError("confidence must be in (0, 1]");
                } else if (key == "baseline") c.baseline = toBool(key, val);
                else throw ConfigError("unknown key '" + key + "'");
            } else if (section == "sweep") {
                if (key == "ssit") {
                    for (const auto& v : splitList(val))
                        c.ssitSweep.push_back(toU32(key, v));
                } else if (key == "lfst") {
                    if (val != "half")
                        c.lfstFixed = toU32(key, val);
                } else if (key == "ports") {
                    for (const auto& v : splitList(val))
                        c.portsSweep.push_back(toU32(key, v));
                } else throw ConfigError("unknown key '" + key + "'");
            } else if (section == "output") {
                if (key == "csv") c.csv = val;
                else if (key == "gnuplot") c.gnuplot = val;
                else throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError(where + "bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError(where + "bad value for '" + key + "'");
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }

    if (preset) {
        const CorePreset p = corePreset(*preset);
        c.core = p.core;
        c.predictor = p.predictor;
        c.presetThreshold = p.threshold;
    }
    for (const auto& [k, v] : core) {
        if (k == "rob") c.core.rob = toU32(k, v);
        else if (k == "iq") c.core.iq = toU32(k, v);
        else if (k == "lq") c.core.lq = toU32(k, v);
        else if (k == "sq") c.core.sq = toU32(k, v);
        else if (k == "fetch_width") c.core.fetchWidth = toU32(k, v);
        else if (k == "issue_width") c.core.issueWidth = toU32(k, v);
        else if (k == "mdp_read_ports") c.core.mdpReadPorts = toU32(k, v);
        else if (k == "exec_latency_load") c.core.execLatencyLoad = toU32(k, v);
        else if (k == "exec_latency_store_addr") c.core.execLatencyStoreAddr = toU32(k, v);
        else if (k == "exec_latency_other") c.core.execLatencyOther = toU32(k, v);
        else if (k == "flush_penalty") c.core.flushPenalty = toU32(k, v);
        else if (k == "name") c.core.name = v;
        else throw ConfigError("[core]: unknown key '" + k + "'");
    }
    for (const auto& [k, v] : pred) {
        if (k == "predictor") c.predictor.kind = parsePredictorKind(v);
        else if (k == "ssit_entries") c.predictor.ssitEntries = toU32(k, v);
        else if (k == "lfst_entries") c.predictor.lfstEntries = toU32(k, v);
        else if (k == "slots") c.predictor.slots = toU32(k, v);
        else if (k == "clear_period") c.predictor.clearPeriod = toU64(k, v);
        else if (k == "phast_rows") c.predictor.phastRows = toU32(k, v);
        else if (k == "phast_assoc") c.predictor.phastAssoc = toU32(k, v);
        else if (k == "phast_tag_bits") c.predictor.phastTagBits = toU32(k, v);
        else if (k == "phast_lengths") {
            c.predictor.phastLengths.clear();
            for (const auto& item : splitList(v))
                c.predictor.phastLengths.push_back(toU32(k, item));
        } else throw ConfigError("[predictor]: unknown key '" + k + "'");
    }
    if (thresholdsText) {
        for (const auto& item : splitList(*thresholdsText)) {
            if (item == "preset") {
                c.thresholds.push_back(c.presetThreshold);
                continue;
            }
            StoreDistance d = 0;
            if (!parseDistance(item, d) || d < 1)
                throw ConfigError("[labels]: bad threshold '" + item + "'");
            c.thresholds.push_back(d);
        }
        std::sort(c.thresholds.begin(), c.thresholds.end());
        c.thresholds.erase(std::unique(c.thresholds.begin(), c.thresholds.end()),
                           c.thresholds.end());
    }

    if (c.traces.empty())
        throw ConfigError("[workload]: at least one trace is required");
    if (!c.baseline && c.thresholds.empty())
        throw ConfigError("nothing to run: baseline disabled and no thresholds");
    c.core.validate();
    return c;
}

inline ExperimentConfig loadExperimentConfig(const std::string& path)
{
    return parseExperimentConfig(readFile(path), std::filesystem::path(path).parent_path());
}

/// One simulation of a sweep.
struct RunPoint
{
    std::size_t trace = 0;
    std::uint32_t ssit = 0;
    std::uint32_t lfst = 0;
    std::uint32_t ports = 0;
    std::optional<StoreDistance> threshold;
};

struct ExperimentResult
{
    std::vector<SimReport> rows;  // canonical order
    std::string csv;
};

inline bool isStoreSetsKind(PredictorKind k)
{ return k == PredictorKind::StoreSets || k == PredictorKind::XsStoreSets; }

inline std::vector<RunPoint> expandSweep(const ExperimentConfig& c, std::size_t nTraces)
{
    std::vector<std::pair<std::uint32_t, std::uint32_t>> tables;
    if (c.ssitSweep.empty() || !isStoreSetsKind(c.predictor.kind))
        tables.emplace_back(c.predictor.ssitEntries, c.predictor.lfstEntries);
    else
        for (auto s : c.ssitSweep)
            tables.emplace_back(s, c.lfstFixed ? *c.lfstFixed : std::max(1u, s / 2));
    std::vector<std::uint32_t> ports = c.portsSweep;
    if (ports.empty())
        ports.push_back(c.core.mdpReadPorts);

    std::vector<std::optional<StoreDistance>> labelModes;
    if (c.baseline)
        labelModes.push_back(std::nullopt);
    for (auto t : c.thresholds)
        labelModes.push_back(t);

    std::vector<RunPoint> points;
    for (std::size_t t = 0; t < nTraces; ++t)
        for (auto [s, l] : tables)
            for (auto p : ports)
                for (const auto& th : labelModes)
                    points.push_back({t, s, l, p, th});
    return points;
}

/// Rows sorted by trace, predictor, table size, ports, then threshold with
/// the baseline first.
inline void sortReports(std::vector<SimReport>& rows)
{
    auto key = [](const SimReport& r) {
        return std::make_tuple(r.trace, r.predictor, r.ssit, r.lfst, r.ports,
                               r.threshold.has_value(), r.threshold.value_or(0));
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const SimReport& a, const SimReport& b) { return key(a) < key(b); });
}

inline std::string reportsCsv(const std::vector<SimReport>& rows)
{
    std::string s = std::string(kReportCsvHeader) + '\n';
    for (const auto& r : rows)
        s += reportCsvRow(r) + '\n';
    return s;
}

inline ExperimentResult runExperiment(const ExperimentConfig& c)
{
    std::vector<Trace> traces;
    for (const auto& spec : c.traces)
        traces.push_back(loadTraceSpec(spec, c.seed, c.baseDir));

    // Profiles: shared from the train set, or per trace.
    std::vector<StoreDistanceProfile> profiles;
    if (!c.thresholds.empty()) {
        if (!c.train.empty()) {
            std::vector<StoreDistanceProfile> parts;
            for (const auto& spec : c.train)
                parts.push_back(profileTrace(loadTraceSpec(spec, c.seed, c.baseDir)));
            profiles.assign(traces.size(), mergeProfiles(parts));
        } else {
            for (const auto& t : traces)
                profiles.push_back(profileTrace(t));
        }
    }
    std::map<std::pair<std::size_t, StoreDistance>, LabelSet> labels;
    for (std::size_t t = 0; t < profiles.size(); ++t)
        for (auto th : c.thresholds)
            labels[{t, th}] = labelLoads(profiles[t], th, c.confidence);

    const auto points = expandSweep(c, traces.size());
    std::vector<SimReport> rows(points.size());
    parallelFor(points.size(), c.jobs, [&](std::size_t i) {
        const RunPoint& p = points[i];
        CoreConfig core = c.core;
        core.mdpReadPorts = p.ports;
        PredictorConfig pred = c.predictor;
        pred.ssitEntries = p.ssit;
        pred.lfstEntries = p.lfst;
        const LabelSet* l = p.threshold ? &labels.at({p.trace, *p.threshold}) : nullptr;
        rows[i] = simulate(traces[p.trace], core, pred, l);
    });
    sortReports(rows);
    ExperimentResult r;
    r.csv = reportsCsv(rows);
    r.rows = std::move(rows);
    return r;
}

/// IPC against SSIT size, one line per trace and label mode. Reads the CSV
/// written next to it.
inline std::string gnuplotScript(const ExperimentConfig& c, const std::vector<SimReport>& rows)
{
    std::vector<std::string> traces;
    std::vector<std::optional<StoreDistance>> modes;
    for (const auto& r : rows) {
        if (std::find(traces.begin(), traces.end(), r.trace) == traces.end())
            traces.push_back(r.trace);
        if (std::find(modes.begin(), modes.end(), r.threshold) == modes.end())
            modes.push_back(r.threshold);
    }
    std::sort(modes.begin(), modes.end());
    const std::string png = std::filesystem::path(c.csv).stem().string() + ".png";
    std::string s;
    s += "set datafile separator ','\n";
    s += "set terminal pngcairo size 900,600\n";
    s += "set output '" + png + "'\n";
    s += "set title '" + c.name + "'\n";
    s += "set logscale x 2\nset xlabel 'SSIT entries'\nset ylabel 'IPC'\nset key bottom right\n";
    s += "plot ";
    bool first = true;
    for (const auto& t : traces)
        for (const auto& m : modes) {
            const std::string th = m ? distanceToString(*m) : "none";
            if (!first)
                s += ", \\\n     ";
            first = false;
            s += "'" + c.csv + "' using (strcol(1) eq '" + t + "' && strcol(6) eq '" + th +
                 "' ? $3 : 1/0):9 with linespoints title '" + t +
                 (m ? " labelled t=" + th : std::string(" baseline")) + "'";
        }
    s += '\n';
    return s;
}

} // namespace mdpsim
