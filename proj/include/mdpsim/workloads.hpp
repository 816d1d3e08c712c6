#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdpsim/error.hpp"
#include "mdpsim/generators.hpp"
#include "mdpsim/trace.hpp"

namespace mdpsim {

/// Independent loads and stores under SSIT pressure, plus a few short
/// dependent chains that give the predictor something to learn. Chains cycle
/// through 8 static store/load pairs each.
inline Trace genAliasMix(std::uint64_t seed)
{
    const std::uint64_t s = 100 * seed;
    std::vector<Trace> parts{genAliasStorm(512, 64, s + 1, 40), genPixelAvg(61, 64, 3, s + 2),
                             genDependentChain(300, 1, s + 10, 8),
                             genDependentChain(300, 2, s + 11, 8)};
    return interleaveTraces("alias_mix_s" + std::to_string(seed), parts, 48);
}

/// Mostly loads: pixel_avg with many variants next to a load-heavy alias storm.
inline Trace genLoadDense(std::uint64_t seed)
{
    const std::uint64_t s = 100 * seed;
    std::vector<Trace> parts{genAliasStorm(384, 16, s + 1, 40), genPixelAvg(125, 64, 4, s + 2),
                             genDependentChain(200, 1, s + 10, 4)};
    return interleaveTraces("load_dense_s" + std::to_string(seed), parts, 48);
}

namespace detail {

/// Splits "name k=v k=v" into name and key map.
inline std::string parseSpecArgs(const std::string& spec, std::map<std::string, std::string>& kv)
{
    std::vector<std::string> words;
    std::istringstream in(spec);
    for (std::string w; in >> w;)
        words.push_back(w);
    if (words.empty())
        throw ConfigError("empty generator spec");
    for (std::size_t i = 1; i < words.size(); ++i) {
        auto eq = words[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("generator argument '" + words[i] + "' is not key=value");
        auto key = words[i].substr(0, eq);
        if (!kv.emplace(key, words[i].substr(eq + 1)).second)
            throw ConfigError("generator argument '" + key + "' given twice");
    }
    return words[0];
}

class SpecArgs
{
  public:
    SpecArgs(std::string gen, std::map<std::string, std::string> kv, std::uint64_t seed)
        : gen_(std::move(gen)), kv_(std::move(kv)), seed_(seed)
    {}

    std::uint64_t get(const std::string& key, std::optional<std::uint64_t> dflt = std::nullopt)
    {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            if (key == "seed")
                return seed_;
            if (!dflt)
                throw ConfigError(gen_ + ": missing argument '" + key + "'");
            return *dflt;
        }
        std::uint64_t v = 0;
        if (!parseDec(it->second, v))
            throw ConfigError(gen_ + ": argument '" + key + "' is not a number");
        kv_.erase(it);
        return v;
    }

    void done() const
    {
        if (!kv_.empty())
            throw ConfigError(gen_ + ": unknown argument '" + kv_.begin()->first + "'");
    }

  private:
    std::string gen_;
    std::map<std::string, std::string> kv_;
    std::uint64_t seed_;
};

} // namespace detail

/// Builds a trace from "generator k=v ...", e.g. "pixel_avg width=16 height=4
/// variants=3". `seed` is used when the spec does not name one.
inline Trace generateFromSpec(const std::string& spec, std::uint64_t seed)
{
    std::map<std::string, std::string> kv;
    const std::string gen = detail::parseSpecArgs(spec, kv);
    detail::SpecArgs a(gen, std::move(kv), seed);
    Trace t;
    if (gen == "pixel_avg") {
        auto w = a.get("width"), h = a.get("height"), v = a.get("variants", 3);
        t = genPixelAvg(w, h, v, a.get("seed"));
    } else if (gen == "dependent_chain") {
        auto n = a.get("n"), d = a.get("distance"), pairs = a.get("pairs", 1);
        t = genDependentChain(n, d, a.get("seed"), pairs);
    } else if (gen == "alias_storm") {
        auto l = a.get("loads"), s = a.get("stores"), r = a.get("rounds", 64);
        t = genAliasStorm(l, s, a.get("seed"), r);
    } else if (gen == "random") {
        auto n = a.get("events"), pool = a.get("pool", 256), pcs = a.get("pcs", 32);
        t = genRandomTrace(n, pool, a.get("seed"), pcs);
    } else if (gen == "alias_mix") {
        t = genAliasMix(a.get("seed"));
    } else if (gen == "load_dense") {
        t = genLoadDense(a.get("seed"));
    } else {
        throw ConfigError("unknown generator '" + gen + "'");
    }
    a.done();
    return t;
}

inline const std::vector<std::string>& generatorNames()
{
    static const std::vector<std::string> names{"pixel_avg", "dependent_chain", "alias_storm",
                                                "random", "alias_mix", "load_dense"};
    return names;
}

} // namespace mdpsim
