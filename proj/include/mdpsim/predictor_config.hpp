#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mdpsim/phast.hpp"
#include "mdpsim/predictor.hpp"
#include "mdpsim/store_sets.hpp"

namespace mdpsim {

enum class PredictorKind { StoreSets, XsStoreSets, Phast, Oracle, Never };

inline std::string toString(PredictorKind k)
{
    switch (k) {
      case PredictorKind::StoreSets:   return "storesets";
      case PredictorKind::XsStoreSets: return "xs_storesets";
      case PredictorKind::Phast:       return "phast";
      case PredictorKind::Oracle:      return "oracle";
      case PredictorKind::Never:       return "never";
    }
    return "?";
}

inline PredictorKind parsePredictorKind(const std::string& s)
{
    for (auto k : {PredictorKind::StoreSets, PredictorKind::XsStoreSets, PredictorKind::Phast,
                   PredictorKind::Oracle, PredictorKind::Never})
        if (toString(k) == s)
            return k;
    throw ConfigError("unknown predictor '" + s + "'");
}

/// The `predictor = ...` block of an experiment config.
struct PredictorConfig
{
    PredictorKind kind = PredictorKind::XsStoreSets;
    std::uint32_t ssitEntries = 64;
    std::uint32_t lfstEntries = 32;
    std::uint32_t slots = 2;
    std::uint64_t clearPeriod = 125000;
    std::uint32_t phastRows = 128;
    std::uint32_t phastAssoc = 4;
    std::uint32_t phastTagBits = 16;
    std::vector<unsigned> phastLengths{2, 8, 32, 128};

    StoreSetsConfig storeSets() const
    {
        return {ssitEntries, lfstEntries, kind == PredictorKind::StoreSets ? 1u : slots,
                clearPeriod};
    }

    PhastConfig phast() const { return {phastRows, phastAssoc, phastTagBits, phastLengths}; }
};

/// The oracle keeps a pointer to `trace`, which must outlive the predictor.
inline std::unique_ptr<MemDepPredictor> makePredictor(const PredictorConfig& cfg,
                                                      const Trace& trace)
{
    switch (cfg.kind) {
      case PredictorKind::StoreSets:
      case PredictorKind::XsStoreSets: return std::make_unique<StoreSets>(cfg.storeSets());
      case PredictorKind::Phast:       return std::make_unique<Phast>(cfg.phast());
      case PredictorKind::Oracle:      return std::make_unique<OraclePredictor>(trace);
      case PredictorKind::Never:       return std::make_unique<NeverPredictor>();
    }
    throw ConfigError("unknown predictor kind");
}

} // namespace mdpsim
