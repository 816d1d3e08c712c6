#pragma once

#include "mdpsim/core.hpp"
#include "mdpsim/error.hpp"
#include "mdpsim/experiment.hpp"
#include "mdpsim/generators.hpp"
#include "mdpsim/history.hpp"
#include "mdpsim/parallel.hpp"
#include "mdpsim/phast.hpp"
#include "mdpsim/predictor.hpp"
#include "mdpsim/predictor_config.hpp"
#include "mdpsim/profiler.hpp"
#include "mdpsim/store_sets.hpp"
#include "mdpsim/threshold_search.hpp"
#include "mdpsim/trace.hpp"
#include "mdpsim/workloads.hpp"
