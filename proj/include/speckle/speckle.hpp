#pragma once

#include "speckle/benchmark.hpp"
#include "speckle/distances.hpp"
#include "speckle/distfit.hpp"
#include "speckle/estimators.hpp"
#include "speckle/ingest.hpp"
#include "speckle/pipeline.hpp"
#include "speckle/simulation.hpp"
#include "speckle/stats.hpp"
#include "speckle/version.hpp"
