#pragma once

#include "classical.hpp"
#include "controllability.hpp"
#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "liouvillian.hpp"
#include "model.hpp"
#include "propagate.hpp"
#include "seed.hpp"
#include "spectral.hpp"
#include "state.hpp"
#include "experiments/dephasing.hpp"
#include "experiments/er_stats.hpp"
#include "experiments/export.hpp"
#include "experiments/parallel.hpp"
#include "experiments/regime_comparison.hpp"
#include "experiments/removal_sweep.hpp"
#include "experiments/robustness.hpp"
#include "experiments/stats.hpp"
#include "experiments/transport.hpp"
