#pragma once

#include "wiserx/baselines.hpp"
#include "wiserx/common.hpp"
#include "wiserx/decision.hpp"
#include "wiserx/engine.hpp"
#include "wiserx/experiments.hpp"
#include "wiserx/hgrid.hpp"
#include "wiserx/mapping.hpp"
#include "wiserx/metrics.hpp"
#include "wiserx/planner.hpp"
#include "wiserx/raycast.hpp"
#include "wiserx/relpos.hpp"
#include "wiserx/rng.hpp"
#include "wiserx/scenario.hpp"
#include "wiserx/sensing.hpp"
#include "wiserx/summary.hpp"
#include "wiserx/world.hpp"
