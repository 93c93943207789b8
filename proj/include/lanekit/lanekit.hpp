#pragma once

// Umbrella header for the whole toolkit.

#include "lanekit/bev.hpp"
#include "lanekit/core.hpp"
#include "lanekit/dataio.hpp"
#include "lanekit/extract.hpp"
#include "lanekit/metrics.hpp"
#include "lanekit/rng.hpp"
#include "lanekit/segment.hpp"
#include "lanekit/synth.hpp"
