#pragma once

// Umbrella header for the whole library.

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/gaussian.hpp"
#include "onoff/grid.hpp"
#include "onoff/limits.hpp"
#include "onoff/queue.hpp"
#include "onoff/random.hpp"
#include "onoff/sources.hpp"
#include "onoff/stats.hpp"
#include "onoff/harness/config.hpp"
#include "onoff/harness/csv.hpp"
#include "onoff/harness/experiments.hpp"
#include "onoff/harness/parallel.hpp"
