#pragma once

// Convenience umbrella: the whole library.

#include "nsdw/analysis.hpp"
#include "nsdw/check.hpp"
#include "nsdw/config.hpp"
#include "nsdw/experiment.hpp"
#include "nsdw/objectives.hpp"
#include "nsdw/optimizers.hpp"
#include "nsdw/rng.hpp"
#include "nsdw/runner.hpp"
#include "nsdw/schedule.hpp"
#include "nsdw/svg.hpp"
#include "nsdw/trace.hpp"
#include "nsdw/vecmath.hpp"
#include "nsdw/version.hpp"
