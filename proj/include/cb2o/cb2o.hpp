#pragma once

// Umbrella header: the whole consensus-based bi-level optimization library.

#include "cb2o/baselines.hpp"
#include "cb2o/consensus.hpp"
#include "cb2o/dynamics.hpp"
#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"
#include "cb2o/harness.hpp"
#include "cb2o/metrics.hpp"
#include "cb2o/problem.hpp"
#include "cb2o/problems.hpp"
#include "cb2o/rng.hpp"
