#pragma once

#include "gtsim/algorithms.hpp"
#include "gtsim/common.hpp"
#include "gtsim/contraction.hpp"
#include "gtsim/io.hpp"
#include "gtsim/metrics.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/problems.hpp"
#include "gtsim/sweep.hpp"
