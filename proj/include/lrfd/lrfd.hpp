#pragma once

// Umbrella header for the whole library.

#include "lrfd/coherence.hpp"
#include "lrfd/experiments.hpp"
#include "lrfd/io.hpp"
#include "lrfd/linalg.hpp"
#include "lrfd/matrix.hpp"
#include "lrfd/observation.hpp"
#include "lrfd/pipeline.hpp"
#include "lrfd/rng.hpp"
#include "lrfd/solvers.hpp"
#include "lrfd/svd.hpp"
