#pragma once

#include "mmot/core.hpp"
#include "mmot/cost.hpp"
#include "mmot/cost_model.hpp"
#include "mmot/diagnostics.hpp"
#include "mmot/error.hpp"
#include "mmot/ingest.hpp"
#include "mmot/oracles.hpp"
#include "mmot/pairwise.hpp"
#include "mmot/rng.hpp"
#include "mmot/solvers.hpp"
