#pragma once

#include "vsmooth/errors.hpp"
#include "vsmooth/core.hpp"
#include "vsmooth/random.hpp"
#include "vsmooth/projections.hpp"
#include "vsmooth/smooth.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/solver.hpp"
#include "vsmooth/penalty.hpp"
#include "vsmooth/applications.hpp"
#include "vsmooth/oracles.hpp"
#include "vsmooth/verify.hpp"
#include "vsmooth/experiment.hpp"
