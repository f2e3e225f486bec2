// tubebound/tubebound.hpp - umbrella header

#pragma once

#include "tubebound/errors.hpp"
#include "tubebound/specfun.hpp"
#include "tubebound/modelspaces.hpp"
#include "tubebound/bounds.hpp"
#include "tubebound/rng.hpp"
#include "tubebound/simulate.hpp"
#include "tubebound/estimate.hpp"
#include "tubebound/svg.hpp"
#include "tubebound/acceptance.hpp"
