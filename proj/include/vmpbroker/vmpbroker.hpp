#ifndef VMPBROKER_VMPBROKER_HPP
#define VMPBROKER_VMPBROKER_HPP

#include "market.hpp"
#include "placement.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "selection.hpp"
#include "solver.hpp"

#endif
