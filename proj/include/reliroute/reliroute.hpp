#pragma once

#include "reliroute/config.hpp"
#include "reliroute/csv.hpp"
#include "reliroute/error.hpp"
#include "reliroute/experiments.hpp"
#include "reliroute/lp.hpp"
#include "reliroute/manifest.hpp"
#include "reliroute/mifr.hpp"
#include "reliroute/netmodel.hpp"
#include "reliroute/paths.hpp"
#include "reliroute/robust.hpp"
#include "reliroute/solver.hpp"
#include "reliroute/vulnerability.hpp"
