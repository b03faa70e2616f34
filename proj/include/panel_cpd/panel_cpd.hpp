#pragma once

// Umbrella header.

#include "panel_cpd/cusum.hpp"
#include "panel_cpd/error.hpp"
#include "panel_cpd/io.hpp"
#include "panel_cpd/limit_process.hpp"
#include "panel_cpd/lrv.hpp"
#include "panel_cpd/montecarlo.hpp"
#include "panel_cpd/panel.hpp"
#include "panel_cpd/parallel.hpp"
#include "panel_cpd/psi.hpp"
#include "panel_cpd/rng.hpp"
#include "panel_cpd/robust.hpp"
#include "panel_cpd/testing.hpp"
