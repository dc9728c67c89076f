#pragma once

// Temporal coherence transfer in parametric down-conversion: partially
// coherent pump models, two-photon coherence functions, time-averaged
// detection, and the concurrence bound of time-energy two-qubit states.

#include "pdcoh/biphoton.hpp"
#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"
#include "pdcoh/detection.hpp"
#include "pdcoh/entanglement.hpp"
#include "pdcoh/frequency_grid.hpp"
#include "pdcoh/gsm.hpp"
#include "pdcoh/oracle.hpp"
#include "pdcoh/pathway.hpp"
#include "pdcoh/response.hpp"
#include "pdcoh/sampling.hpp"
#include "pdcoh/scenario.hpp"
