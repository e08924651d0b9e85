#pragma once

// Umbrella header for the schro library.

#include "schro/errors.hpp"
#include "schro/parallel.hpp"
#include "schro/spectrum_set.hpp"
#include "schro/operator_core.hpp"
#include "schro/transfer_cocycle.hpp"
#include "schro/mc_spectrum.hpp"
#include "schro/projective.hpp"
#include "schro/constructor.hpp"
#include "schro/word_tree.hpp"
#include "schro/quasiperiodic.hpp"
#include "schro/halfline_weyl.hpp"
#include "schro/json_io.hpp"
