#pragma once

// Spectral-norm-accurate element-wise matrix sparsification: threshold small
// entries, sample the rest by squared magnitude, in memory or in one pass
// over a stream. Umbrella header.

#include "analysis.hpp"
#include "cli.hpp"
#include "dense_matrix.hpp"
#include "matrix_market.hpp"
#include "norms.hpp"
#include "report_io.hpp"
#include "rng.hpp"
#include "select.hpp"
#include "sparsify.hpp"
