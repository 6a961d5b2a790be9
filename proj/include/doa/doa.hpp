#pragma once

// Umbrella header: low-complexity DOA estimation for large uniform linear
// arrays (partitioned subarray combining, cross-correlation combining, and
// power-iteration max-correlation refinement) plus the benchmarking harness.

#include "doa/analytics.hpp"
#include "doa/array_model.hpp"
#include "doa/bench_harness.hpp"
#include "doa/common.hpp"
#include "doa/estimators.hpp"
#include "doa/rng.hpp"
#include "doa/root_music.hpp"
#include "doa/spectral_core.hpp"
