#pragma once

// Umbrella header for the full pipeline: lattice models, eigensolvers,
// unfolding, series statistics, zeta-zero ingestion and ensemble running.

#include "levelstats/dense_solver.hpp"
#include "levelstats/ensemble.hpp"
#include "levelstats/errors.hpp"
#include "levelstats/fft.hpp"
#include "levelstats/io.hpp"
#include "levelstats/lanczos.hpp"
#include "levelstats/models.hpp"
#include "levelstats/riemann.hpp"
#include "levelstats/rng.hpp"
#include "levelstats/series.hpp"
#include "levelstats/series_stats.hpp"
#include "levelstats/sparse_matrix.hpp"
#include "levelstats/spectrum.hpp"
#include "levelstats/unfolding.hpp"
#include "levelstats/version.hpp"
#include "levelstats/zeros_analysis.hpp"
