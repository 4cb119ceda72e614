#pragma once

// Umbrella header: analytic Bayes factors for repeated-measures (and
// between-subjects) ANOVA from summary statistics, the quadrature oracle,
// the raw-data ANOVA path, and the model-choice simulation harness.

#include "pearsonbf/anova.hpp"
#include "pearsonbf/bayes_factor.hpp"
#include "pearsonbf/errors.hpp"
#include "pearsonbf/gds_oracle.hpp"
#include "pearsonbf/quadrature.hpp"
#include "pearsonbf/rng.hpp"
#include "pearsonbf/simulation.hpp"
#include "pearsonbf/special_functions.hpp"
#include "pearsonbf/summary_stats.hpp"
