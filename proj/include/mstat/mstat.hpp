#pragma once

// Umbrella header pulling in the whole library.

#include "errors.hpp"
#include "grid.hpp"
#include "operators.hpp"
#include "simplex.hpp"
#include "qp.hpp"
#include "mpcc_lin.hpp"
#include "stationarity.hpp"
#include "normalize.hpp"
#include "synthesis.hpp"
#include "ioc_problem.hpp"
#include "lower_level.hpp"
#include "regularization.hpp"
#include "ioc.hpp"
#include "scenarios.hpp"
#include "problem_io.hpp"
#include "report.hpp"
