#pragma once

#include "kronocov/bounds.hpp"
#include "kronocov/config.hpp"
#include "kronocov/csv.hpp"
#include "kronocov/errors.hpp"
#include "kronocov/estimators.hpp"
#include "kronocov/experiments.hpp"
#include "kronocov/matcore.hpp"
#include "kronocov/parallel.hpp"
#include "kronocov/rng.hpp"
#include "kronocov/stats.hpp"
#include "kronocov/synthgen.hpp"
#include "kronocov/theory.hpp"
#include "kronocov/version.hpp"
#include "kronocov/windpipe.hpp"
