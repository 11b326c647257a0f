#pragma once

#include "claims.hpp"
#include "common.hpp"
#include "datagen.hpp"
#include "evar.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "maxpr.hpp"
#include "model.hpp"
#include "quality.hpp"
#include "solvers.hpp"
