#pragma once

#include "kcmc/errors.hpp"
#include "kcmc/hyperbolic.hpp"
#include "kcmc/submersion.hpp"
#include "kcmc/mesh.hpp"
#include "kcmc/operator.hpp"
#include "kcmc/solver.hpp"
#include "kcmc/oracles.hpp"
#include "kcmc/exhaustion.hpp"
#include "kcmc/config.hpp"
#include "kcmc/io.hpp"
#include "kcmc/acceptance.hpp"
