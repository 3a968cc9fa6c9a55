#pragma once

/// Everything at once. verify.hpp (the acceptance checks) is left out on purpose.

#include "core.hpp"
#include "specfun.hpp"
#include "quadrature.hpp"
#include "dgop.hpp"
#include "finite_process.hpp"
#include "painleve.hpp"
#include "limit_kernels.hpp"
#include "schlesinger.hpp"
#include "scaling_lab.hpp"
#include "mc_sim.hpp"
#include "io.hpp"
