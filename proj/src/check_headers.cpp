// Compiles every public header in one translation unit.
#include "vstate/errors.hpp"
#include "vstate/quadrature.hpp"
#include "vstate/config.hpp"
#include "vstate/specfun.hpp"
#include "vstate/cmkernel.hpp"
#include "vstate/universal.hpp"
#include "vstate/models.hpp"
#include "vstate/dispersion.hpp"
#include "vstate/contour.hpp"
#include "vstate/cli.hpp"
