#pragma once

#include "dislo/analytic.hpp"
#include "dislo/coefficients.hpp"
#include "dislo/error_harness.hpp"
#include "dislo/errors.hpp"
#include "dislo/integrators.hpp"
#include "dislo/interp.hpp"
#include "dislo/quadrature.hpp"
#include "dislo/scenarios.hpp"
