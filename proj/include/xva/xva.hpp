#pragma once

#include "xva/adjustments.hpp"
#include "xva/analytic.hpp"
#include "xva/error.hpp"
#include "xva/fd.hpp"
#include "xva/heat_kernel.hpp"
#include "xva/market.hpp"
#include "xva/monte_carlo.hpp"
