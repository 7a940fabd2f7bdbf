#pragma once

#include "diskmix/approximation.hpp"
#include "diskmix/core.hpp"
#include "diskmix/flow.hpp"
#include "diskmix/harness/config.hpp"
#include "diskmix/harness/experiment.hpp"
#include "diskmix/harness/registry.hpp"
#include "diskmix/harness/verify.hpp"
#include "diskmix/metrics/ball_average.hpp"
#include "diskmix/metrics/fit.hpp"
#include "diskmix/metrics/geometric_scale.hpp"
#include "diskmix/metrics/h_minus_one.hpp"
#include "diskmix/metrics/inequalities.hpp"
#include "diskmix/oracle.hpp"
#include "diskmix/scalar_data.hpp"
#include "diskmix/tiling.hpp"
