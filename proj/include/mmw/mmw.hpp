// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmw/array.hpp"
#include "mmw/beammgmt.hpp"
#include "mmw/channel.hpp"
#include "mmw/coverage.hpp"
#include "mmw/geometry.hpp"
#include "mmw/link.hpp"
#include "mmw/measurements.hpp"
#include "mmw/precoding.hpp"
#include "mmw/propagation.hpp"
#include "mmw/rng.hpp"
#include "mmw/scenario.hpp"
#include "mmw/simulation.hpp"
#include "mmw/trace.hpp"
