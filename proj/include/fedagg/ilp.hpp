// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fedagg/ilp_model.hpp"
#include "fedagg/ilp_solve.hpp"
