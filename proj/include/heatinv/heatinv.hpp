// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "heatinv/config.hpp"
#include "heatinv/errors.hpp"
#include "heatinv/evaluation.hpp"
#include "heatinv/fd.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/grid.hpp"
#include "heatinv/inversion.hpp"
#include "heatinv/loss.hpp"
#include "heatinv/net.hpp"
#include "heatinv/optimizer.hpp"
#include "heatinv/placement.hpp"
#include "heatinv/rng.hpp"
#include "heatinv/sampling.hpp"
