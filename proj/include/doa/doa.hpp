// Copyright 2026 The DoA Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "doa/array_model.hpp"
#include "doa/core.hpp"
#include "doa/harness.hpp"
#include "doa/io.hpp"
#include "doa/linalg.hpp"
#include "doa/metrics.hpp"
#include "doa/parametric.hpp"
#include "doa/spectral.hpp"
