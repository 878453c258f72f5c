// SPDX-License-Identifier: Apache-2.0
//
// irs-ofdma: joint OFDMA resource allocation and dynamic IRS passive beamforming
// Copyright (C) 2026 The irs-ofdma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IRS_OFDMA_SOLVER_PARAMS_HPP
#define IRS_OFDMA_SOLVER_PARAMS_HPP

#include <cstddef>

namespace irs_ofdma {

/// Lagrange-dual solver for the RB/power allocation step.
struct DualParams {
    std::size_t max_iterations = 500;
    double gap_tolerance = 1e-3;   // relative duality gap for early exit
    double step_constant = 0.5;    // lambda step = step_constant / sqrt(t)
    double budget_tolerance = 1e-8; // per-slot |sum p - P| / P in the mu bisection
};

enum class InnerMethod {
    smoothed,      // projected gradient on a soft-min of the user rates, Armijo steps
    supergradient, // projected supergradient of the min, Polyak-type steps
};

/// SCA over the reflection coefficients for a fixed allocation.
struct ScaParams {
    double sca_tolerance = 1e-4;    // true-objective improvement (bps/Hz) to keep iterating
    std::size_t max_sca_iterations = 50;
    std::size_t inner_max_iterations = 2000;
    double inner_step_tolerance = 1e-6; // stop when the projected step norm is below this
    std::size_t max_backtracks = 40;
    double domain_floor = 1e-9;     // minimum 1 + f p inside the surrogate logarithm
    InnerMethod method = InnerMethod::smoothed;
};

/// Outer alternating optimization.
struct AoParams {
    double outer_tolerance = 1e-3; // bps/Hz
    std::size_t max_outer_iterations = 30;
};

} // namespace irs_ofdma

#endif // IRS_OFDMA_SOLVER_PARAMS_HPP
