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

#include "irs_ofdma/oracle.hpp"
#include "irs_ofdma/resource_allocation.hpp"
#include "irs_ofdma/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace irs_ofdma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("oracle on hand-sized grids")
{
    const double P = 3.0;
    CHECK_THAT(brute_force_oracle(CnrGrid(1, 1, 1, {2.0}), P).rate, WithinAbs(std::log2(7.0), 1e-12));
    // One RB, two users: somebody is left without service.
    CHECK(brute_force_oracle(CnrGrid(2, 1, 1, {2.0, 5.0}), P).rate == 0.0);
    const auto r = brute_force_oracle(CnrGrid(2, 1, 2, {1e6, 1.0, 1.0, 1e6}), 1.0);
    CHECK(r.user == std::vector<int>{0, 1});
    CHECK_THAT(r.rate, WithinRel(std::log2(1.0 + 0.5e6) / 2.0, 1e-9));
    CHECK(r.assignments == 4);
}

TEST_CASE("oracle with one user matches the allocation solver")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.1, 100.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> v(2 * 3);
        for (double& x : v)
            x = u(rng);
        const CnrGrid g(1, 2, 3, v);
        CHECK_THAT(brute_force_oracle(g, 1.0).rate, WithinRel(solve_p11(g, 1.0).common_rate(), 1e-6));
    }
}

TEST_CASE("oracle and solver agree on the two-user example")
{
    const CnrGrid g(2, 1, 2, {1e6, 1.0, 1.0, 1e6});
    CHECK_THAT(solve_p11(g, 1.0).common_rate(), WithinRel(brute_force_oracle(g, 1.0).rate, 0.02));
}

TEST_CASE("oracle size guards")
{
    CHECK_THROWS_AS(brute_force_oracle(CnrGrid(2, 2, 7), 1.0), std::invalid_argument); // 2^14
    CHECK_NOTHROW(brute_force_oracle(CnrGrid(2, 1, 13), 1.0));                         // 8192
    ScenarioConfig c;
    c.K = 1;
    c.N = 4;
    c.Q = 2;
    c.M = 2;
    const auto real = generate_realization(c, 0);
    CHECK_THROWS_AS(brute_force_oracle(real.users, 2, 1.0, 1e-13, 64), std::invalid_argument); // 64^4
    CHECK_THROWS_AS(brute_force_oracle(real.users, 2, 0.0, 1e-13, 4), std::invalid_argument);
    CHECK(default_grid_points(1, 1) == 256);
    CHECK(default_grid_points(2, 1) == 256);
    CHECK(default_grid_points(3, 1) == 64);
}

TEST_CASE("finer phase grids never lose")
{
    ScenarioConfig c;
    c.K = 2;
    c.N = 2;
    c.Q = 1;
    c.M = 1;
    c.L0 = 1;
    c.L1 = 1;
    c.L2 = 1;
    const double gs = c.gamma_linear() * c.sigma2_watt();
    for (std::size_t idx = 0; idx < 5; ++idx) {
        const auto real = generate_realization(c, idx);
        double prev = 0.0;
        for (std::size_t grid : {4u, 8u, 32u, 256u}) {
            const auto r = brute_force_oracle(real.users, c.Q, c.P_watt(), gs, grid);
            CHECK(r.phase_points == grid);
            CHECK(r.rate >= prev);
            prev = r.rate;
        }
    }
}

TEST_CASE("channel oracle without cascaded paths equals the CNR oracle")
{
    ScenarioConfig c;
    c.K = 2;
    c.N = 2;
    c.Q = 1;
    c.M = 1;
    c.L0 = 2;
    c.L1 = 1;
    c.L2 = 1;
    auto real = generate_realization(c, 3);
    for (auto& u : real.users)
        u.cascaded = CascadedChannelMatrix(Eigen::MatrixXcd::Zero(2, 1));
    const double gs = c.gamma_linear() * c.sigma2_watt();
    const auto with_channels = brute_force_oracle(real.users, c.Q, c.P_watt(), gs, 8);
    const auto g = cnr_grid(real.users, ReflectionSchedule::zeros(1, 1), c.gamma_linear(), c.sigma2_watt());
    CHECK_THAT(with_channels.rate, WithinRel(brute_force_oracle(g, c.P_watt()).rate, 1e-12));
}
