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

#include "irs_ofdma/alternating_optimizer.hpp"
#include "irs_ofdma/oracle.hpp"

#include <catch_amalgamated.hpp>

using namespace irs_ofdma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.K = 3;
    c.N = 8;
    c.Q = 3;
    c.M = 8;
    c.I = 2;
    return c;
}

void check_result(const SolveResult& r, const ScenarioConfig& c)
{
    CHECK_NOTHROW(r.allocation.validate(c.P_watt()));
    REQUIRE(r.per_user_rates.size() == c.K);
    CHECK(r.common_rate == *std::min_element(r.per_user_rates.begin(), r.per_user_rates.end()));
    for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK(r.trace[i] >= r.trace[i - 1] - 1e-9);
    REQUIRE(r.schedule.Q() == c.Q);
    for (const auto& phi : r.schedule.slots())
        CHECK(within_unit_disk(phi));
}

} // namespace

TEST_CASE("scheme names")
{
    for (Scheme s : kAllSchemes)
        CHECK(parse_scheme(to_string(s)) == s);
    CHECK_THROWS_AS(parse_scheme("optimal"), std::invalid_argument);
}

TEST_CASE("random_schedule")
{
    std::mt19937_64 a(5), b(5);
    const auto s1 = random_schedule(a, 7, 3), s2 = random_schedule(b, 7, 3);
    REQUIRE(s1.Q() == 3);
    REQUIRE(s1.M() == 7);
    for (std::size_t q = 0; q < 3; ++q) {
        CHECK(s1[q] == s2[q]);
        for (Eigen::Index m = 0; m < 7; ++m)
            CHECK_THAT(std::abs(s1[q](m)), WithinAbs(1.0, 1e-12));
    }

    // Chi-square uniformity over 20 bins (critical value 36.19 at 1%, 19 dof).
    std::mt19937_64 rng(2024);
    const auto big = random_schedule(rng, 100000, 1);
    std::vector<double> counts(20, 0.0);
    for (Eigen::Index m = 0; m < big[0].size(); ++m) {
        const double ph = std::arg(big[0](m));
        const auto bin = std::min<std::size_t>(19, static_cast<std::size_t>((ph + std::numbers::pi) / (2.0 * std::numbers::pi) * 20.0));
        counts[bin] += 1.0;
    }
    double chi2 = 0.0;
    for (double cnt : counts)
        chi2 += (cnt - 5000.0) * (cnt - 5000.0) / 5000.0;
    CHECK(chi2 < 36.19);
}

TEST_CASE("solve_p1 with zero channels")
{
    ScenarioConfig c = small_config();
    ChannelRealization real;
    for (std::size_t k = 0; k < c.K; ++k)
        real.users.push_back({DirectChannel::from_padded(Eigen::VectorXcd::Zero(8)),
                              CascadedChannelMatrix(Eigen::MatrixXcd::Zero(8, 8))});
    const auto r = solve_p1(real, c, false);
    CHECK(r.common_rate == 0.0);
    CHECK_NOTHROW(r.allocation.validate(c.P_watt()));
}

TEST_CASE("solve_p1 without cascaded paths equals the direct-link optimum")
{
    const ScenarioConfig c = small_config();
    auto real = generate_realization(c, 2);
    for (auto& u : real.users)
        u.cascaded = CascadedChannelMatrix(Eigen::MatrixXcd::Zero(8, 8));
    const auto r = solve_p1(real, c, false);
    const FrequencyChannels fc(real.users, c.gamma_linear(), c.sigma2_watt());
    const double direct = solve_p11(fc.cnr(ReflectionSchedule::zeros(c.M, c.Q)), c.P_watt(), c.dual).common_rate();
    CHECK_THAT(r.common_rate, WithinRel(direct, 1e-9));
    const auto none = run_scheme(Scheme::no_irs, real, c);
    CHECK_THAT(none.common_rate, WithinRel(direct, 1e-12));
}

TEST_CASE("solve_p1 against exhaustive search on tiny instances")
{
    ScenarioConfig c;
    c.K = 2;
    c.N = 2;
    c.Q = 1;
    c.M = 1;
    c.I = 20;
    c.L0 = 1;
    c.L1 = 1;
    c.L2 = 1;
    for (std::size_t idx = 0; idx < 4; ++idx) {
        const auto real = generate_realization(c, idx);
        const auto r = solve_p1(real, c, false);
        const auto o = brute_force_oracle(real.users, c.Q, c.P_watt(), c.gamma_linear() * c.sigma2_watt(), 256);
        INFO("realization " << idx);
        CHECK(r.common_rate >= 0.95 * o.rate);
    }
}

TEST_CASE("benchmark schemes")
{
    ScenarioConfig c = small_config();
    const auto real = generate_realization(c, 1);
    const auto results = run_schemes(kAllSchemes, real, c);
    REQUIRE(results.size() == kAllSchemes.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].scheme == kAllSchemes[i]);
        check_result(results[i], c);
    }
    const auto& dyn = results[0];
    const auto& fix = results[1];
    CHECK(fix.schedule.is_tied());
    CHECK(results[2].schedule.is_tied());
    CHECK_FALSE(results[3].schedule.is_tied());
    for (const auto& phi : results[4].schedule.slots())
        CHECK(phi.norm() == 0.0);
    for (const auto& phi : results[2].schedule.slots())
        for (Eigen::Index m = 0; m < phi.size(); ++m)
            CHECK_THAT(std::abs(phi(m)), WithinAbs(1.0, 1e-12));
    CHECK(dyn.common_rate >= fix.common_rate - 1e-3);

    SECTION("no_irs does not depend on M")
    {
        ScenarioConfig c2 = c;
        c2.M = 3;
        const auto r2 = run_scheme(Scheme::no_irs, generate_realization(c2, 1), c2);
        CHECK(r2.common_rate == results[4].common_rate);
    }
    SECTION("deterministic")
    {
        const auto again = run_scheme(Scheme::dynamic, real, c, &fix);
        CHECK(again.common_rate == dyn.common_rate);
        CHECK(again.allocation.user == dyn.allocation.user);
    }
    SECTION("warm start is tried last")
    {
        const auto warm = run_scheme(Scheme::dynamic, real, c, &fix);
        const auto cold = run_scheme(Scheme::dynamic, real, c);
        CHECK(warm.common_rate >= cold.common_rate);
        CHECK(warm.init_index <= c.I);
        CHECK(cold.init_index < c.I);
    }
}

TEST_CASE("best of the initializations")
{
    ScenarioConfig c = small_config();
    c.I = 3;
    const auto real = generate_realization(c, 4);
    const FrequencyChannels fc(real.users, c.gamma_linear(), c.sigma2_watt());
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < c.I; ++i) {
        auto rng = substream(c.seed, real.index, StreamTag::init, 1, i);
        const auto r = alternate(fc, c, {random_schedule(rng, c.M, c.Q), std::nullopt}, false);
        for (std::size_t t = 1; t < r.trace.size(); ++t)
            CHECK(r.trace[t] >= r.trace[t - 1] - 1e-9);
        if (r.common_rate > best) {
            best = r.common_rate;
            arg = i;
        }
    }
    const auto r = solve_p1(real, c, false);
    CHECK(r.common_rate == best);
    CHECK(r.init_index == arg);
}

TEST_CASE("mismatched warm start is rejected")
{
    ScenarioConfig c = small_config();
    const auto real = generate_realization(c, 0);
    SolveResult bogus;
    bogus.schedule = ReflectionSchedule::zeros(c.M + 1, c.Q);
    CHECK_THROWS_AS(solve_p1(real, c, false, &bogus), std::invalid_argument);
}
