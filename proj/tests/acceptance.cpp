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

// Acceptance suite: one PASS/FAIL line per criterion.

#include "irs_ofdma/harness.hpp"
#include "irs_ofdma/oracle.hpp"

#include <catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <unistd.h>

using namespace irs_ofdma;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(int id, bool ok, const std::string& detail)
{
    std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    CHECK(ok);
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// The shared Monte-Carlo sweep: 100 realizations at M=20, 50 at M=40 and M=80.
struct Sweep {
    ExperimentSummary m20, m40_80;
    double seconds = 0.0;
};

const Sweep& sweep()
{
    static const Sweep s = [] {
        Sweep out;
        const auto t0 = clock_type::now();
        ScenarioConfig c;
        const std::vector<Scheme> schemes(kAllSchemes.begin(), kAllSchemes.end());
        c.num_realizations = 100;
        out.m20 = run_monte_carlo(c, schemes, std::vector<std::size_t>{20}, workers());
        c.num_realizations = 50;
        out.m40_80 = run_monte_carlo(c, schemes, std::vector<std::size_t>{40, 80}, workers());
        out.seconds = seconds_since(t0);
        std::printf("  (Monte-Carlo sweep: %.1f s)\n", out.seconds);
        return out;
    }();
    return s;
}

// Records of realizations 0..count-1 for one (scheme, M).
std::vector<const RealizationRecord*> first_records(Scheme s, std::size_t M, std::size_t count)
{
    const auto& sw = sweep();
    auto all = M == 20 ? sw.m20.records_for(s, M) : sw.m40_80.records_for(s, M);
    if (all.size() > count)
        all.resize(count);
    return all;
}

struct Stat {
    double mean = 0.0, se = 0.0;
};

Stat stat_of(const std::vector<const RealizationRecord*>& recs, bool distinct = false)
{
    Stat s;
    const double n = static_cast<double>(recs.size());
    for (const auto* r : recs)
        s.mean += (distinct ? r->distinct_users : r->common_rate) / n;
    double ss = 0.0;
    for (const auto* r : recs) {
        const double d = (distinct ? r->distinct_users : r->common_rate) - s.mean;
        ss += d * d;
    }
    s.se = recs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return s;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("criterion 1: allocation solver against exhaustive search")
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> level_db(0.0, 30.0);
    std::exponential_distribution<double> fading(1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        const std::size_t N = i % 2 == 0 ? 2 : 3;
        const double mean_cnr = std::pow(10.0, level_db(rng) / 10.0);
        std::vector<double> v(2 * N);
        for (double& x : v)
            x = mean_cnr * fading(rng);
        const CnrGrid g(2, 1, N, v);
        const double ours = solve_p11(g, 1.0).common_rate();
        const double best = brute_force_oracle(g, 1.0).rate;
        worst = std::min(worst, best > 0.0 ? ours / best : 1.0);
    }
    const double secs = seconds_since(t0);
    report(1, worst >= 0.98 && secs < 10.0, fmt("50 instances, worst ratio %.6f (>= 0.98), %.2f s (< 10 s)", worst, secs));
}

TEST_CASE("criterion 2: joint solver against exhaustive search")
{
    const auto t0 = clock_type::now();
    ScenarioConfig c;
    c.K = 2;
    c.N = 2;
    c.Q = 1;
    c.M = 1;
    c.I = 20;
    c.L0 = 2;
    c.L1 = 1;
    c.L2 = 2;
    c.seed = 202;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 20; ++i) {
        const auto real = generate_realization(c, i);
        const double ours = solve_p1(real, c, false).common_rate;
        const double best =
            brute_force_oracle(real.users, c.Q, c.P_watt(), c.gamma_linear() * c.sigma2_watt(), 256).rate;
        worst = std::min(worst, best > 0.0 ? ours / best : 1.0);
    }
    const double secs = seconds_since(t0);
    report(2, worst >= 0.95 && secs < 120.0,
           fmt("20 instances, worst ratio %.6f (>= 0.95), %.2f s (< 120 s)", worst, secs));
}

TEST_CASE("criterion 3: duality gap at full scale")
{
    ScenarioConfig c;
    double worst = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto real = generate_realization(c, i);
        const FrequencyChannels fc(real.users, c.gamma_linear(), c.sigma2_watt());
        auto rng = substream(c.seed, i, StreamTag::random_phase, 99);
        const auto res = solve_p11(fc.cnr(random_schedule(rng, c.M, c.Q)), c.P_watt(), c.dual);
        worst = std::max(worst, res.relative_gap());
        mean += res.relative_gap() / 20.0;
    }
    report(3, worst <= 0.05, fmt("20 realizations, worst gap %.4f%%, mean %.4f%% (<= 5%%)", 100.0 * worst, 100.0 * mean));
}

TEST_CASE("criterion 4: every trace is nondecreasing")
{
    const auto& sw = sweep();
    std::size_t traces = 0, bad = 0;
    std::set<std::size_t> realizations;
    for (const auto* s : {&sw.m20, &sw.m40_80})
        for (const auto& r : s->records) {
            ++traces;
            realizations.insert(r.realization);
            for (std::size_t i = 1; i < r.trace.size(); ++i)
                if (r.trace[i] < r.trace[i - 1] - 1e-9) {
                    ++bad;
                    break;
                }
        }
    report(4, bad == 0 && realizations.size() >= 100,
           fmt("%zu traces over %zu realizations x 5 schemes, %zu decreasing", traces, realizations.size(), bad));
}

TEST_CASE("criterion 5: surrogate minorization and tightness")
{
    std::mt19937_64 rng(505);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> scale_db(-60.0, 60.0);
    std::size_t violations = 0;
    double worst_tight = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double s = std::pow(10.0, scale_db(rng) / 20.0);
        const double a = s * nd(rng), b = s * nd(rng), at = s * nd(rng), bt = s * nd(rng);
        const double exact = a * a + b * b;
        if (linearized_gain(a, b, at, bt) > exact * (1.0 + 1e-12))
            ++violations;
        const double tight = std::abs(linearized_gain(a, b, a, b) - exact) / std::max(exact, 1e-300);
        worst_tight = std::max(worst_tight, tight);
    }
    report(5, violations == 0 && worst_tight <= 1e-12,
           fmt("1e5 quadruples, %zu bound violations, worst relative tightness error %.2e", violations, worst_tight));
}

TEST_CASE("criterion 6: scheme ordering")
{
    bool ok = true;
    std::string detail;
    std::size_t per_real_fail = 0;
    for (std::size_t M : {20u, 40u, 80u}) {
        Stat st[5];
        for (std::size_t i = 0; i < 5; ++i)
            st[i] = stat_of(first_records(kAllSchemes[i], M, 50));
        auto geq = [&](std::size_t a, std::size_t b) { return st[a].mean >= st[b].mean - std::max(st[a].se, st[b].se); };
        // dynamic >= fixed >= random_phase_2 >= no_irs, random_phase_2 >= random_phase_1
        const bool m_ok = geq(0, 1) && geq(1, 3) && geq(3, 4) && geq(3, 2);
        ok = ok && m_ok;
        const auto dyn = first_records(Scheme::dynamic, M, 50), fix = first_records(Scheme::fixed, M, 50);
        for (std::size_t i = 0; i < dyn.size(); ++i)
            if (dyn[i]->common_rate < fix[i]->common_rate - 1e-3)
                ++per_real_fail;
        detail += fmt("M=%zu dyn %.4f fix %.4f rp2 %.4f rp1 %.4f none %.4f%s; ", M, st[0].mean, st[1].mean, st[3].mean,
                      st[2].mean, st[4].mean, m_ok ? "" : " (order broken)");
    }
    detail += fmt("dynamic < fixed - 1e-3 on %zu realizations", per_real_fail);
    report(6, ok && per_real_fail == 0, detail);
}

TEST_CASE("criterion 7: growth with the IRS size")
{
    const Stat d20 = stat_of(first_records(Scheme::dynamic, 20, 50));
    const Stat d40 = stat_of(first_records(Scheme::dynamic, 40, 50));
    const Stat d80 = stat_of(first_records(Scheme::dynamic, 80, 50));
    const Stat n20 = stat_of(first_records(Scheme::no_irs, 20, 50));
    const Stat n40 = stat_of(first_records(Scheme::no_irs, 40, 50));
    const Stat n80 = stat_of(first_records(Scheme::no_irs, 80, 50));
    const bool ok = d80.mean > d20.mean && n20.mean == n40.mean && n40.mean == n80.mean;
    report(7, ok,
           fmt("dynamic %.4f / %.4f / %.4f at M=20/40/80; no_irs %.9g / %.9g / %.9g", d20.mean, d40.mean, d80.mean,
               n20.mean, n40.mean, n80.mean));
}

TEST_CASE("criterion 8: fewer users per slot under dynamic beamforming")
{
    const Stat dyn = stat_of(first_records(Scheme::dynamic, 80, 50), true);
    const Stat fix = stat_of(first_records(Scheme::fixed, 80, 50), true);
    report(8, dyn.mean < fix.mean,
           fmt("M=80, 50 realizations: distinct users per slot dynamic %.4f vs fixed %.4f", dyn.mean, fix.mean));
}

TEST_CASE("criterion 9: channel statistics")
{
    ScenarioConfig c;
    c.M = 1;
    c.seed = 909;
    const std::size_t draws = 10000;
    const auto dist = user_positions(c);
    const std::size_t Lc = c.L1 + c.L2 - 1;
    std::vector<std::vector<double>> direct(c.K, std::vector<double>(c.L0, 0.0)),
        cascade(c.K, std::vector<double>(Lc, 0.0));
    for (std::size_t i = 0; i < draws; ++i) {
        const auto r = generate_realization(c, i);
        for (std::size_t k = 0; k < c.K; ++k) {
            for (std::size_t l = 0; l < c.L0; ++l)
                direct[k][l] += std::norm(r.users[k].direct.vector()(static_cast<Eigen::Index>(l))) / draws;
            for (std::size_t l = 0; l < Lc; ++l)
                cascade[k][l] += std::norm(r.users[k].cascaded.matrix()(static_cast<Eigen::Index>(l), 0)) / draws;
        }
    }
    const auto w0 = pdp_weights(c.L0), w1 = pdp_weights(c.L1), w2 = pdp_weights(c.L2);
    const double zeta_bi = path_loss(c.D_bs_irs, c.beta_bi, c.zeta0_db, c.D0);
    double worst = 0.0;
    for (std::size_t k = 0; k < c.K; ++k) {
        const double zeta_bu = path_loss(dist[k].bs_user, c.beta_bu, c.zeta0_db, c.D0);
        const double zeta_iu = path_loss(dist[k].irs_user, c.beta_iu, c.zeta0_db, c.D0);
        for (std::size_t l = 0; l < c.L0; ++l)
            worst = std::max(worst, std::abs(direct[k][l] / (zeta_bu * w0[l]) - 1.0));
        // Independent links: the cascade's tap energy is the convolution of the two profiles.
        for (std::size_t l = 0; l < Lc; ++l) {
            double expect = 0.0;
            for (std::size_t i = 0; i < c.L2; ++i)
                if (l >= i && l - i < c.L1)
                    expect += zeta_iu * w2[i] * zeta_bi * w1[l - i];
            worst = std::max(worst, std::abs(cascade[k][l] / expect - 1.0));
        }
    }
    const double pl1 = path_loss(1.0, c.beta_bu, c.zeta0_db, c.D0);
    report(9, worst <= 0.05 && pl1 == 1e-3,
           fmt("1e4 draws, worst relative tap-energy error %.4f (<= 0.05); path_loss(1 m) = %.17g", worst, pl1));
}

TEST_CASE("criterion 10: byte-identical outputs at any worker count")
{
    ScenarioConfig c;
    c.num_realizations = 3;
    const std::vector<Scheme> schemes(kAllSchemes.begin(), kAllSchemes.end());
    const std::vector<std::size_t> ms{10, 20};
    const auto base = std::filesystem::temp_directory_path() / ("irs_ofdma_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(base);
    emit_summary(run_monte_carlo(c, schemes, ms, 1), base / "one");
    emit_summary(run_monte_carlo(c, schemes, ms, 4), base / "four");
    const bool same_csv = slurp(base / "one" / "summary.csv") == slurp(base / "four" / "summary.csv");
    const bool same_json = slurp(base / "one" / "records.json") == slurp(base / "four" / "records.json");
    const bool non_empty = !slurp(base / "one" / "records.json").empty();
    std::filesystem::remove_all(base);
    report(10, same_csv && same_json && non_empty,
           fmt("1 vs 4 workers: summary.csv %s, records.json %s", same_csv ? "identical" : "DIFFERENT",
               same_json ? "identical" : "DIFFERENT"));
}

TEST_CASE("criterion 11: one full-size realization in desk time")
{
    const ScenarioConfig c;
    const auto real = generate_realization(c, 0);
    const auto t0 = clock_type::now();
    const auto r = run_scheme(Scheme::dynamic, real, c);
    const double secs = seconds_since(t0);
    report(11, secs <= 300.0 && r.common_rate > 0.0,
           fmt("K=3 N=16 Q=6 M=80 I=5 dynamic: R = %.4f in %.2f s (<= 300 s)", r.common_rate, secs));
}
