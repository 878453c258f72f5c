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

// Simulation scenario: geometry, path loss, exponential power delay profile,
// seeded channel realizations and the JSON configuration schema.

#ifndef IRS_OFDMA_SCENARIO_HPP
#define IRS_OFDMA_SCENARIO_HPP

#include "irs_ofdma/channel_model.hpp"
#include "irs_ofdma/solver_params.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irs_ofdma {

inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }
inline double dbm_to_watt(double x_dbm) { return std::pow(10.0, (x_dbm - 30.0) / 10.0); }

/// zeta0 (D'/D0)^-beta as a linear power gain.
inline double path_loss(double distance, double beta, double zeta0_db, double D0)
{
    if (!(distance > 0.0) || !(D0 > 0.0))
        throw std::invalid_argument("path_loss: distances must be positive");
    return db_to_linear(zeta0_db) * std::pow(distance / D0, -beta);
}

/// Normalized exponential PDP, t_l = exp(-l/(L-1)); a single tap gets weight 1.
inline std::vector<double> pdp_weights(std::size_t L)
{
    if (L == 0)
        throw std::invalid_argument("pdp_weights: L must be >= 1");
    if (L == 1)
        return {1.0};
    std::vector<double> w(L);
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        w[l] = std::exp(-static_cast<double>(l) / static_cast<double>(L - 1));
        total += w[l];
    }
    for (double& v : w)
        v /= total;
    return w;
}

/// SplitMix64 finalizer, used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t {
    direct = 1,
    bs_irs = 2,
    irs_user = 3,
    init = 4,
    random_phase = 5,
};

/// Counter-based substream: hash of (seed, realization, tag, a, b).
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t realization, StreamTag tag, std::uint64_t a = 0,
                                 std::uint64_t b = 0)
{
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ realization);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return std::mt19937_64(h);
}

/// CN(0,1) sample.
template <class Rng>
cplx complex_gaussian(Rng& rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

/// Tap l = sqrt(zeta w_l) xi_l with xi_l ~ CN(0,1).
template <class Rng>
TapVector sample_taps(double zeta, std::size_t L, Rng& rng)
{
    if (!(zeta >= 0.0))
        throw std::invalid_argument("sample_taps: negative path gain");
    const std::vector<double> w = pdp_weights(L);
    std::vector<cplx> taps(L);
    for (std::size_t l = 0; l < L; ++l)
        taps[l] = std::sqrt(zeta * w[l]) * complex_gaussian(rng);
    return TapVector(std::move(taps));
}

struct ScenarioConfig {
    std::size_t K = 3;
    std::size_t N = 16;
    std::size_t Q = 6;
    std::size_t M = 80;
    double P_dbm = 35.0;
    double sigma2_dbm = -110.0;
    double gamma_db = 8.8;
    std::size_t I = 5;
    double D_bs_irs = 100.0;
    double d_irs_user = 2.0;
    double beta_bu = 3.5;
    double beta_bi = 2.2;
    double beta_iu = 2.8;
    double zeta0_db = -30.0;
    double D0 = 1.0;
    std::size_t L0 = 4;
    std::size_t L1 = 2;
    std::size_t L2 = 3;
    std::size_t num_realizations = 100;
    std::uint64_t seed = 1;

    DualParams dual;
    ScaParams sca;
    AoParams ao;

    double P_watt() const { return dbm_to_watt(P_dbm); }
    double sigma2_watt() const { return dbm_to_watt(sigma2_dbm); }
    double gamma_linear() const { return db_to_linear(gamma_db); }

    void validate() const
    {
        auto fail = [](const std::string& what) { throw std::invalid_argument("ScenarioConfig: " + what); };
        if (K < 1 || N < 1 || Q < 1 || M < 1 || I < 1 || num_realizations < 1)
            fail("K, N, Q, M, I and num_realizations must be >= 1");
        if (L0 < 1 || L1 < 1 || L2 < 1)
            fail("tap counts L0, L1, L2 must be >= 1");
        if (!(D_bs_irs > 0.0) || !(d_irs_user > 0.0) || !(D0 > 0.0))
            fail("distances must be positive");
        if (!(gamma_db >= 0.0))
            fail("gamma_db must be >= 0");
        if (std::max(L0, L1 + L2 - 1) > N)
            fail("max(L0, L1+L2-1) = " + std::to_string(std::max(L0, L1 + L2 - 1)) +
                 " exceeds N = " + std::to_string(N) + " (cyclic prefix assumption)");
        for (double v : {P_dbm, sigma2_dbm, gamma_db, beta_bu, beta_bi, beta_iu, zeta0_db})
            if (!std::isfinite(v))
                fail("non-finite parameter");
        if (dual.max_iterations < 1 || !(dual.gap_tolerance >= 0.0) || !(dual.step_constant > 0.0) ||
            !(dual.budget_tolerance > 0.0))
            fail("invalid dual solver settings");
        if (sca.max_sca_iterations < 1 || sca.inner_max_iterations < 1 || !(sca.sca_tolerance >= 0.0) ||
            !(sca.inner_step_tolerance > 0.0) || !(sca.domain_floor > 0.0))
            fail("invalid SCA settings");
        if (ao.max_outer_iterations < 1 || !(ao.outer_tolerance >= 0.0))
            fail("invalid alternating-optimization settings");
    }
};

inline nlohmann::ordered_json to_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json j;
    j["K"] = c.K;
    j["N"] = c.N;
    j["Q"] = c.Q;
    j["M"] = c.M;
    j["P_dbm"] = c.P_dbm;
    j["sigma2_dbm"] = c.sigma2_dbm;
    j["gamma_db"] = c.gamma_db;
    j["I"] = c.I;
    j["D_bs_irs"] = c.D_bs_irs;
    j["d_irs_user"] = c.d_irs_user;
    j["beta_bu"] = c.beta_bu;
    j["beta_bi"] = c.beta_bi;
    j["beta_iu"] = c.beta_iu;
    j["zeta0_db"] = c.zeta0_db;
    j["D0"] = c.D0;
    j["L0"] = c.L0;
    j["L1"] = c.L1;
    j["L2"] = c.L2;
    j["num_realizations"] = c.num_realizations;
    j["seed"] = c.seed;
    j["dual_max_iterations"] = c.dual.max_iterations;
    j["dual_gap_tolerance"] = c.dual.gap_tolerance;
    j["dual_step_constant"] = c.dual.step_constant;
    j["dual_budget_tolerance"] = c.dual.budget_tolerance;
    j["sca_tolerance"] = c.sca.sca_tolerance;
    j["sca_max_iterations"] = c.sca.max_sca_iterations;
    j["inner_max_iterations"] = c.sca.inner_max_iterations;
    j["inner_step_tolerance"] = c.sca.inner_step_tolerance;
    j["max_backtracks"] = c.sca.max_backtracks;
    j["domain_floor"] = c.sca.domain_floor;
    j["inner_method"] = c.sca.method == InnerMethod::smoothed ? "smoothed" : "supergradient";
    j["outer_tolerance"] = c.ao.outer_tolerance;
    j["outer_max_iterations"] = c.ao.max_outer_iterations;
    return j;
}

/// Parses a config object; absent fields keep their defaults, unknown fields are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw std::invalid_argument("ScenarioConfig: top-level JSON value must be an object");
    ScenarioConfig c;
    const std::set<std::string> known = [] {
        std::set<std::string> s;
        const auto defaults = to_json(ScenarioConfig{});
        for (const auto& [key, value] : defaults.items())
            s.insert(key);
        return s;
    }();
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw std::invalid_argument("ScenarioConfig: unknown field '" + key + "'");

    auto get = [&j](const char* key, auto& dst) {
        if (!j.contains(key))
            return;
        try {
            using T = std::remove_reference_t<decltype(dst)>;
            if constexpr (std::is_unsigned_v<T>) {
                if (!j.at(key).is_number_unsigned())
                    throw std::invalid_argument("expected a nonnegative integer");
            }
            else if (!j.at(key).is_number()) {
                throw std::invalid_argument("expected a number");
            }
            dst = j.at(key).get<T>();
        }
        catch (const std::exception& e) {
            throw std::invalid_argument(std::string("ScenarioConfig: field '") + key + "': " + e.what());
        }
    };
    get("K", c.K);
    get("N", c.N);
    get("Q", c.Q);
    get("M", c.M);
    get("P_dbm", c.P_dbm);
    get("sigma2_dbm", c.sigma2_dbm);
    get("gamma_db", c.gamma_db);
    get("I", c.I);
    get("D_bs_irs", c.D_bs_irs);
    get("d_irs_user", c.d_irs_user);
    get("beta_bu", c.beta_bu);
    get("beta_bi", c.beta_bi);
    get("beta_iu", c.beta_iu);
    get("zeta0_db", c.zeta0_db);
    get("D0", c.D0);
    get("L0", c.L0);
    get("L1", c.L1);
    get("L2", c.L2);
    get("num_realizations", c.num_realizations);
    get("seed", c.seed);
    get("dual_max_iterations", c.dual.max_iterations);
    get("dual_gap_tolerance", c.dual.gap_tolerance);
    get("dual_step_constant", c.dual.step_constant);
    get("dual_budget_tolerance", c.dual.budget_tolerance);
    get("sca_tolerance", c.sca.sca_tolerance);
    get("sca_max_iterations", c.sca.max_sca_iterations);
    get("inner_max_iterations", c.sca.inner_max_iterations);
    get("inner_step_tolerance", c.sca.inner_step_tolerance);
    get("max_backtracks", c.sca.max_backtracks);
    get("domain_floor", c.sca.domain_floor);
    get("outer_tolerance", c.ao.outer_tolerance);
    get("outer_max_iterations", c.ao.max_outer_iterations);
    if (j.contains("inner_method")) {
        const auto& v = j.at("inner_method");
        if (v == "smoothed")
            c.sca.method = InnerMethod::smoothed;
        else if (v == "supergradient")
            c.sca.method = InnerMethod::supergradient;
        else
            throw std::invalid_argument("ScenarioConfig: inner_method must be 'smoothed' or 'supergradient'");
    }
    c.validate();
    return c;
}

inline ScenarioConfig config_from_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("ScenarioConfig: malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

struct UserDistances {
    double bs_user;
    double irs_user;
};

/// Users on a semicircle of radius d around the IRS at angles k pi/(K+1); the BS sits at distance D.
inline std::vector<UserDistances> user_positions(std::size_t K, double D, double d)
{
    std::vector<UserDistances> out;
    out.reserve(K);
    for (std::size_t k = 1; k <= K; ++k) {
        const double theta = static_cast<double>(k) * std::numbers::pi / static_cast<double>(K + 1);
        const double x = D + d * std::cos(theta);
        const double y = d * std::sin(theta);
        out.push_back({std::hypot(x, y), d});
    }
    return out;
}

inline std::vector<UserDistances> user_positions(const ScenarioConfig& cfg)
{
    return user_positions(cfg.K, cfg.D_bs_irs, cfg.d_irs_user);
}

struct ChannelRealization {
    std::size_t index = 0;
    std::vector<UserChannel> users;

    std::size_t K() const { return users.size(); }
    std::size_t N() const { return users.empty() ? 0 : users.front().direct.N(); }
    std::size_t M() const { return users.empty() ? 0 : users.front().cascaded.M(); }
};

/// Deterministic in (seed, index). Element m's links come from its own substream,
/// so the first M' columns are identical for every M >= M'.
inline ChannelRealization generate_realization(const ScenarioConfig& cfg, std::size_t index)
{
    cfg.validate();
    const auto dist = user_positions(cfg);
    const double zeta_bi = path_loss(cfg.D_bs_irs, cfg.beta_bi, cfg.zeta0_db, cfg.D0);

    std::vector<TapVector> t_links;
    std::vector<std::vector<TapVector>> r_links(cfg.K);
    t_links.reserve(cfg.M);
    for (std::size_t m = 0; m < cfg.M; ++m) {
        auto rng_t = substream(cfg.seed, index, StreamTag::bs_irs, m);
        t_links.push_back(sample_taps(zeta_bi, cfg.L1, rng_t));
        auto rng_r = substream(cfg.seed, index, StreamTag::irs_user, m);
        for (std::size_t k = 0; k < cfg.K; ++k)
            r_links[k].push_back(sample_taps(path_loss(dist[k].irs_user, cfg.beta_iu, cfg.zeta0_db, cfg.D0), cfg.L2, rng_r));
    }

    ChannelRealization out;
    out.index = index;
    out.users.reserve(cfg.K);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        auto rng_d = substream(cfg.seed, index, StreamTag::direct, k);
        const double zeta_bu = path_loss(dist[k].bs_user, cfg.beta_bu, cfg.zeta0_db, cfg.D0);
        UserChannel u{DirectChannel(sample_taps(zeta_bu, cfg.L0, rng_d), cfg.N),
                      build_cascaded_matrix(r_links[k], t_links, cfg.N)};
        out.users.push_back(std::move(u));
    }
    return out;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_SCENARIO_HPP
