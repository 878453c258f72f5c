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

// Alternating optimization between RB/power allocation and the reflection
// schedule from several random initializations, plus the benchmark schemes.

#ifndef IRS_OFDMA_ALTERNATING_OPTIMIZER_HPP
#define IRS_OFDMA_ALTERNATING_OPTIMIZER_HPP

#include "irs_ofdma/channel_model.hpp"
#include "irs_ofdma/passive_beamforming.hpp"
#include "irs_ofdma/resource_allocation.hpp"
#include "irs_ofdma/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irs_ofdma {

enum class Scheme { dynamic, fixed, random_phase_1, random_phase_2, no_irs };

inline constexpr std::array<Scheme, 5> kAllSchemes = {Scheme::dynamic, Scheme::fixed, Scheme::random_phase_1,
                                                      Scheme::random_phase_2, Scheme::no_irs};

inline std::string_view to_string(Scheme s)
{
    switch (s) {
    case Scheme::dynamic: return "dynamic";
    case Scheme::fixed: return "fixed";
    case Scheme::random_phase_1: return "random_phase_1";
    case Scheme::random_phase_2: return "random_phase_2";
    case Scheme::no_irs: return "no_irs";
    }
    throw std::invalid_argument("unknown scheme");
}

inline Scheme parse_scheme(std::string_view name)
{
    for (Scheme s : kAllSchemes)
        if (to_string(s) == name)
            return s;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

struct SolveResult {
    Allocation allocation;
    ReflectionSchedule schedule;
    double common_rate = 0.0;
    std::vector<double> per_user_rates;
    std::vector<double> trace; // common rate after each outer iteration of the selected initialization
    std::size_t init_index = 0;
    Scheme scheme = Scheme::dynamic;
};

/// Unit-modulus coefficients with i.i.d. phases uniform on [-pi, pi).
template <class Rng>
ReflectionSchedule random_schedule(Rng& rng, std::size_t M, std::size_t Q)
{
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    std::vector<ReflectionVector> phis(Q, ReflectionVector(static_cast<Eigen::Index>(M)));
    for (auto& phi : phis)
        for (Eigen::Index m = 0; m < phi.size(); ++m)
            phi(m) = std::polar(1.0, phase(rng));
    return ReflectionSchedule(std::move(phis));
}

/// Starting point of one alternating-optimization run.
struct AoStart {
    ReflectionSchedule schedule;
    std::optional<Allocation> allocation; // warm start: current allocation under `schedule`
};

/// One initialization: allocation step, then reflection step, until the
/// common rate gains less than outer_tolerance. Both steps only accept non-decrease.
inline SolveResult alternate(const FrequencyChannels& fc, const ScenarioConfig& cfg, AoStart start, bool tied)
{
    const double P = cfg.P_watt();
    SolveResult res;
    res.scheme = tied ? Scheme::fixed : Scheme::dynamic;
    res.schedule = std::move(start.schedule);
    double current = -std::numeric_limits<double>::infinity();
    bool have_alloc = false;
    if (start.allocation) {
        res.allocation = *start.allocation;
        current = compute_rates(res.allocation, fc.cnr(res.schedule)).common;
        have_alloc = true;
    }
    double previous = current;
    for (std::size_t it = 0; it < cfg.ao.max_outer_iterations; ++it) {
        const P11Result ra = solve_p11(fc.cnr(res.schedule), P, cfg.dual);
        if (!have_alloc || ra.common_rate() >= current) {
            res.allocation = ra.allocation;
            current = ra.common_rate();
            have_alloc = true;
        }
        const ScaResult pb = sca_solve_p12(res.allocation, fc, res.schedule, tied, cfg.sca);
        res.schedule = pb.schedule;
        current = std::max(current, pb.rate);
        res.trace.push_back(current);
        if (current - previous < cfg.ao.outer_tolerance)
            break;
        previous = current;
    }
    const Rates r = compute_rates(res.allocation, fc.cnr(res.schedule));
    res.per_user_rates = r.per_user;
    res.common_rate = r.common;
    return res;
}

namespace detail {

inline std::uint64_t scheme_code(Scheme s) { return static_cast<std::uint64_t>(s) + 1; }

inline SolveResult allocation_only(const FrequencyChannels& fc, const ScenarioConfig& cfg, ReflectionSchedule schedule,
                                   Scheme scheme)
{
    const CnrGrid g = fc.cnr(schedule);
    const P11Result ra = solve_p11(g, cfg.P_watt(), cfg.dual);
    SolveResult res;
    res.scheme = scheme;
    res.allocation = ra.allocation;
    res.schedule = std::move(schedule);
    res.per_user_rates = ra.rates.per_user;
    res.common_rate = ra.rates.common;
    res.trace = {res.common_rate};
    return res;
}

} // namespace detail

/// Best of cfg.I random initializations (plus an optional warm start, tried last).
inline SolveResult solve_p1(const ChannelRealization& realization, const ScenarioConfig& cfg, bool tied,
                            const SolveResult* warm = nullptr)
{
    const FrequencyChannels fc(realization.users, cfg.gamma_linear(), cfg.sigma2_watt());
    const Scheme scheme = tied ? Scheme::fixed : Scheme::dynamic;
    std::vector<AoStart> starts;
    for (std::size_t i = 0; i < cfg.I; ++i) {
        auto rng = substream(cfg.seed, realization.index, StreamTag::init, detail::scheme_code(scheme), i);
        ReflectionSchedule s = tied ? ReflectionSchedule::tied(random_schedule(rng, fc.M(), 1)[0], cfg.Q)
                                    : random_schedule(rng, fc.M(), cfg.Q);
        starts.push_back({std::move(s), std::nullopt});
    }
    if (warm) {
        if (warm->schedule.Q() != cfg.Q || warm->schedule.M() != fc.M())
            throw std::invalid_argument("solve_p1: warm start does not match the realization");
        if (tied && !warm->schedule.is_tied())
            throw std::invalid_argument("solve_p1: tied mode needs a tied warm start");
        starts.push_back({warm->schedule, warm->allocation});
    }

    SolveResult best;
    bool have = false;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        SolveResult r = alternate(fc, cfg, std::move(starts[i]), tied);
        r.init_index = i;
        if (!have || r.common_rate > best.common_rate) {
            best = std::move(r);
            have = true;
        }
    }
    best.scheme = scheme;
    return best;
}

/// Runs one scheme on one realization. `warm` (a fixed-beamforming result) seeds the dynamic scheme.
inline SolveResult run_scheme(Scheme scheme, const ChannelRealization& realization, const ScenarioConfig& cfg,
                              const SolveResult* warm = nullptr)
{
    switch (scheme) {
    case Scheme::dynamic: return solve_p1(realization, cfg, false, warm);
    case Scheme::fixed: return solve_p1(realization, cfg, true);
    case Scheme::random_phase_1:
    case Scheme::random_phase_2: {
        const FrequencyChannels fc(realization.users, cfg.gamma_linear(), cfg.sigma2_watt());
        auto rng = substream(cfg.seed, realization.index, StreamTag::random_phase, detail::scheme_code(scheme));
        ReflectionSchedule s = scheme == Scheme::random_phase_1
                                   ? ReflectionSchedule::tied(random_schedule(rng, fc.M(), 1)[0], cfg.Q)
                                   : random_schedule(rng, fc.M(), cfg.Q);
        return detail::allocation_only(fc, cfg, std::move(s), scheme);
    }
    case Scheme::no_irs: {
        const FrequencyChannels fc(realization.users, cfg.gamma_linear(), cfg.sigma2_watt());
        return detail::allocation_only(fc, cfg, ReflectionSchedule::zeros(fc.M(), cfg.Q), scheme);
    }
    }
    throw std::invalid_argument("run_scheme: unknown scheme");
}

/// Runs the requested schemes in the given order. When both beamforming
/// schemes are requested, the fixed solution warm-starts the dynamic one.
inline std::vector<SolveResult> run_schemes(std::span<const Scheme> schemes, const ChannelRealization& realization,
                                            const ScenarioConfig& cfg)
{
    std::vector<std::optional<SolveResult>> out(schemes.size());
    const auto fixed_it = std::find(schemes.begin(), schemes.end(), Scheme::fixed);
    const bool dynamic_requested = std::find(schemes.begin(), schemes.end(), Scheme::dynamic) != schemes.end();
    if (fixed_it != schemes.end() && dynamic_requested)
        out[static_cast<std::size_t>(fixed_it - schemes.begin())] = run_scheme(Scheme::fixed, realization, cfg);
    const SolveResult* warm = fixed_it != schemes.end() && dynamic_requested
                                  ? &*out[static_cast<std::size_t>(fixed_it - schemes.begin())]
                                  : nullptr;
    for (std::size_t i = 0; i < schemes.size(); ++i)
        if (!out[i])
            out[i] = run_scheme(schemes[i], realization, cfg, schemes[i] == Scheme::dynamic ? warm : nullptr);
    std::vector<SolveResult> res;
    res.reserve(out.size());
    for (auto& r : out)
        res.push_back(std::move(*r));
    return res;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_ALTERNATING_OPTIMIZER_HPP
