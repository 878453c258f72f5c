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

// Exhaustive reference solver for tiny instances: every RB-to-user assignment,
// optionally every phase combination on a grid, max-min powers per assignment.

#ifndef IRS_OFDMA_ORACLE_HPP
#define IRS_OFDMA_ORACLE_HPP

#include "irs_ofdma/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace irs_ofdma {

inline constexpr double kMaxOracleAssignments = 1e4;
inline constexpr double kMaxOraclePhasePoints = 1e6;

/// 256 points when M*Q <= 2, 64 points when M*Q <= 3, else 16.
inline std::size_t default_grid_points(std::size_t M, std::size_t Q)
{
    const std::size_t d = M * Q;
    return d <= 2 ? 256 : d <= 3 ? 64 : 16;
}

struct OracleResult {
    double rate = 0.0;
    std::vector<int> user;            // slot-major Q x N
    std::vector<double> phases;       // Q x M, empty for fixed CNRs
    std::size_t assignments = 0;      // evaluated per phase point
    std::size_t phase_points = 1;
};

namespace oracle_detail {

// Power split of one slot maximizing sum w ln(1 + g p), found by bisection on the water level.
inline void level_fill(const std::vector<double>& w, const std::vector<double>& g, double P, std::vector<double>& p)
{
    p.assign(w.size(), 0.0);
    auto spent = [&](double level) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j)
            if (w[j] > 0.0 && g[j] > 0.0)
                s += std::max(0.0, w[j] * level - 1.0 / g[j]);
        return s;
    };
    bool any = false;
    for (std::size_t j = 0; j < w.size(); ++j)
        any = any || (w[j] > 0.0 && g[j] > 0.0);
    if (!any)
        return;
    double lo = 0.0, hi = 1.0;
    while (spent(hi) < P)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (spent(mid) < P ? lo : hi) = mid;
    }
    for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] > 0.0 && g[j] > 0.0)
            p[j] = std::max(0.0, w[j] * lo - 1.0 / g[j]);
}

// Rates of every user for a fixed assignment and user weights.
inline std::vector<double> weighted_rates(const std::vector<double>& g, std::size_t K, std::size_t Q, std::size_t N,
                                          const std::vector<int>& user, const std::vector<double>& weight, double P)
{
    std::vector<double> r(K, 0.0), w(N), gs(N), p;
    for (std::size_t q = 0; q < Q; ++q) {
        for (std::size_t n = 0; n < N; ++n) {
            const auto k = static_cast<std::size_t>(user[q * N + n]);
            w[n] = weight[k];
            gs[n] = g[(k * Q + q) * N + n];
        }
        level_fill(w, gs, P, p);
        for (std::size_t n = 0; n < N; ++n)
            r[static_cast<std::size_t>(user[q * N + n])] += std::log2(1.0 + gs[n] * p[n]);
    }
    for (double& v : r)
        v /= static_cast<double>(N * Q);
    return r;
}

inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

// Max-min rate over the powers for one fixed assignment.
inline double assignment_value(const std::vector<double>& g, std::size_t K, std::size_t Q, std::size_t N,
                               const std::vector<int>& user, double P)
{
    std::vector<bool> served(K, false);
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t n = 0; n < N; ++n) {
            const auto k = static_cast<std::size_t>(user[q * N + n]);
            if (g[(k * Q + q) * N + n] > 0.0)
                served[k] = true;
        }
    if (std::find(served.begin(), served.end(), false) != served.end())
        return 0.0;
    if (K == 1)
        return weighted_rates(g, K, Q, N, user, {1.0}, P)[0];
    if (K == 2) {
        // User 0's rate grows with its weight; the optimum balances the two.
        double lo = 0.0, hi = 1.0, best = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            const auto r = weighted_rates(g, K, Q, N, user, {mid, 1.0 - mid}, P);
            best = std::max(best, min_of(r));
            (r[0] < r[1] ? lo : hi) = mid;
        }
        return best;
    }
    std::vector<double> wt(K, 1.0 / static_cast<double>(K));
    double best = 0.0;
    for (int it = 1; it <= 3000; ++it) {
        const auto r = weighted_rates(g, K, Q, N, user, wt, P);
        const double lo = min_of(r), top = *std::max_element(r.begin(), r.end());
        best = std::max(best, lo);
        if (!(top > 0.0))
            break;
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            wt[k] = std::max(wt[k] * std::exp(-(r[k] - lo) / top / std::sqrt(static_cast<double>(it))), 1e-300);
            z += wt[k];
        }
        for (double& v : wt)
            v /= z;
    }
    return best;
}

inline void check_assignment_count(std::size_t K, std::size_t Q, std::size_t N)
{
    if (std::pow(static_cast<double>(K), static_cast<double>(N * Q)) > kMaxOracleAssignments)
        throw std::invalid_argument("brute_force_oracle: too many assignments (K^(NQ) > 1e4)");
}

// Best assignment for a K x Q x N CNR array (k-major).
inline void enumerate(const std::vector<double>& g, std::size_t K, std::size_t Q, std::size_t N, double P,
                      OracleResult& best)
{
    std::vector<int> user(Q * N, 0);
    std::size_t count = 0;
    while (true) {
        ++count;
        const double v = assignment_value(g, K, Q, N, user, P);
        if (best.user.empty() || v > best.rate) {
            best.rate = v;
            best.user = user;
        }
        std::size_t i = 0;
        while (i < user.size() && ++user[i] == static_cast<int>(K))
            user[i++] = 0;
        if (i == user.size())
            break;
    }
    best.assignments = count;
}

} // namespace oracle_detail

/// Fixed CNRs: best max-min rate over all assignments.
inline OracleResult brute_force_oracle(const CnrGrid& g, double P)
{
    if (g.K() == 0 || g.Q() == 0 || g.N() == 0)
        throw std::invalid_argument("brute_force_oracle: empty instance");
    if (!(P > 0.0))
        throw std::invalid_argument("brute_force_oracle: power budget must be positive");
    oracle_detail::check_assignment_count(g.K(), g.Q(), g.N());
    const std::vector<double> values(g.values().begin(), g.values().end());
    OracleResult res;
    oracle_detail::enumerate(values, g.K(), g.Q(), g.N(), P, res);
    return res;
}

/// Channels: additionally grids every reflection phase (unit modulus) over
/// grid_points uniform points. gamma_sigma2 is the product gap x noise power.
inline OracleResult brute_force_oracle(std::span<const UserChannel> users, std::size_t Q, double P,
                                       double gamma_sigma2, std::size_t grid_points)
{
    const std::size_t K = users.size();
    if (K == 0 || Q == 0)
        throw std::invalid_argument("brute_force_oracle: empty instance");
    if (!(P > 0.0) || !(gamma_sigma2 > 0.0) || grid_points == 0)
        throw std::invalid_argument("brute_force_oracle: bad budget, noise or grid size");
    const std::size_t N = users.front().direct.N(), M = users.front().cascaded.M();
    oracle_detail::check_assignment_count(K, Q, N);
    const std::size_t dims = M * Q;
    if (std::pow(static_cast<double>(grid_points), static_cast<double>(dims)) > kMaxOraclePhasePoints)
        throw std::invalid_argument("brute_force_oracle: phase grid too large (grid^(MQ) > 1e6)");

    std::vector<double> grid(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
        grid[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid_points);

    OracleResult best;
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> g(K * Q * N);
    std::size_t points = 0;
    while (true) {
        ++points;
        for (std::size_t k = 0; k < K; ++k) {
            const auto& hd = users[k].direct.vector();
            const auto& V = users[k].cascaded.matrix();
            for (std::size_t q = 0; q < Q; ++q) {
                std::vector<std::complex<double>> h(N);
                for (std::size_t l = 0; l < N; ++l) {
                    h[l] = hd(static_cast<Eigen::Index>(l));
                    for (std::size_t m = 0; m < M; ++m)
                        h[l] += V(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) *
                                std::polar(1.0, grid[idx[q * M + m]]);
                }
                for (std::size_t n = 0; n < N; ++n) {
                    std::complex<double> H = 0.0;
                    for (std::size_t l = 0; l < N; ++l)
                        H += h[l] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(n * l) /
                                                        static_cast<double>(N));
                    g[(k * Q + q) * N + n] = std::norm(H) / gamma_sigma2;
                }
            }
        }
        OracleResult here;
        oracle_detail::enumerate(g, K, Q, N, P, here);
        if (here.rate > best.rate || best.user.empty()) {
            best.rate = here.rate;
            best.user = here.user;
            best.assignments = here.assignments;
            best.phases.resize(dims);
            for (std::size_t d = 0; d < dims; ++d)
                best.phases[d] = grid[idx[d]];
        }
        std::size_t i = 0;
        while (i < dims && ++idx[i] == grid_points)
            idx[i++] = 0;
        if (i == dims)
            break;
    }
    best.phase_points = points;
    return best;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_ORACLE_HPP
