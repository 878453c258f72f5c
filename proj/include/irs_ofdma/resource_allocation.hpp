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

// Max-min RB and power allocation for fixed CNRs.
//
// The dual of the max-min problem decomposes per resource block once the
// user weights lambda (on the probability simplex) and the per-slot power
// prices mu_q are fixed: every RB goes to the user with the largest
// water-filled score lambda_k log2(1 + g p) / (NQ) - mu_q p. For each lambda
// iterate the prices are resolved exactly by bisection so that every slot
// spends its budget; lambda itself follows projected subgradient descent on
// the simplex. Primal candidates are repaired to spend the budget exactly and
// the best one is finally rate-balanced over its frozen assignment.

#ifndef IRS_OFDMA_RESOURCE_ALLOCATION_HPP
#define IRS_OFDMA_RESOURCE_ALLOCATION_HPP

#include "irs_ofdma/channel_model.hpp"
#include "irs_ofdma/solver_params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace irs_ofdma {

/// RB-to-user map and per-RB powers. Exclusive assignment is structural:
/// each RB stores at most one user index (-1 when unassigned).
struct Allocation {
    std::size_t K = 0, Q = 0, N = 0;
    std::vector<int> user;     // Q x N, row-major
    std::vector<double> power; // Q x N, Watt

    Allocation() = default;
    Allocation(std::size_t K_, std::size_t Q_, std::size_t N_)
        : K(K_), Q(Q_), N(N_), user(Q_ * N_, -1), power(Q_ * N_, 0.0)
    {
    }

    int& user_at(std::size_t q, std::size_t n) { return user[q * N + n]; }
    int user_at(std::size_t q, std::size_t n) const { return user[q * N + n]; }
    double& power_at(std::size_t q, std::size_t n) { return power[q * N + n]; }
    double power_at(std::size_t q, std::size_t n) const { return power[q * N + n]; }

    bool alpha(std::size_t k, std::size_t q, std::size_t n) const { return user_at(q, n) == static_cast<int>(k); }

    /// Binary Q x N indicator slice of user k.
    std::vector<std::uint8_t> alpha_slice(std::size_t k) const
    {
        std::vector<std::uint8_t> a(Q * N, 0);
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = user[i] == static_cast<int>(k) ? 1 : 0;
        return a;
    }

    double slot_power(std::size_t q) const
    {
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n)
            s += power_at(q, n);
        return s;
    }

    /// Throws std::logic_error naming the first violated constraint.
    void validate(double P) const
    {
        if (user.size() != Q * N || power.size() != Q * N)
            throw std::logic_error("Allocation: storage does not match Q x N");
        for (std::size_t q = 0; q < Q; ++q) {
            for (std::size_t n = 0; n < N; ++n) {
                const int k = user_at(q, n);
                const double p = power_at(q, n);
                if (k < -1 || k >= static_cast<int>(K))
                    throw std::logic_error("Allocation: invalid user index at RB (" + std::to_string(q) + "," +
                                           std::to_string(n) + ")");
                if (!(p >= 0.0) || !std::isfinite(p))
                    throw std::logic_error("Allocation: negative or non-finite power");
                if (p > 0.0 && k < 0)
                    throw std::logic_error("Allocation: power on an unassigned RB");
            }
            if (slot_power(q) > P * (1.0 + 1e-9))
                throw std::logic_error("Allocation: slot " + std::to_string(q) + " exceeds the power budget");
        }
    }
};

struct Rates {
    std::vector<double> per_user;
    double common = 0.0;
};

inline Rates compute_rates(const Allocation& alloc, const CnrGrid& g)
{
    if (g.K() != alloc.K || g.Q() != alloc.Q || g.N() != alloc.N)
        throw std::invalid_argument("compute_rates: allocation and CNR grid shapes differ");
    Rates r;
    r.per_user.assign(alloc.K, 0.0);
    const double scale = 1.0 / static_cast<double>(alloc.N * alloc.Q);
    for (std::size_t q = 0; q < alloc.Q; ++q)
        for (std::size_t n = 0; n < alloc.N; ++n) {
            const int k = alloc.user_at(q, n);
            if (k >= 0)
                r.per_user[static_cast<std::size_t>(k)] +=
                    std::log2(1.0 + g.at(static_cast<std::size_t>(k), q, n) * alloc.power_at(q, n)) * scale;
        }
    r.common = alloc.K == 0 ? 0.0 : *std::min_element(r.per_user.begin(), r.per_user.end());
    return r;
}

/// Lagrange multipliers: user weights on the simplex and per-slot power prices.
struct DualState {
    std::vector<double> lambda;
    std::vector<double> mu;

    void validate() const
    {
        double s = 0.0;
        for (double l : lambda) {
            if (!(l >= 0.0))
                throw std::logic_error("DualState: negative user weight");
            s += l;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::logic_error("DualState: user weights do not sum to one");
        for (double m : mu)
            if (!(m > 0.0))
                throw std::logic_error("DualState: power price must be positive");
    }
};

/// Euclidean projection onto the probability simplex (sort-based).
inline std::vector<double> project_simplex(std::span<const double> v)
{
    if (v.empty())
        return {};
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumsum += u[i];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0)
            theta = t;
    }
    std::vector<double> out(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::max(v[i] - theta, 0.0);
        s += out[i];
    }
    for (double& x : out)
        x /= s;
    return out;
}

/// KKT power of lambda_k log2(1 + g p)/(NQ) - mu_q p.
inline double waterfill_power(double lambda_k, double mu_q, double g, std::size_t N, std::size_t Q)
{
    if (!(mu_q > 0.0))
        throw std::invalid_argument("waterfill_power: power price must be positive");
    if (!(g > 0.0))
        return 0.0;
    const double level = lambda_k / (static_cast<double>(N * Q) * mu_q * std::numbers::ln2);
    return std::max(0.0, level - 1.0 / g);
}

struct RbWinner {
    std::size_t user = 0;
    double power = 0.0;
    double score = 0.0;
};

/// Best user for one RB at fixed multipliers; ties go to the lowest index.
inline RbWinner per_rb_winner(std::span<const double> lambda, double mu_q, std::span<const double> g_col,
                              std::size_t N, std::size_t Q)
{
    if (lambda.size() != g_col.size())
        throw std::invalid_argument("per_rb_winner: lambda and CNR column sizes differ");
    RbWinner best;
    const double scale = 1.0 / static_cast<double>(N * Q);
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        const double p = waterfill_power(lambda[k], mu_q, g_col[k], N, Q);
        const double s = p > 0.0 ? lambda[k] * std::log2(1.0 + g_col[k] * p) * scale - mu_q * p : 0.0;
        if (k == 0 || s > best.score)
            best = {k, p, s};
    }
    return best;
}

struct SlotSolution {
    double mu = 0.0;
    std::vector<std::size_t> winner; // per sub-band
    std::vector<double> power;       // per sub-band
    std::vector<double> score;       // per sub-band, >= 0
    double dual_value = 0.0;         // mu P + sum_n score
};

namespace detail {

// Per-slot scorer with the logarithms hoisted out of the mu search:
// with w = lambda/(NQ ln 2) the active score is w (ln(g w) - ln mu - 1) + mu/g.
class SlotScorer {
public:
    SlotScorer(std::span<const double> lambda, std::span<const double> g_slot, std::size_t N, std::size_t Q)
        : K_(lambda.size()), N_(g_slot.size() / std::max<std::size_t>(lambda.size(), 1)), g_(g_slot)
    {
        const double denom = static_cast<double>(N * Q) * std::numbers::ln2;
        w_.resize(K_);
        log_gw_.resize(K_ * N_);
        thresh_.resize(K_ * N_);
        for (std::size_t k = 0; k < K_; ++k) {
            w_[k] = lambda[k] / denom;
            for (std::size_t n = 0; n < N_; ++n) {
                const double gw = g_[k * N_ + n] * w_[k];
                thresh_[k * N_ + n] = gw;
                log_gw_[k * N_ + n] = gw > 0.0 ? std::log(gw) : 0.0;
                max_thresh_ = std::max(max_thresh_, gw);
            }
        }
    }

    double max_threshold() const { return max_thresh_; }

    /// Total winning power at price mu.
    double spend(double mu) const
    {
        const double log_mu = std::log(mu);
        double total = 0.0;
        for (std::size_t n = 0; n < N_; ++n) {
            double best_s = 0.0, best_p = 0.0;
            for (std::size_t k = 0; k < K_; ++k) {
                const std::size_t i = k * N_ + n;
                if (thresh_[i] > mu) {
                    const double s = w_[k] * (log_gw_[i] - log_mu - 1.0) + mu / g_[i];
                    if (s > best_s) {
                        best_s = s;
                        best_p = w_[k] / mu - 1.0 / g_[i];
                    }
                }
            }
            total += best_p;
        }
        return total;
    }

    /// Winner per sub-band at price mu; returns the total power.
    double evaluate(double mu, SlotSolution& out) const
    {
        out.winner.assign(N_, 0);
        out.power.assign(N_, 0.0);
        out.score.assign(N_, 0.0);
        const double log_mu = std::log(mu);
        double total = 0.0;
        for (std::size_t n = 0; n < N_; ++n) {
            std::size_t best_k = 0;
            double best_s = 0.0, best_p = 0.0;
            for (std::size_t k = 0; k < K_; ++k) {
                const std::size_t i = k * N_ + n;
                double s = 0.0, p = 0.0;
                if (thresh_[i] > mu) {
                    s = w_[k] * (log_gw_[i] - log_mu - 1.0) + mu / g_[i];
                    p = w_[k] / mu - 1.0 / g_[i];
                }
                if (k == 0 || s > best_s) {
                    best_k = k;
                    best_s = s;
                    best_p = p;
                }
            }
            out.winner[n] = best_k;
            out.power[n] = best_p;
            out.score[n] = best_s;
            total += best_p;
        }
        return total;
    }

private:
    std::size_t K_, N_;
    std::span<const double> g_;
    std::vector<double> w_, log_gw_, thresh_;
    double max_thresh_ = 0.0;
};

} // namespace detail

/// Finds mu_q so that the slot's winning powers spend P (within budget_tol P).
/// g_slot holds K x N CNRs of one slot, row-major in (k, n). A positive
/// mu_hint (e.g. the previous price) only changes where the bracket search starts.
inline SlotSolution slot_power_bisection(std::span<const double> lambda, std::span<const double> g_slot, double P,
                                         std::size_t N, std::size_t Q, double budget_tol = 1e-8, double mu_hint = 0.0)
{
    if (!(P > 0.0))
        throw std::invalid_argument("slot_power_bisection: power budget must be positive");
    if (g_slot.size() != lambda.size() * N)
        throw std::invalid_argument("slot_power_bisection: expected K*N CNRs");
    const detail::SlotScorer scorer(lambda, g_slot, N, Q);
    SlotSolution sol;

    auto finish = [&](double mu) {
        scorer.evaluate(mu, sol);
        sol.mu = mu;
        sol.dual_value = mu * P;
        for (double s : sol.score)
            sol.dual_value += s;
        return sol;
    };

    const double ceiling = scorer.max_threshold(); // no RB is active at or above this price
    if (!(ceiling > 0.0))
        return finish(std::numeric_limits<double>::min());

    // Bracket [lo, hi] with spend(lo) >= P > spend(hi); spend is nonincreasing in mu.
    double lo = 0.0, hi = ceiling;
    double factor = 1.05;
    if (mu_hint > 0.0 && mu_hint < ceiling) {
        if (scorer.spend(mu_hint) >= P) {
            lo = mu_hint;
            while (true) {
                const double up = lo * factor;
                if (up >= ceiling)
                    break;
                if (scorer.spend(up) < P) {
                    hi = up;
                    break;
                }
                lo = up;
                factor *= factor;
            }
        }
        else {
            hi = mu_hint;
        }
    }
    if (lo == 0.0) {
        lo = hi;
        for (int i = 0;; ++i) {
            lo /= factor;
            if (scorer.spend(lo) >= P)
                break;
            hi = lo;
            factor = std::min(factor * factor, 1e8);
            if (i > 4000 || lo < std::numeric_limits<double>::min())
                throw std::runtime_error("slot_power_bisection: could not bracket the power budget");
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi))
            break;
        const double total = scorer.spend(mid);
        if (std::abs(total - P) <= budget_tol * P)
            return finish(mid);
        (total > P ? lo : hi) = mid;
    }
    // The spend jumps across P where the winner of some RB switches; stay on the feasible side.
    return finish(hi);
}

/// Exact weighted water-filling over one slot: maximizes sum_j w_j ln(1 + g_j p_j)
/// subject to sum_j p_j = P. Entries with w_j g_j == 0 get no power.
/// Writes into p, using order as scratch.
inline void weighted_waterfill(std::span<const double> w, std::span<const double> g, double P, std::vector<double>& p,
                               std::vector<std::size_t>& order)
{
    const std::size_t n = w.size();
    p.assign(n, 0.0);
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
        if (w[j] > 0.0 && g[j] > 0.0)
            order.push_back(j);
    if (order.empty() || !(P > 0.0))
        return;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ta = w[a] * g[a], tb = w[b] * g[b];
        return ta != tb ? ta > tb : a < b;
    });
    double sum_w = 0.0, sum_inv_g = 0.0, mu = 0.0;
    std::size_t active = 0;
    for (std::size_t a = 0; a < order.size(); ++a) {
        sum_w += w[order[a]];
        sum_inv_g += 1.0 / g[order[a]];
        const double mu_a = sum_w / (P + sum_inv_g);
        active = a + 1;
        mu = mu_a;
        if (a + 1 == order.size() || mu_a >= w[order[a + 1]] * g[order[a + 1]])
            break;
    }
    for (std::size_t a = 0; a < active; ++a) {
        const std::size_t j = order[a];
        p[j] = std::max(0.0, w[j] / mu - 1.0 / g[j]);
    }
}

inline std::vector<double> weighted_waterfill(std::span<const double> w, std::span<const double> g, double P)
{
    std::vector<double> p;
    std::vector<std::size_t> order;
    weighted_waterfill(w, g, P, p, order);
    return p;
}

/// Water-fills every slot over its frozen assignment with per-user weights.
/// A slot whose assigned users all carry zero weight is filled with equal weights.
inline void refill_powers(Allocation& alloc, const CnrGrid& g, std::span<const double> weights, double P)
{
    std::vector<double> w(alloc.N), gv(alloc.N);
    for (std::size_t q = 0; q < alloc.Q; ++q) {
        bool any_weight = false;
        for (std::size_t n = 0; n < alloc.N; ++n) {
            const int k = alloc.user_at(q, n);
            w[n] = k >= 0 ? weights[static_cast<std::size_t>(k)] : 0.0;
            gv[n] = k >= 0 ? g.at(static_cast<std::size_t>(k), q, n) : 0.0;
            any_weight = any_weight || (w[n] > 0.0 && gv[n] > 0.0);
        }
        if (!any_weight)
            for (std::size_t n = 0; n < alloc.N; ++n)
                w[n] = alloc.user_at(q, n) >= 0 ? 1.0 : 0.0;
        const auto p = weighted_waterfill(w, gv, P);
        for (std::size_t n = 0; n < alloc.N; ++n)
            alloc.power_at(q, n) = p[n];
    }
}

/// Drops RBs that ended up without power.
inline void release_idle_rbs(Allocation& alloc)
{
    for (std::size_t i = 0; i < alloc.user.size(); ++i)
        if (!(alloc.power[i] > 0.0)) {
            alloc.user[i] = -1;
            alloc.power[i] = 0.0;
        }
}

/// Best max-min powers for a frozen assignment: searches the user weights of the
/// water-filling by exponentiated-gradient steps on the (convex) dual in the weights.
inline Allocation balance_powers(Allocation alloc, const CnrGrid& g, double P, std::size_t iterations = 300)
{
    const std::size_t K = alloc.K, Q = alloc.Q, N = alloc.N;
    std::vector<bool> has_rb(K, false);
    for (int k : alloc.user)
        if (k >= 0)
            has_rb[static_cast<std::size_t>(k)] = true;
    if (K <= 1 || std::find(has_rb.begin(), has_rb.end(), false) != has_rb.end()) {
        // Max-min is zero (some user has nothing) or there is a single user: plain water-filling.
        refill_powers(alloc, g, std::vector<double>(K, 1.0), P);
        return alloc;
    }

    // Per slot: the assigned RBs, their users and CNRs.
    struct SlotRbs {
        std::vector<std::size_t> n, k;
        std::vector<double> g, w, p;
    };
    std::vector<std::size_t> order;
    std::vector<SlotRbs> slots(Q);
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t n = 0; n < N; ++n)
            if (const int k = alloc.user_at(q, n); k >= 0) {
                slots[q].n.push_back(n);
                slots[q].k.push_back(static_cast<std::size_t>(k));
                slots[q].g.push_back(g.at(static_cast<std::size_t>(k), q, n));
            }
    const double scale = 1.0 / static_cast<double>(N * Q);
    auto rates_for = [&](std::span<const double> nu, std::vector<std::vector<double>>* powers) {
        std::vector<double> r(K, 0.0);
        for (std::size_t q = 0; q < Q; ++q) {
            SlotRbs& s = slots[q];
            s.w.resize(s.k.size());
            bool any = false;
            for (std::size_t i = 0; i < s.k.size(); ++i) {
                s.w[i] = nu[s.k[i]];
                any = any || (s.w[i] > 0.0 && s.g[i] > 0.0);
            }
            if (!any)
                std::fill(s.w.begin(), s.w.end(), 1.0);
            weighted_waterfill(s.w, s.g, P, s.p, order);
            for (std::size_t i = 0; i < s.p.size(); ++i)
                if (s.p[i] > 0.0)
                    r[s.k[i]] += std::log2(1.0 + s.g[i] * s.p[i]) * scale;
            if (powers)
                (*powers)[q] = s.p;
        }
        return r;
    };

    std::vector<double> nu(K, 1.0 / static_cast<double>(K)), best_nu = nu;
    double best_rate = -1.0;
    const double eta = 1.0;
    for (std::size_t t = 1; t <= iterations; ++t) {
        const std::vector<double> r = rates_for(nu, nullptr);
        const double lo = *std::min_element(r.begin(), r.end());
        const double top = *std::max_element(r.begin(), r.end());
        if (lo > best_rate) {
            best_rate = lo;
            best_nu = nu;
        }
        if (!(top > 0.0) || (top - lo) / top < 1e-7)
            break;
        // Normalized rate spread; the weights of users above the minimum shrink.
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            nu[k] *= std::exp(-eta / std::sqrt(static_cast<double>(t)) * (r[k] - lo) / top);
            nu[k] = std::max(nu[k], 1e-300);
            z += nu[k];
        }
        for (double& v : nu)
            v /= z;
    }

    std::vector<std::vector<double>> powers(Q);
    rates_for(best_nu, &powers);
    std::fill(alloc.power.begin(), alloc.power.end(), 0.0);
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t i = 0; i < slots[q].n.size(); ++i)
            alloc.power_at(q, slots[q].n[i]) = powers[q][i];
    return alloc;
}

namespace detail {

// Leximin order on rate vectors: compare the sorted rates from the smallest up.
inline bool leximin_better(std::vector<double> a, std::vector<double> b, double eps = 1e-12)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i] + eps)
            return true;
        if (a[i] < b[i] - eps)
            return false;
    }
    return false;
}

// Scratch for re-filling one slot without touching the allocation.
struct SlotFill {
    std::vector<int> user;
    std::vector<double> w, g, p, rate; // rate: per-user contribution of the slot
    std::vector<std::size_t> order;
};

inline void fill_slot(SlotFill& f, const CnrGrid& g, std::span<const double> weights, double P, std::size_t q,
                      std::size_t K, std::size_t N, std::size_t Q)
{
    f.w.assign(N, 0.0);
    f.g.assign(N, 0.0);
    bool any = false;
    for (std::size_t n = 0; n < N; ++n) {
        const int k = f.user[n];
        if (k < 0)
            continue;
        f.w[n] = weights[static_cast<std::size_t>(k)];
        f.g[n] = g.at(static_cast<std::size_t>(k), q, n);
        any = any || (f.w[n] > 0.0 && f.g[n] > 0.0);
    }
    if (!any)
        for (std::size_t n = 0; n < N; ++n)
            f.w[n] = f.user[n] >= 0 ? 1.0 : 0.0;
    weighted_waterfill(f.w, f.g, P, f.p, f.order);
    f.rate.assign(K, 0.0);
    const double scale = 1.0 / static_cast<double>(N * Q);
    for (std::size_t n = 0; n < N; ++n)
        if (f.user[n] >= 0 && f.p[n] > 0.0)
            f.rate[static_cast<std::size_t>(f.user[n])] += std::log2(1.0 + f.g[n] * f.p[n]) * scale;
}

} // namespace detail

/// Local search over assignments: repeatedly hands one RB to the currently
/// poorest user (or, failing that, swaps one of its RBs with another user's
/// RB in the same slot) when that improves the rate vector in leximin order.
/// Slots are water-filled with the given user weights after every move.
inline Allocation improve_assignment(Allocation alloc, const CnrGrid& g, std::span<const double> weights, double P,
                                     std::size_t max_moves = 0, bool swaps = true)
{
    const std::size_t K = alloc.K, Q = alloc.Q, N = alloc.N;
    if (max_moves == 0)
        max_moves = 4 * Q * N;
    std::vector<detail::SlotFill> slots(Q);
    std::vector<double> rates(K, 0.0);
    for (std::size_t q = 0; q < Q; ++q) {
        slots[q].user.assign(alloc.user.begin() + static_cast<std::ptrdiff_t>(q * N),
                             alloc.user.begin() + static_cast<std::ptrdiff_t>((q + 1) * N));
        detail::fill_slot(slots[q], g, weights, P, q, K, N, Q);
        for (std::size_t k = 0; k < K; ++k)
            rates[k] += slots[q].rate[k];
    }
    detail::SlotFill trial;
    for (std::size_t move = 0; move < max_moves; ++move) {
        const auto poorest = static_cast<std::size_t>(std::min_element(rates.begin(), rates.end()) - rates.begin());
        std::vector<double> best_rates = rates;
        std::size_t best_q = Q, best_n = N;
        for (std::size_t q = 0; q < Q; ++q) {
            for (std::size_t n = 0; n < N; ++n) {
                if (slots[q].user[n] == static_cast<int>(poorest) || !(g.at(poorest, q, n) > 0.0))
                    continue;
                trial.user = slots[q].user;
                trial.user[n] = static_cast<int>(poorest);
                detail::fill_slot(trial, g, weights, P, q, K, N, Q);
                std::vector<double> r = rates;
                for (std::size_t k = 0; k < K; ++k)
                    r[k] += trial.rate[k] - slots[q].rate[k];
                if (detail::leximin_better(r, best_rates)) {
                    best_rates = std::move(r);
                    best_q = q;
                    best_n = n;
                }
            }
        }
        std::size_t swap_n = N;
        if (best_q == Q && swaps) {
            // No single move helps: try exchanging one RB of the poorest user with
            // an RB of another user in the same slot.
            for (std::size_t q = 0; q < Q; ++q)
                for (std::size_t n = 0; n < N; ++n) {
                    if (slots[q].user[n] != static_cast<int>(poorest))
                        continue;
                    for (std::size_t m = 0; m < N; ++m) {
                        const int other = slots[q].user[m];
                        if (other < 0 || other == static_cast<int>(poorest) || !(g.at(poorest, q, m) > 0.0))
                            continue;
                        trial.user = slots[q].user;
                        std::swap(trial.user[n], trial.user[m]);
                        detail::fill_slot(trial, g, weights, P, q, K, N, Q);
                        std::vector<double> r = rates;
                        for (std::size_t k = 0; k < K; ++k)
                            r[k] += trial.rate[k] - slots[q].rate[k];
                        if (detail::leximin_better(r, best_rates)) {
                            best_rates = std::move(r);
                            best_q = q;
                            best_n = n;
                            swap_n = m;
                        }
                    }
                }
        }
        if (best_q == Q)
            break;
        if (swap_n < N)
            std::swap(slots[best_q].user[best_n], slots[best_q].user[swap_n]);
        else
            slots[best_q].user[best_n] = static_cast<int>(poorest);
        detail::fill_slot(slots[best_q], g, weights, P, best_q, K, N, Q);
        rates = std::move(best_rates);
    }
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t n = 0; n < N; ++n) {
            alloc.user_at(q, n) = slots[q].user[n];
            alloc.power_at(q, n) = slots[q].p[n];
        }
    return alloc;
}

/// Exhaustive-neighbourhood local search for small grids: single-RB moves to
/// any user and same-slot swaps, each scored by its balanced max-min rate.
inline Allocation improve_assignment_balanced(Allocation alloc, const CnrGrid& g, double P,
                                              std::size_t max_rounds = 50)
{
    const std::size_t K = alloc.K, Q = alloc.Q, N = alloc.N;
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t n = 0; n < N; ++n)
            if (alloc.user_at(q, n) < 0)
                alloc.user_at(q, n) = 0;
    Allocation best = balance_powers(alloc, g, P);
    double best_rate = compute_rates(best, g).common;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        Allocation round_best = best;
        double round_rate = best_rate;
        auto score = [&](Allocation trial) {
            trial = balance_powers(std::move(trial), g, P);
            const double r = compute_rates(trial, g).common;
            if (r > round_rate * (1.0 + 1e-12)) {
                round_rate = r;
                round_best = std::move(trial);
            }
        };
        for (std::size_t q = 0; q < Q; ++q)
            for (std::size_t n = 0; n < N; ++n) {
                for (std::size_t k = 0; k < K; ++k) {
                    if (best.user_at(q, n) == static_cast<int>(k))
                        continue;
                    Allocation trial = best;
                    trial.user_at(q, n) = static_cast<int>(k);
                    score(std::move(trial));
                }
                for (std::size_t m = n + 1; m < N; ++m) {
                    if (best.user_at(q, n) == best.user_at(q, m))
                        continue;
                    Allocation trial = best;
                    std::swap(trial.user_at(q, n), trial.user_at(q, m));
                    score(std::move(trial));
                }
            }
        if (!(round_rate > best_rate))
            break;
        best = std::move(round_best);
        best_rate = round_rate;
    }
    return best;
}

inline constexpr std::size_t kSmallGridRbs = 32;

struct P11Result {
    Allocation allocation;
    Rates rates;
    double dual_bound = 0.0;
    std::size_t iterations = 0;
    bool gap_met = false; // false: iteration budget exhausted before the gap target
    std::vector<double> lambda;

    double common_rate() const { return rates.common; }
    double relative_gap() const
    {
        return dual_bound > 0.0 ? (dual_bound - rates.common) / dual_bound : 0.0;
    }
};

/// Max-min OFDMA allocation for fixed CNRs via Lagrange duality.
inline P11Result solve_p11(const CnrGrid& g, double P, const DualParams& params = {})
{
    const std::size_t K = g.K(), Q = g.Q(), N = g.N();
    if (K == 0 || Q == 0 || N == 0)
        throw std::invalid_argument("solve_p11: empty CNR grid");
    if (!(P > 0.0))
        throw std::invalid_argument("solve_p11: power budget must be positive");

    P11Result result;
    result.allocation = Allocation(K, Q, N);
    result.rates = compute_rates(result.allocation, g);
    result.lambda.assign(K, 1.0 / static_cast<double>(K));
    if (std::none_of(g.values().begin(), g.values().end(), [](double v) { return v > 0.0; })) {
        result.gap_met = true;
        return result;
    }

    // Slot-major copy: g_slots[q] is K x N.
    std::vector<std::vector<double>> g_slots(Q, std::vector<double>(K * N));
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < N; ++n)
                g_slots[q][k * N + n] = g.at(k, q, n);

    result.dual_bound = std::numeric_limits<double>::infinity();

    // Candidate RB maps from the dual iterates; the best few are repaired at checkpoints.
    struct Candidate {
        std::vector<int> user;
        std::vector<double> lambda;
        std::size_t served; // users holding an RB with a nonzero CNR
        double rate;
        bool polished = false;

        bool better_than(const Candidate& o) const { return served != o.served ? served > o.served : rate > o.rate; }
    };
    auto served_users = [&](const std::vector<int>& user) {
        std::vector<bool> seen(K, false);
        for (std::size_t q = 0; q < Q; ++q)
            for (std::size_t n = 0; n < N; ++n)
                if (const int k = user[q * N + n]; k >= 0 && g.at(static_cast<std::size_t>(k), q, n) > 0.0)
                    seen[static_cast<std::size_t>(k)] = true;
        return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
    };
    std::vector<Candidate> pool;
    constexpr std::size_t kPoolSize = 3;
    constexpr std::size_t kPolishEvery = 25;

    auto consider = [&](Allocation a) {
        release_idle_rbs(a);
        Rates r = compute_rates(a, g);
        if (r.common > result.rates.common || result.rates.per_user.empty()) {
            result.allocation = std::move(a);
            result.rates = std::move(r);
        }
    };
    // The thorough pass also tries RB swaps and equal user weights.
    const std::vector<double> equal(K, 1.0 / static_cast<double>(K));
    auto polish_pool = [&](bool thorough) {
        for (Candidate& c : pool) {
            if (c.polished && !thorough)
                continue;
            c.polished = true;
            Allocation a(K, Q, N);
            a.user = c.user;
            consider(balance_powers(improve_assignment(a, g, c.lambda, P, 0, thorough), g, P));
            if (thorough)
                consider(balance_powers(improve_assignment(a, g, equal, P, 0, true), g, P));
            if (thorough && Q * N <= kSmallGridRbs)
                consider(improve_assignment_balanced(a, g, P));
        }
    };
    auto gap_met = [&] {
        return !(result.dual_bound > 0.0) ||
               (result.dual_bound - result.rates.common) / result.dual_bound < params.gap_tolerance;
    };

    std::vector<double> lambda = result.lambda;
    std::vector<double> mu(Q, 0.0);
    const double scale = 1.0 / static_cast<double>(N * Q);
    std::size_t t = 1;
    for (; t <= params.max_iterations; ++t) {
        double dual = 0.0;
        std::vector<double> dual_rates(K, 0.0);
        Allocation cand(K, Q, N);
        for (std::size_t q = 0; q < Q; ++q) {
            const SlotSolution s = slot_power_bisection(lambda, g_slots[q], P, N, Q, params.budget_tolerance, mu[q]);
            mu[q] = s.mu;
            dual += s.dual_value;
            for (std::size_t n = 0; n < N; ++n) {
                const std::size_t k = s.winner[n];
                dual_rates[k] += std::log2(1.0 + g.at(k, q, n) * s.power[n]) * scale;
                if (s.power[n] > 0.0) {
                    cand.user_at(q, n) = static_cast<int>(k);
                    continue;
                }
                // Inactive RB: keep it with the user closest to activation.
                double best_t = 0.0;
                for (std::size_t kk = 0; kk < K; ++kk) {
                    const double th = lambda[kk] * g.at(kk, q, n);
                    if (th > best_t) {
                        best_t = th;
                        cand.user_at(q, n) = static_cast<int>(kk);
                    }
                }
            }
        }
        result.dual_bound = std::min(result.dual_bound, dual);

        refill_powers(cand, g, lambda, P);
        const double cand_rate = compute_rates(cand, g).common;
        const bool seen = std::any_of(pool.begin(), pool.end(), [&](const Candidate& c) { return c.user == cand.user; });
        Candidate fresh{cand.user, lambda, served_users(cand.user), cand_rate};
        if (!seen && (pool.size() < kPoolSize || fresh.better_than(pool.back()))) {
            pool.push_back(std::move(fresh));
            std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.better_than(b); });
            if (pool.size() > kPoolSize)
                pool.pop_back();
        }
        consider(std::move(cand));

        if (t % kPolishEvery == 0 || t == 1)
            polish_pool(false);
        if (gap_met()) {
            result.gap_met = true;
            break;
        }

        const double r_min = *std::min_element(dual_rates.begin(), dual_rates.end());
        // Rate differences are taken relative to the mean rate so that the step is scale-free.
        double mean = 0.0;
        for (double v : dual_rates)
            mean += v / static_cast<double>(K);
        const double step = params.step_constant / std::sqrt(static_cast<double>(t)) / (mean > 0.0 ? mean : 1.0);
        std::vector<double> next(K);
        for (std::size_t k = 0; k < K; ++k)
            next[k] = lambda[k] - step * (dual_rates[k] - r_min);
        lambda = project_simplex(next);
    }
    result.iterations = std::min(t, params.max_iterations);
    if (!result.gap_met) {
        polish_pool(true);
        result.gap_met = gap_met();
    }
    result.lambda = lambda;
    return result;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_RESOURCE_ALLOCATION_HPP
