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

// Reflection-coefficient design for a fixed OFDMA allocation.
//
// The CFR of every RB is affine in the slot's reflection vector,
// c = c0 + c_row phi. Squared magnitudes are minorized by their first-order
// expansion around the current point, which turns the max-min rate problem
// into a concave maximization over a product of unit disks (the SCA
// subproblem). Each SCA step solves that subproblem and is kept only if the
// true common rate does not drop.

#ifndef IRS_OFDMA_PASSIVE_BEAMFORMING_HPP
#define IRS_OFDMA_PASSIVE_BEAMFORMING_HPP

#include "irs_ofdma/channel_model.hpp"
#include "irs_ofdma/resource_allocation.hpp"
#include "irs_ofdma/solver_params.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irs_ofdma {

/// Radial projection of every coefficient onto the closed unit disk.
inline ReflectionVector project_unit_disk(ReflectionVector phi)
{
    for (Eigen::Index m = 0; m < phi.size(); ++m) {
        const double r = std::abs(phi(m));
        if (r > 1.0)
            phi(m) /= r;
    }
    return phi;
}

struct AffineCfr {
    cplx c0;
    Eigen::RowVectorXcd c_row;
};

/// CFR of sub-band n as an affine function of phi: c0 = f_n^H h_d, c_row = f_n^H V.
inline AffineCfr affine_cfr_coeffs(const DirectChannel& h_d, const CascadedChannelMatrix& V, std::size_t n)
{
    const std::size_t N = h_d.N();
    if (n >= N)
        throw std::invalid_argument("affine_cfr_coeffs: sub-band " + std::to_string(n) + " out of range (N=" +
                                    std::to_string(N) + ")");
    if (V.N() != N)
        throw std::invalid_argument("affine_cfr_coeffs: direct and cascaded channels disagree on N");
    Eigen::RowVectorXcd f(static_cast<Eigen::Index>(N));
    for (std::size_t l = 0; l < N; ++l)
        f(static_cast<Eigen::Index>(l)) = dft_twiddle(n * l, N);
    AffineCfr out;
    out.c0 = f * h_d.vector();
    out.c_row = V.M() == 0 ? Eigen::RowVectorXcd(0) : Eigen::RowVectorXcd(f * V.matrix());
    return out;
}

/// Affine CFR coefficients of all users and sub-bands, pre-scaled by 1/sqrt(gamma sigma2)
/// so that |c0 + c_row phi|^2 is the CNR directly.
class FrequencyChannels {
public:
    FrequencyChannels(std::span<const UserChannel> users, double gamma, double sigma2)
    {
        if (!(sigma2 > 0.0) || !(gamma >= 1.0))
            throw std::invalid_argument("FrequencyChannels: need sigma2 > 0 and gamma >= 1");
        if (users.empty())
            throw std::invalid_argument("FrequencyChannels: no users");
        N_ = users.front().direct.N();
        M_ = users.front().cascaded.M();
        const double s = 1.0 / std::sqrt(gamma * sigma2);
        for (const auto& u : users) {
            if (u.direct.N() != N_ || u.cascaded.M() != M_)
                throw std::invalid_argument("FrequencyChannels: users disagree on N or M");
            Eigen::VectorXcd c0(static_cast<Eigen::Index>(N_));
            Eigen::MatrixXcd C(static_cast<Eigen::Index>(N_), static_cast<Eigen::Index>(M_));
            for (std::size_t n = 0; n < N_; ++n) {
                const AffineCfr a = affine_cfr_coeffs(u.direct, u.cascaded, n);
                c0(static_cast<Eigen::Index>(n)) = a.c0 * s;
                if (M_ > 0)
                    C.row(static_cast<Eigen::Index>(n)) = a.c_row * s;
            }
            c0_.push_back(std::move(c0));
            C_.push_back(std::move(C));
        }
    }

    std::size_t K() const { return c0_.size(); }
    std::size_t N() const { return N_; }
    std::size_t M() const { return M_; }
    const Eigen::VectorXcd& c0(std::size_t k) const { return c0_[k]; }
    const Eigen::MatrixXcd& C(std::size_t k) const { return C_[k]; }

    /// Normalized CFR of user k over all sub-bands for one reflection vector.
    Eigen::VectorXcd response(std::size_t k, const ReflectionVector& phi) const
    {
        if (M_ == 0)
            return c0_[k];
        return c0_[k] + C_[k] * phi;
    }

    CnrGrid cnr(const ReflectionSchedule& schedule) const
    {
        CnrGrid g(K(), schedule.Q(), N_);
        for (std::size_t k = 0; k < K(); ++k)
            for (std::size_t q = 0; q < schedule.Q(); ++q) {
                const Eigen::VectorXcd c = response(k, schedule[q]);
                for (std::size_t n = 0; n < N_; ++n)
                    g.at(k, q, n) = std::norm(c(static_cast<Eigen::Index>(n)));
            }
        return g;
    }

private:
    std::size_t N_ = 0, M_ = 0;
    std::vector<Eigen::VectorXcd> c0_;
    std::vector<Eigen::MatrixXcd> C_;
};

/// First-order minorant of a^2 + b^2 around (a_t, b_t).
inline double linearized_gain(double a, double b, double a_tilde, double b_tilde)
{
    return a_tilde * (2.0 * a - a_tilde) + b_tilde * (2.0 * b - b_tilde);
}

/// One assigned RB of the SCA subproblem.
struct RbTerm {
    std::size_t q = 0, n = 0, k = 0;
    cplx c0;                  // normalized direct CFR of the assigned user
    Eigen::RowVectorXcd c_row; // normalized cascaded CFR row of the assigned user
    double power = 0.0;       // p_{q,n}; with normalized coefficients SNR = |c|^2 p
    cplx expansion;           // a_tilde + j b_tilde

    cplx composite(const ReflectionVector& phi) const
    {
        return c_row.size() == 0 ? c0 : c0 + (c_row * phi)(0);
    }
    /// Surrogate gain y at phi.
    double surrogate_gain(const ReflectionVector& phi) const
    {
        const cplx c = composite(phi);
        return linearized_gain(c.real(), c.imag(), expansion.real(), expansion.imag());
    }
};

struct SubproblemState {
    std::size_t K = 0, Q = 0, N = 0, M = 0;
    std::vector<RbTerm> terms;
};

/// Linearizes every assigned RB with positive power around the given schedule.
inline SubproblemState build_subproblem(const Allocation& alloc, const FrequencyChannels& fc,
                                        const ReflectionSchedule& expansion)
{
    if (alloc.K != fc.K() || alloc.N != fc.N() || alloc.Q != expansion.Q() || expansion.M() != fc.M())
        throw std::invalid_argument("build_subproblem: allocation, channels and schedule disagree on dimensions");
    SubproblemState st{alloc.K, alloc.Q, alloc.N, fc.M(), {}};
    for (std::size_t q = 0; q < alloc.Q; ++q)
        for (std::size_t n = 0; n < alloc.N; ++n) {
            const int k = alloc.user_at(q, n);
            if (k < 0 || !(alloc.power_at(q, n) > 0.0))
                continue;
            const auto ku = static_cast<std::size_t>(k);
            RbTerm t;
            t.q = q;
            t.n = n;
            t.k = ku;
            t.c0 = fc.c0(ku)(static_cast<Eigen::Index>(n));
            t.c_row = fc.M() > 0 ? Eigen::RowVectorXcd(fc.C(ku).row(static_cast<Eigen::Index>(n))) : Eigen::RowVectorXcd(0);
            t.power = alloc.power_at(q, n);
            t.expansion = t.composite(expansion[q]);
            st.terms.push_back(std::move(t));
        }
    return st;
}

namespace detail {

// Variables: one M-vector per slot, or a single shared one in tied mode.
using Point = std::vector<ReflectionVector>;

inline double real_dot(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i].conjugate().cwiseProduct(b[i])).real().sum();
    return s;
}

inline double distance(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]).squaredNorm();
    return std::sqrt(s);
}

inline Point step_and_project(const Point& x, const Point& dir, double eta)
{
    Point out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = project_unit_disk(x[i] + eta * dir[i]);
    return out;
}

// Surrogate rates u_k(phi) = 1/(NQ) sum_{j in k} log2(1 + p_j f_j(phi)) with
// f_j = beta_j + 2 Re(w_j phi_q), w_j = conj(c_tilde_j) c_row_j.
class Surrogate {
public:
    Surrogate(const SubproblemState& st, bool tied, double domain_floor)
        : K_(st.K), tied_(tied), floor_(domain_floor), scale_(1.0 / (static_cast<double>(st.N * st.Q) * std::numbers::ln2))
    {
        slots_.resize(st.Q);
        std::vector<std::vector<const RbTerm*>> by_slot(st.Q);
        for (const auto& t : st.terms)
            by_slot[t.q].push_back(&t);
        active_users_.assign(K_, false);
        for (std::size_t q = 0; q < st.Q; ++q) {
            auto& s = slots_[q];
            const auto cnt = static_cast<Eigen::Index>(by_slot[q].size());
            s.W.resize(cnt, static_cast<Eigen::Index>(st.M));
            s.beta.resize(cnt);
            s.power.resize(cnt);
            for (Eigen::Index j = 0; j < cnt; ++j) {
                const RbTerm& t = *by_slot[q][static_cast<std::size_t>(j)];
                const cplx ct = std::conj(t.expansion);
                if (st.M > 0)
                    s.W.row(j) = ct * t.c_row;
                s.beta(j) = 2.0 * (ct * t.c0).real() - std::norm(t.expansion);
                s.power(j) = t.power;
                s.user.push_back(t.k);
                active_users_[t.k] = true;
            }
        }
    }

    bool tied() const { return tied_; }
    std::size_t Q() const { return slots_.size(); }
    bool all_users_active() const
    {
        return std::all_of(active_users_.begin(), active_users_.end(), [](bool b) { return b; });
    }

    const ReflectionVector& slot_vector(const Point& x, std::size_t q) const { return tied_ ? x.front() : x[q]; }

    struct Eval {
        std::vector<double> rates;                 // per user
        std::vector<Eigen::VectorXd> inv_arg;      // per slot: p_j / (1 + p_j f_j)
        double min_rate = 0.0;
    };

    /// False when some log argument drops below the domain floor.
    bool evaluate(const Point& x, Eval& e) const
    {
        e.rates.assign(K_, 0.0);
        e.inv_arg.resize(slots_.size());
        for (std::size_t q = 0; q < slots_.size(); ++q) {
            const auto& s = slots_[q];
            if (s.beta.size() == 0) {
                e.inv_arg[q].resize(0);
                continue;
            }
            Eigen::VectorXd f = s.beta;
            if (s.W.cols() > 0)
                f += 2.0 * (s.W * slot_vector(x, q)).real();
            const Eigen::VectorXd arg = Eigen::VectorXd::Ones(f.size()) + s.power.cwiseProduct(f);
            if (arg.minCoeff() < floor_ || !arg.allFinite())
                return false;
            e.inv_arg[q] = s.power.cwiseQuotient(arg);
            for (Eigen::Index j = 0; j < arg.size(); ++j)
                e.rates[s.user[static_cast<std::size_t>(j)]] += std::log(arg(j)) * scale_;
        }
        e.min_rate = *std::min_element(e.rates.begin(), e.rates.end());
        return true;
    }

    /// Gradient of sum_k weight_k u_k at the evaluated point.
    Point gradient(const Eval& e, std::span<const double> weight, const Point& like) const
    {
        Point g(like.size());
        for (auto& v : g)
            v = ReflectionVector::Zero(like.front().size());
        for (std::size_t q = 0; q < slots_.size(); ++q) {
            const auto& s = slots_[q];
            if (s.beta.size() == 0 || s.W.cols() == 0)
                continue;
            Eigen::VectorXd coef(s.beta.size());
            for (Eigen::Index j = 0; j < coef.size(); ++j)
                coef(j) = weight[s.user[static_cast<std::size_t>(j)]] * e.inv_arg[q](j) * scale_ * 2.0;
            g[tied_ ? 0 : q] += s.W.adjoint() * coef.cast<cplx>();
        }
        return g;
    }

private:
    struct Slot {
        Eigen::MatrixXcd W;
        Eigen::VectorXd beta, power;
        std::vector<std::size_t> user;
    };
    std::size_t K_;
    bool tied_;
    double floor_, scale_;
    std::vector<Slot> slots_;
    std::vector<bool> active_users_;
};

inline std::vector<double> softmin_weights(std::span<const double> rates, double tau)
{
    const double lo = *std::min_element(rates.begin(), rates.end());
    std::vector<double> w(rates.size());
    double z = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        w[k] = std::exp(-(rates[k] - lo) / tau);
        z += w[k];
    }
    for (double& v : w)
        v /= z;
    return w;
}

inline double softmin_value(std::span<const double> rates, double tau)
{
    const double lo = *std::min_element(rates.begin(), rates.end());
    double z = 0.0;
    for (double r : rates)
        z += std::exp(-(r - lo) / tau);
    return lo - tau * std::log(z);
}

struct InnerOutcome {
    Point x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool stalled = false;
};

// Projected gradient ascent on a soft-min of the surrogate rates with a
// decreasing temperature; Armijo backtracking also enforces the log domain.
inline InnerOutcome maximize_smoothed(const Surrogate& sur, Point x, const ScaParams& prm)
{
    Surrogate::Eval e;
    sur.evaluate(x, e);
    InnerOutcome best{x, e.min_rate, 0, false};
    const double ref = std::max(*std::max_element(e.rates.begin(), e.rates.end()), 1e-6);
    double eta = -1.0;
    std::size_t used = 0;
    for (const double rel_tau : {1e-2, 1e-3, 1e-4}) {
        const double tau = rel_tau * ref;
        std::size_t flat = 0; // consecutive steps with negligible smoothed gain
        while (used < prm.inner_max_iterations) {
            ++used;
            const auto w = softmin_weights(e.rates, tau);
            const Point g = sur.gradient(e, w, x);
            const double gnorm = std::sqrt(real_dot(g, g));
            if (!(gnorm > 0.0))
                break;
            if (eta < 0.0)
                eta = 0.1 / gnorm;
            const double f0 = softmin_value(e.rates, tau);
            bool accepted = false;
            Point xn;
            Surrogate::Eval en;
            for (std::size_t bt = 0; bt <= prm.max_backtracks; ++bt) {
                xn = step_and_project(x, g, eta);
                if (sur.evaluate(xn, en)) {
                    const double gain = real_dot(g, xn) - real_dot(g, x);
                    if (softmin_value(en.rates, tau) >= f0 + 1e-4 * gain)
                        accepted = true;
                }
                if (accepted)
                    break;
                eta *= 0.5;
            }
            if (!accepted) {
                best.stalled = true;
                break;
            }
            const double moved = distance(xn, x);
            const double f1 = softmin_value(en.rates, tau);
            x = std::move(xn);
            e = std::move(en);
            if (e.min_rate > best.value) {
                best.value = e.min_rate;
                best.x = x;
            }
            eta *= 2.0;
            if (moved < prm.inner_step_tolerance)
                break;
            flat = f1 - f0 < 1e-3 * tau ? flat + 1 : 0;
            if (flat >= 5)
                break;
        }
    }
    best.iterations = used;
    return best;
}

// Projected supergradient ascent on the min itself. The Polyak step aims at
// the best value seen plus a margin that shrinks whenever progress stalls.
inline InnerOutcome maximize_supergradient(const Surrogate& sur, Point x, const ScaParams& prm)
{
    Surrogate::Eval e;
    sur.evaluate(x, e);
    InnerOutcome best{x, e.min_rate, 0, false};
    double margin = 0.05 * std::max(e.min_rate, 1e-6);
    std::size_t since_improvement = 0;
    std::vector<double> w(e.rates.size());
    std::size_t t = 1;
    for (; t <= prm.inner_max_iterations; ++t) {
        const auto argmin = static_cast<std::size_t>(std::min_element(e.rates.begin(), e.rates.end()) - e.rates.begin());
        std::fill(w.begin(), w.end(), 0.0);
        w[argmin] = 1.0;
        const Point g = sur.gradient(e, w, x);
        const double g2 = real_dot(g, g);
        if (!(g2 > 0.0))
            break;
        double eta = (best.value + margin - e.min_rate) / g2;
        if (!(eta > 0.0) || !std::isfinite(eta))
            eta = 0.2 / std::sqrt(static_cast<double>(t)) / std::sqrt(g2);
        bool ok = false;
        Point xn;
        Surrogate::Eval en;
        for (std::size_t bt = 0; bt <= prm.max_backtracks; ++bt) {
            xn = step_and_project(x, g, eta);
            if (sur.evaluate(xn, en)) {
                ok = true;
                break;
            }
            eta *= 0.5;
        }
        if (!ok) {
            best.stalled = true;
            break;
        }
        const double moved = distance(xn, x);
        x = std::move(xn);
        e = std::move(en);
        if (e.min_rate > best.value) {
            best.value = e.min_rate;
            best.x = x;
            since_improvement = 0;
        }
        else if (++since_improvement >= 10) {
            margin *= 0.5;
            since_improvement = 0;
        }
        if (moved < prm.inner_step_tolerance)
            break;
    }
    best.iterations = std::min(t, prm.inner_max_iterations);
    return best;
}

} // namespace detail

struct P13Result {
    ReflectionSchedule schedule;
    double surrogate_rate = 0.0;
    std::size_t iterations = 0;
    bool stalled = false;
};

/// Maximizes the linearized common rate over the unit disks, starting at the
/// expansion point. The result is never worse than the expansion point.
inline P13Result solve_p13(const SubproblemState& state, const ReflectionSchedule& expansion, bool tied,
                           const ScaParams& params = {})
{
    if (expansion.Q() != state.Q || expansion.M() != state.M)
        throw std::invalid_argument("solve_p13: expansion schedule does not match the subproblem");
    if (tied && !expansion.is_tied())
        throw std::invalid_argument("solve_p13: tied mode needs a tied expansion point");
    const detail::Surrogate sur(state, tied, params.domain_floor);
    detail::Point x0 = tied ? detail::Point{expansion[0]} : detail::Point(expansion.slots());
    detail::Surrogate::Eval e;
    if (!sur.evaluate(x0, e))
        return {expansion, 0.0, 0, true};
    if (!sur.all_users_active() || state.M == 0)
        return {expansion, e.min_rate, 0, false}; // nothing phi can change in the min

    const detail::InnerOutcome out = params.method == InnerMethod::smoothed
                                         ? detail::maximize_smoothed(sur, x0, params)
                                         : detail::maximize_supergradient(sur, x0, params);
    P13Result r;
    r.schedule = tied ? ReflectionSchedule::tied(out.x.front(), state.Q) : ReflectionSchedule(out.x);
    r.surrogate_rate = out.value;
    r.iterations = out.iterations;
    r.stalled = out.stalled && out.value <= e.min_rate;
    return r;
}

struct ScaResult {
    ReflectionSchedule schedule;
    double rate = 0.0;          // true common rate under the fixed allocation
    std::vector<double> trace;  // true common rate after every accepted step, starting with the initial point
    std::size_t iterations = 0;
};

/// SCA for the reflection schedule with the allocation held fixed.
inline ScaResult sca_solve_p12(const Allocation& alloc, const FrequencyChannels& fc, const ReflectionSchedule& init,
                               bool tied, const ScaParams& params = {})
{
    if (!std::all_of(init.slots().begin(), init.slots().end(), [](const ReflectionVector& v) { return within_unit_disk(v); }))
        throw std::invalid_argument("sca_solve_p12: initial schedule is outside the unit disk");
    if (tied && !init.is_tied())
        throw std::invalid_argument("sca_solve_p12: tied mode needs a tied initial schedule");
    ScaResult res;
    res.schedule = init;
    res.rate = compute_rates(alloc, fc.cnr(init)).common;
    res.trace.push_back(res.rate);
    for (std::size_t it = 0; it < params.max_sca_iterations; ++it) {
        const SubproblemState st = build_subproblem(alloc, fc, res.schedule);
        if (st.terms.empty())
            break;
        const P13Result sub = solve_p13(st, res.schedule, tied, params);
        if (sub.stalled)
            break;
        const double r = compute_rates(alloc, fc.cnr(sub.schedule)).common;
        if (r < res.rate)
            break;
        const double gain = r - res.rate;
        res.schedule = sub.schedule;
        res.rate = r;
        res.trace.push_back(r);
        ++res.iterations;
        if (gain < params.sca_tolerance)
            break;
    }
    return res;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_PASSIVE_BEAMFORMING_HPP
