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

// Time-domain channel construction, channel frequency responses, CNRs and
// per-user OFDMA rates for an IRS-aided multiuser downlink.
//
// Conventions: time-domain vectors are zero-padded to N (the number of
// sub-bands); the DFT is unnormalized, X[n] = sum_l x[l] exp(-j 2 pi n l / N).

#ifndef IRS_OFDMA_CHANNEL_MODEL_HPP
#define IRS_OFDMA_CHANNEL_MODEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irs_ofdma {

using cplx = std::complex<double>;

/// Complex multipath taps of one link (baseband, dimensionless).
class TapVector {
public:
    TapVector() = default;
    explicit TapVector(std::vector<cplx> taps) : taps_(std::move(taps))
    {
        if (taps_.empty())
            throw std::invalid_argument("TapVector: at least one tap is required");
        for (const auto& t : taps_)
            if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
                throw std::invalid_argument("TapVector: non-finite tap");
    }

    std::size_t size() const { return taps_.size(); }
    const cplx& operator[](std::size_t i) const { return taps_[i]; }
    std::span<const cplx> taps() const { return taps_; }

private:
    std::vector<cplx> taps_;
};

/// Linear convolution, length len(x) + len(y) - 1.
inline TapVector convolve(const TapVector& x, const TapVector& y)
{
    if (x.size() == 0 || y.size() == 0)
        throw std::invalid_argument("convolve: empty input");
    std::vector<cplx> out(x.size() + y.size() - 1, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            out[i + j] += x[i] * y[j];
    return TapVector(std::move(out));
}

/// Zero-padded BS-user direct channel h_d (length N).
class DirectChannel {
public:
    DirectChannel() = default;
    DirectChannel(const TapVector& taps, std::size_t N) : h_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N))), taps_(taps.size())
    {
        if (taps.size() > N)
            throw std::invalid_argument("DirectChannel: " + std::to_string(taps.size()) +
                                        " taps exceed the cyclic prefix span N=" + std::to_string(N));
        for (std::size_t l = 0; l < taps.size(); ++l)
            h_(static_cast<Eigen::Index>(l)) = taps[l];
    }

    /// Wraps an already zero-padded vector (e.g. all zeros).
    static DirectChannel from_padded(Eigen::VectorXcd h)
    {
        DirectChannel d;
        d.taps_ = 0;
        for (Eigen::Index l = 0; l < h.size(); ++l)
            if (h(l) != cplx{0.0, 0.0})
                d.taps_ = static_cast<std::size_t>(l) + 1;
        d.h_ = std::move(h);
        return d;
    }

    const Eigen::VectorXcd& vector() const { return h_; }
    std::size_t N() const { return static_cast<std::size_t>(h_.size()); }
    std::size_t num_taps() const { return taps_; }

private:
    Eigen::VectorXcd h_;
    std::size_t taps_ = 0;
};

/// Zero-padded convolution r * t as a length-N column.
inline Eigen::VectorXcd cascade_column(const TapVector& r, const TapVector& t, std::size_t N)
{
    const std::size_t len = r.size() + t.size() - 1;
    if (len > N)
        throw std::invalid_argument("cascade_column: cascaded length " + std::to_string(len) +
                                    " exceeds N=" + std::to_string(N));
    const TapVector c = convolve(r, t);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < len; ++i)
        out(static_cast<Eigen::Index>(i)) = c[i];
    return out;
}

/// V_k: N x M, column m is the zero-padded cascade of IRS-user and BS-IRS taps of element m.
class CascadedChannelMatrix {
public:
    CascadedChannelMatrix() = default;
    explicit CascadedChannelMatrix(Eigen::MatrixXcd V) : V_(std::move(V)) {}

    const Eigen::MatrixXcd& matrix() const { return V_; }
    std::size_t N() const { return static_cast<std::size_t>(V_.rows()); }
    std::size_t M() const { return static_cast<std::size_t>(V_.cols()); }

private:
    Eigen::MatrixXcd V_;
};

inline CascadedChannelMatrix build_cascaded_matrix(std::span<const TapVector> r_set,
                                                   std::span<const TapVector> t_set, std::size_t N)
{
    if (r_set.size() != t_set.size())
        throw std::invalid_argument("build_cascaded_matrix: " + std::to_string(r_set.size()) +
                                    " IRS-user links vs " + std::to_string(t_set.size()) + " BS-IRS links");
    Eigen::MatrixXcd V(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(r_set.size()));
    for (std::size_t m = 0; m < r_set.size(); ++m)
        V.col(static_cast<Eigen::Index>(m)) = cascade_column(r_set[m], t_set[m], N);
    return CascadedChannelMatrix(std::move(V));
}

/// Direct and cascaded channel of one user within a coherence block.
struct UserChannel {
    DirectChannel direct;
    CascadedChannelMatrix cascaded;
};

using ReflectionVector = Eigen::VectorXcd;

inline constexpr double kUnitDiskSlack = 1e-12;

inline bool within_unit_disk(const ReflectionVector& phi)
{
    for (Eigen::Index m = 0; m < phi.size(); ++m)
        if (std::abs(phi(m)) > 1.0 + kUnitDiskSlack)
            return false;
    return true;
}

/// One reflection vector per time slot.
class ReflectionSchedule {
public:
    ReflectionSchedule() = default;
    explicit ReflectionSchedule(std::vector<ReflectionVector> phis) : phis_(std::move(phis))
    {
        for (std::size_t q = 0; q < phis_.size(); ++q) {
            if (phis_[q].size() != phis_.front().size())
                throw std::invalid_argument("ReflectionSchedule: slots have different element counts");
            if (!within_unit_disk(phis_[q]))
                throw std::invalid_argument("ReflectionSchedule: slot " + std::to_string(q) +
                                            " has a coefficient outside the unit disk");
        }
    }

    /// Same vector replicated over Q slots.
    static ReflectionSchedule tied(const ReflectionVector& phi, std::size_t Q)
    {
        return ReflectionSchedule(std::vector<ReflectionVector>(Q, phi));
    }

    /// All-zero reflection (no IRS contribution).
    static ReflectionSchedule zeros(std::size_t M, std::size_t Q)
    {
        return tied(ReflectionVector::Zero(static_cast<Eigen::Index>(M)), Q);
    }

    std::size_t Q() const { return phis_.size(); }
    std::size_t M() const { return phis_.empty() ? 0 : static_cast<std::size_t>(phis_.front().size()); }
    const ReflectionVector& operator[](std::size_t q) const { return phis_[q]; }
    const std::vector<ReflectionVector>& slots() const { return phis_; }

    bool is_tied() const
    {
        for (const auto& p : phis_)
            if (p != phis_.front())
                return false;
        return true;
    }

private:
    std::vector<ReflectionVector> phis_;
};

/// h = h_d + V phi.
inline Eigen::VectorXcd effective_cir(const DirectChannel& h_d, const CascadedChannelMatrix& V,
                                      const ReflectionVector& phi)
{
    if (V.N() != h_d.N() || V.M() != static_cast<std::size_t>(phi.size()))
        throw std::invalid_argument("effective_cir: dimension mismatch (N=" + std::to_string(h_d.N()) +
                                    ", V is " + std::to_string(V.N()) + "x" + std::to_string(V.M()) +
                                    ", phi has " + std::to_string(phi.size()) + ")");
    if (V.M() == 0)
        return h_d.vector();
    return h_d.vector() + V.matrix() * phi;
}

/// exp(-j 2 pi k / N) with k reduced modulo N.
inline cplx dft_twiddle(std::size_t k, std::size_t N)
{
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k % N) / static_cast<double>(N);
    return {std::cos(angle), std::sin(angle)};
}

/// Unnormalized DFT of a length-N CIR.
inline Eigen::VectorXcd cfr(const Eigen::VectorXcd& h)
{
    const auto N = static_cast<std::size_t>(h.size());
    if (N == 0)
        throw std::invalid_argument("cfr: empty impulse response");
    Eigen::VectorXcd out(h.size());
    for (std::size_t n = 0; n < N; ++n) {
        cplx acc{0.0, 0.0};
        for (std::size_t l = 0; l < N; ++l)
            acc += h(static_cast<Eigen::Index>(l)) * dft_twiddle(n * l, N);
        out(static_cast<Eigen::Index>(n)) = acc;
    }
    return out;
}

/// Channel-to-noise ratios g[k][q][n] (1/W), row-major in (k, q, n).
class CnrGrid {
public:
    CnrGrid() = default;
    CnrGrid(std::size_t K, std::size_t Q, std::size_t N) : K_(K), Q_(Q), N_(N), g_(K * Q * N, 0.0) {}
    CnrGrid(std::size_t K, std::size_t Q, std::size_t N, std::vector<double> values)
        : K_(K), Q_(Q), N_(N), g_(std::move(values))
    {
        if (g_.size() != K * Q * N)
            throw std::invalid_argument("CnrGrid: expected " + std::to_string(K * Q * N) + " values, got " +
                                        std::to_string(g_.size()));
        for (double v : g_)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("CnrGrid: entries must be finite and nonnegative");
    }

    std::size_t K() const { return K_; }
    std::size_t Q() const { return Q_; }
    std::size_t N() const { return N_; }

    double& at(std::size_t k, std::size_t q, std::size_t n) { return g_[(k * Q_ + q) * N_ + n]; }
    double at(std::size_t k, std::size_t q, std::size_t n) const { return g_[(k * Q_ + q) * N_ + n]; }

    /// Q x N slice of user k.
    std::span<const double> user(std::size_t k) const { return std::span<const double>(g_).subspan(k * Q_ * N_, Q_ * N_); }
    std::span<const double> values() const { return g_; }

private:
    std::size_t K_ = 0, Q_ = 0, N_ = 0;
    std::vector<double> g_;
};

/// g[k][q][n] = |CFR of (h_d^k + V_k phi_q) at n|^2 / (gamma sigma2).
inline CnrGrid cnr_grid(std::span<const UserChannel> users, const ReflectionSchedule& schedule, double gamma,
                        double sigma2)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("cnr_grid: noise power must be positive");
    if (!(gamma >= 1.0))
        throw std::invalid_argument("cnr_grid: SNR gap must be >= 1");
    if (users.empty())
        throw std::invalid_argument("cnr_grid: no users");
    const std::size_t N = users.front().direct.N();
    CnrGrid g(users.size(), schedule.Q(), N);
    for (std::size_t k = 0; k < users.size(); ++k) {
        if (users[k].direct.N() != N)
            throw std::invalid_argument("cnr_grid: users disagree on N");
        for (std::size_t q = 0; q < schedule.Q(); ++q) {
            const Eigen::VectorXcd c = cfr(effective_cir(users[k].direct, users[k].cascaded, schedule[q]));
            for (std::size_t n = 0; n < N; ++n)
                g.at(k, q, n) = std::norm(c(static_cast<Eigen::Index>(n))) / (gamma * sigma2);
        }
    }
    return g;
}

/// R_k = 1/(NQ) sum_{q,n} alpha[q][n] log2(1 + g[q][n] p[q][n]); all slices Q x N row-major.
inline double user_rate(std::span<const std::uint8_t> alpha_k, std::span<const double> p, std::span<const double> g_k,
                        std::size_t N, std::size_t Q)
{
    const std::size_t n_rb = N * Q;
    if (alpha_k.size() != n_rb || p.size() != n_rb || g_k.size() != n_rb)
        throw std::invalid_argument("user_rate: slices must hold N*Q entries");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_rb; ++i)
        if (alpha_k[i])
            acc += std::log2(1.0 + g_k[i] * p[i]);
    return acc / static_cast<double>(n_rb);
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_CHANNEL_MODEL_HPP
