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

// Monte-Carlo experiment driver and result files.

#ifndef IRS_OFDMA_HARNESS_HPP
#define IRS_OFDMA_HARNESS_HPP

#include "irs_ofdma/alternating_optimizer.hpp"
#include "irs_ofdma/scenario.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace irs_ofdma {

/// Unique assigned users per slot, averaged over the slots.
inline double distinct_users_per_slot(const Allocation& alloc)
{
    if (alloc.Q == 0)
        return 0.0;
    double sum = 0.0;
    for (std::size_t q = 0; q < alloc.Q; ++q) {
        std::set<int> seen;
        for (std::size_t n = 0; n < alloc.N; ++n)
            if (alloc.user_at(q, n) >= 0)
                seen.insert(alloc.user_at(q, n));
        sum += static_cast<double>(seen.size());
    }
    return sum / static_cast<double>(alloc.Q);
}

struct RealizationRecord {
    Scheme scheme = Scheme::dynamic;
    std::size_t M = 0;
    std::size_t realization = 0;
    double common_rate = 0.0;
    std::vector<double> per_user_rates;
    double distinct_users = 0.0;
    std::vector<double> trace;
    std::size_t init_index = 0;
    double wall_seconds = 0.0; // kept out of records.json
};

struct SummaryRow {
    Scheme scheme = Scheme::dynamic;
    std::size_t M = 0;
    double mean_rate = 0.0;
    double stderr_rate = 0.0;
    std::size_t n = 0;
};

struct ExperimentSummary {
    ScenarioConfig config;
    std::vector<Scheme> schemes;
    std::vector<std::size_t> m_values;
    std::vector<SummaryRow> rows;           // scheme-major, then M
    std::vector<RealizationRecord> records; // M-major, then realization, then scheme

    const SummaryRow& row(Scheme s, std::size_t M) const
    {
        for (const auto& r : rows)
            if (r.scheme == s && r.M == M)
                return r;
        throw std::out_of_range("no summary row for " + std::string(to_string(s)) + " at M=" + std::to_string(M));
    }
    std::vector<const RealizationRecord*> records_for(Scheme s, std::size_t M) const
    {
        std::vector<const RealizationRecord*> out;
        for (const auto& r : records)
            if (r.scheme == s && r.M == M)
                out.push_back(&r);
        return out;
    }
};

/// All schemes of one realization at one M.
inline std::vector<RealizationRecord> run_realization(const ScenarioConfig& cfg, std::span<const Scheme> schemes,
                                                      std::size_t M, std::size_t index)
{
    ScenarioConfig c = cfg;
    c.M = M;
    const ChannelRealization real = generate_realization(c, index);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<SolveResult> results = run_schemes(schemes, real, c);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<RealizationRecord> out;
    for (const SolveResult& r : results) {
        RealizationRecord rec;
        rec.scheme = r.scheme;
        rec.M = M;
        rec.realization = index;
        rec.common_rate = r.common_rate;
        rec.per_user_rates = r.per_user_rates;
        rec.distinct_users = distinct_users_per_slot(r.allocation);
        rec.trace = r.trace;
        rec.init_index = r.init_index;
        rec.wall_seconds = wall;
        out.push_back(std::move(rec));
    }
    return out;
}

/// Fills rows from records, in the order of summary.schemes and summary.m_values.
inline void aggregate(ExperimentSummary& s)
{
    s.rows.clear();
    for (Scheme sc : s.schemes)
        for (std::size_t M : s.m_values) {
            SummaryRow row;
            row.scheme = sc;
            row.M = M;
            std::vector<double> v;
            for (const auto* r : s.records_for(sc, M))
                v.push_back(r->common_rate);
            row.n = v.size();
            if (!v.empty()) {
                double sum = 0.0;
                for (double x : v)
                    sum += x;
                row.mean_rate = sum / static_cast<double>(v.size());
                if (v.size() > 1) {
                    double ss = 0.0;
                    for (double x : v)
                        ss += (x - row.mean_rate) * (x - row.mean_rate);
                    row.stderr_rate = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
                }
            }
            s.rows.push_back(row);
        }
}

/// Runs every (M, realization) work item on `threads` workers. Results are
/// stored by item index, so the output does not depend on the worker count.
inline ExperimentSummary run_monte_carlo(const ScenarioConfig& cfg, std::span<const Scheme> schemes,
                                         std::span<const std::size_t> m_values, std::size_t threads = 1)
{
    cfg.validate();
    if (schemes.empty() || m_values.empty())
        throw std::invalid_argument("run_monte_carlo: need at least one scheme and one M value");
    for (std::size_t i = 0; i < schemes.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (schemes[i] == schemes[j])
                throw std::invalid_argument("run_monte_carlo: duplicate scheme");
    const std::size_t R = cfg.num_realizations;
    const std::size_t items = m_values.size() * R;
    std::vector<std::vector<RealizationRecord>> slots(items);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < items; i = next++) {
            try {
                slots[i] = run_realization(cfg, schemes, m_values[i / R], i % R);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = items;
            }
        }
    };
    const std::size_t nthreads = std::max<std::size_t>(1, std::min(threads, items));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    ExperimentSummary s;
    s.config = cfg;
    s.schemes.assign(schemes.begin(), schemes.end());
    s.m_values.assign(m_values.begin(), m_values.end());
    for (auto& v : slots)
        for (auto& r : v)
            s.records.push_back(std::move(r));
    aggregate(s);
    return s;
}

namespace detail {

inline std::string fmt9(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline std::string fmt17(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return f;
}

inline void close_out(std::ofstream& f, const std::filesystem::path& path)
{
    f.close();
    if (!f)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

} // namespace detail

/// Mean rate per (scheme, M): columns scheme, M, mean_rate_bpshz, stderr, n.
inline void write_summary_csv(const ExperimentSummary& s, const std::filesystem::path& path)
{
    auto f = detail::open_out(path);
    f << "scheme,M,mean_rate_bpshz,stderr,n\n";
    for (const auto& r : s.rows)
        f << to_string(r.scheme) << ',' << r.M << ',' << detail::fmt9(r.mean_rate) << ','
          << detail::fmt9(r.stderr_rate) << ',' << r.n << '\n';
    detail::close_out(f, path);
}

inline nlohmann::ordered_json records_json(const ExperimentSummary& s)
{
    nlohmann::ordered_json j;
    j["config"] = to_json(s.config);
    j["schemes"] = nlohmann::ordered_json::array();
    for (Scheme sc : s.schemes)
        j["schemes"].push_back(std::string(to_string(sc)));
    j["m_values"] = s.m_values;
    auto& recs = j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : s.records) {
        nlohmann::ordered_json e;
        e["scheme"] = std::string(to_string(r.scheme));
        e["M"] = r.M;
        e["realization"] = r.realization;
        e["common_rate"] = r.common_rate;
        e["per_user_rates"] = r.per_user_rates;
        e["distinct_users_per_slot"] = r.distinct_users;
        e["init_index"] = r.init_index;
        e["trace"] = r.trace;
        recs.push_back(std::move(e));
    }
    return j;
}

/// Config echo plus every per-realization record.
inline void write_records_json(const ExperimentSummary& s, const std::filesystem::path& path)
{
    auto f = detail::open_out(path);
    f << records_json(s).dump(2) << '\n';
    detail::close_out(f, path);
}

/// Wall time per realization (all schemes of one work item together).
inline void write_timing_csv(const ExperimentSummary& s, const std::filesystem::path& path)
{
    auto f = detail::open_out(path);
    f << "M,realization,wall_seconds\n";
    std::set<std::pair<std::size_t, std::size_t>> done;
    for (const auto& r : s.records)
        if (done.insert({r.M, r.realization}).second)
            f << r.M << ',' << r.realization << ',' << detail::fmt9(r.wall_seconds) << '\n';
    detail::close_out(f, path);
}

/// summary.csv, records.json and timing.csv under dir.
inline void emit_summary(const ExperimentSummary& s, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    write_summary_csv(s, dir / "summary.csv");
    write_records_json(s, dir / "records.json");
    write_timing_csv(s, dir / "timing.csv");
}

/// One row per RB: slot, subband, user (-1 unassigned), power in watts.
inline void dump_allocation(const Allocation& alloc, const std::filesystem::path& path)
{
    auto f = detail::open_out(path);
    f << "slot,subband,user,power_w\n";
    for (std::size_t q = 0; q < alloc.Q; ++q)
        for (std::size_t n = 0; n < alloc.N; ++n)
            f << q << ',' << n << ',' << alloc.user_at(q, n) << ',' << detail::fmt17(alloc.power_at(q, n)) << '\n';
    detail::close_out(f, path);
}

inline void dump_allocation(const SolveResult& result, const std::filesystem::path& path)
{
    dump_allocation(result.allocation, path);
}

/// Reads a dump written by dump_allocation. K is the number of users.
inline Allocation read_allocation_csv(const std::filesystem::path& path, std::size_t K)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(f, line) || line != "slot,subband,user,power_w")
        throw std::runtime_error("'" + path.string() + "': bad header");
    struct Row {
        std::size_t q, n;
        int k;
        double p;
    };
    std::vector<Row> rows;
    std::size_t Q = 0, N = 0, lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty())
            continue;
        Row r{};
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream in(line);
        if (!(in >> r.q >> c1 >> r.n >> c2 >> r.k >> c3 >> r.p) || c1 != ',' || c2 != ',' || c3 != ',')
            throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) + ": malformed row");
        if (r.k >= static_cast<int>(K) || r.k < -1)
            throw std::runtime_error("'" + path.string() + "' line " + std::to_string(lineno) + ": user out of range");
        Q = std::max(Q, r.q + 1);
        N = std::max(N, r.n + 1);
        rows.push_back(r);
    }
    if (rows.size() != Q * N)
        throw std::runtime_error("'" + path.string() + "': expected a full slot x subband grid");
    Allocation a(K, Q, N);
    for (const Row& r : rows) {
        a.user_at(r.q, r.n) = r.k;
        a.power_at(r.q, r.n) = r.p;
    }
    return a;
}

} // namespace irs_ofdma

#endif // IRS_OFDMA_HARNESS_HPP
