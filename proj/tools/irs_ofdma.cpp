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

// Command-line driver: Monte-Carlo runs, small-instance oracle checks and allocation dumps.

#include "irs_ofdma/harness.hpp"
#include "irs_ofdma/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace irs_ofdma;

// Thrown for anything wrong with the inputs; maps to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> schemes;
    std::vector<std::size_t> m_values;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config_path, "JSON scenario config (defaults when omitted)");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--schemes", o.schemes, "comma-separated schemes")->delimiter(',');
    cmd->add_option("--m-values", o.m_values, "comma-separated IRS sizes")->delimiter(',');
    cmd->add_option("--seed", o.seed, "overrides the config seed");
    cmd->add_option("--threads", o.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

ScenarioConfig load_config(const CommonOptions& o)
{
    ScenarioConfig cfg;
    try {
        if (!o.config_path.empty()) {
            std::ifstream f(o.config_path);
            if (!f)
                throw std::runtime_error("cannot open '" + o.config_path + "'");
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = config_from_text(ss.str());
        }
        if (o.seed)
            cfg.seed = *o.seed;
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::vector<Scheme> parse_schemes(const CommonOptions& o)
{
    if (o.schemes.empty())
        return {kAllSchemes.begin(), kAllSchemes.end()};
    std::vector<Scheme> out;
    try {
        for (const auto& s : o.schemes)
            out.push_back(parse_scheme(s));
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return out;
}

std::vector<std::size_t> m_values_or_default(const CommonOptions& o, const ScenarioConfig& cfg)
{
    return o.m_values.empty() ? std::vector<std::size_t>{cfg.M} : o.m_values;
}

int cmd_run(const CommonOptions& o)
{
    const ScenarioConfig cfg = load_config(o);
    const auto schemes = parse_schemes(o);
    const auto ms = m_values_or_default(o, cfg);
    const ExperimentSummary s = run_monte_carlo(cfg, schemes, ms, o.threads);
    emit_summary(s, o.out_dir);
    for (const auto& r : s.rows)
        std::printf("%-15s M=%-4zu R=%.6f +- %.6f (n=%zu)\n", std::string(to_string(r.scheme)).c_str(), r.M,
                    r.mean_rate, r.stderr_rate, r.n);
    return 0;
}

int cmd_oracle(const CommonOptions& o, std::size_t realization, std::size_t grid_points)
{
    ScenarioConfig cfg = load_config(o);
    if (!o.m_values.empty())
        cfg.M = o.m_values.front();
    const std::size_t grid = grid_points ? grid_points : default_grid_points(cfg.M, cfg.Q);
    const ChannelRealization real = generate_realization(cfg, realization);
    OracleResult oracle;
    try {
        oracle = brute_force_oracle(real.users, cfg.Q, cfg.P_watt(), cfg.gamma_linear() * cfg.sigma2_watt(), grid);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    nlohmann::ordered_json j;
    j["realization"] = realization;
    j["M"] = cfg.M;
    j["grid_points"] = grid;
    j["oracle_rate"] = oracle.rate;
    j["oracle_assignment"] = oracle.user;
    j["oracle_phases"] = oracle.phases;
    for (Scheme s : parse_schemes(o)) {
        const SolveResult r = run_scheme(s, real, cfg);
        j["solver"][std::string(to_string(s))] = {{"rate", r.common_rate},
                                                   {"ratio", oracle.rate > 0.0 ? r.common_rate / oracle.rate : 0.0}};
    }
    const std::string text = j.dump(2);
    std::cout << text << '\n';
    std::filesystem::create_directories(o.out_dir);
    std::ofstream f(std::filesystem::path(o.out_dir) / "oracle.json");
    f << text << '\n';
    if (!f)
        throw std::runtime_error("cannot write oracle.json under '" + o.out_dir + "'");
    return 0;
}

int cmd_dump(const CommonOptions& o, std::size_t realization)
{
    ScenarioConfig cfg = load_config(o);
    if (o.m_values.size() > 1)
        throw ConfigError("dump-alloc takes a single --m-values entry");
    if (!o.m_values.empty())
        cfg.M = o.m_values.front();
    const auto schemes = parse_schemes(o);
    const ChannelRealization real = generate_realization(cfg, realization);
    const auto results = run_schemes(schemes, real, cfg);
    std::filesystem::create_directories(o.out_dir);
    for (const auto& r : results) {
        const auto path = std::filesystem::path(o.out_dir) /
                          ("alloc_" + std::string(to_string(r.scheme)) + "_" + std::to_string(realization) + ".csv");
        dump_allocation(r, path);
        std::printf("%s R=%.6f distinct_users_per_slot=%.3f -> %s\n", std::string(to_string(r.scheme)).c_str(),
                    r.common_rate, distinct_users_per_slot(r.allocation), path.string().c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint OFDMA resource allocation and IRS passive beamforming simulator"};
    app.require_subcommand(1);
    CommonOptions run_opts, oracle_opts, dump_opts;
    std::size_t oracle_realization = 0, grid_points = 0, dump_realization = 0;

    auto* run = app.add_subcommand("run", "Monte-Carlo common rate versus M");
    add_common(run, run_opts);
    auto* oracle = app.add_subcommand("oracle", "compare the solvers with exhaustive search on a tiny instance");
    add_common(oracle, oracle_opts);
    oracle->add_option("--realization", oracle_realization, "realization index")->capture_default_str();
    oracle->add_option("--grid-points", grid_points, "phase grid size (0: automatic)")->capture_default_str();
    auto* dump = app.add_subcommand("dump-alloc", "write the RB allocation of one realization per scheme");
    add_common(dump, dump_opts);
    dump->add_option("--realization", dump_realization, "realization index")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*run)
            return cmd_run(run_opts);
        if (*oracle)
            return cmd_oracle(oracle_opts, oracle_realization, grid_points);
        return cmd_dump(dump_opts, dump_realization);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
