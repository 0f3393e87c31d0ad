// SPDX-License-Identifier: Apache-2.0
//
// hpl - hybrid precoding library for multiuser MIMO downlink simulation
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

#ifndef HPL_CONFIG_HPP
#define HPL_CONFIG_HPP

#include "hpl/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hpl {

enum class Strategy {
    fully_digital_wmmse,
    proposed_fc,
    proposed_fixed,
    proposed_dynamic,
    proposed_cov_fc,
    proposed_cov_fixed,
    proposed_cov_dynamic,
    argh_rf_baseline,
    zf_fully_digital,
};

inline constexpr std::array<std::pair<Strategy, std::string_view>, 9> kStrategyNames{{
    {Strategy::fully_digital_wmmse, "fully-digital-wmmse"},
    {Strategy::proposed_fc, "proposed-fc"},
    {Strategy::proposed_fixed, "proposed-fixed"},
    {Strategy::proposed_dynamic, "proposed-dynamic"},
    {Strategy::proposed_cov_fc, "proposed-cov-fc"},
    {Strategy::proposed_cov_fixed, "proposed-cov-fixed"},
    {Strategy::proposed_cov_dynamic, "proposed-cov-dynamic"},
    {Strategy::argh_rf_baseline, "argH-rf-baseline"},
    {Strategy::zf_fully_digital, "zf-fully-digital"},
}};

inline std::string_view to_string(Strategy s) {
    for (const auto& [id, name] : kStrategyNames)
        if (id == s)
            return name;
    return "unknown";
}

inline Strategy parse_strategy(std::string_view name) {
    for (const auto& [id, n] : kStrategyNames)
        if (n == name)
            return id;
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

inline bool uses_covariance(Strategy s) {
    return s == Strategy::proposed_cov_fc || s == Strategy::proposed_cov_fixed ||
           s == Strategy::proposed_cov_dynamic;
}

inline bool uses_subarray(Strategy s) {
    return s == Strategy::proposed_fixed || s == Strategy::proposed_dynamic ||
           s == Strategy::proposed_cov_fixed || s == Strategy::proposed_cov_dynamic;
}

inline bool is_fully_digital(Strategy s) {
    return s == Strategy::fully_digital_wmmse || s == Strategy::zf_fully_digital;
}

struct SystemConfig {
    Index num_antennas = 32;
    Index num_users = 4;
    Index num_rf_chains = 4;
    Index num_paths = 4;
    double spacing_ratio = 0.5;
    std::vector<double> snr_grid_db{-10, -5, 0, 5, 10, 15, 20};
    Index num_trials = 500;
    std::uint64_t root_seed = 1;
    int t_max = 30;
    double epsilon = 0.01;
    std::vector<Strategy> strategies;
    std::optional<Index> covariance_samples;

    bool needs_covariance() const {
        return std::any_of(strategies.begin(), strategies.end(), uses_covariance);
    }

    /// Throws ConfigError naming the first violated constraint.
    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
        if (num_antennas < 1)
            fail("num_antennas must be >= 1");
        if (num_users < 1)
            fail("num_users must be >= 1");
        if (num_paths < 1)
            fail("num_paths must be >= 1");
        if (num_rf_chains < 1 || num_rf_chains > num_antennas)
            fail("num_rf_chains must satisfy 1 <= N_RF <= N");
        if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
            fail("spacing_ratio must be positive");
        if (snr_grid_db.empty())
            fail("snr_db must list at least one value");
        for (double s : snr_grid_db)
            if (!std::isfinite(s))
                fail("snr_db values must be finite");
        if (num_trials < 1)
            fail("num_trials must be >= 1");
        if (t_max < 1)
            fail("t_max must be >= 1");
        if (!(epsilon > 0.0))
            fail("epsilon must be positive");
        if (covariance_samples && *covariance_samples < 1)
            fail("covariance_samples must be >= 1");

        for (Strategy s : strategies) {
            const std::string name(to_string(s));
            if (!is_fully_digital(s) && num_rf_chains < num_users)
                fail(name + " needs num_rf_chains >= num_users (N_RF = " +
                     std::to_string(num_rf_chains) + ", K = " + std::to_string(num_users) + ")");
            if (uses_subarray(s) && num_antennas % num_rf_chains != 0)
                fail(name + " needs num_antennas divisible by num_rf_chains (N = " +
                     std::to_string(num_antennas) + ", N_RF = " + std::to_string(num_rf_chains) +
                     ")");
            if (uses_covariance(s) && !covariance_samples)
                fail(name + " needs covariance_samples");
            if (s == Strategy::argh_rf_baseline && num_rf_chains != num_users)
                fail(name + " needs num_rf_chains == num_users");
        }
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!piece.empty())
            out.push_back(piece);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("config: cannot parse value '" + text + "' for key '" + key + "'");
    return value;
}

} // namespace detail

/// Parses `key = value` lines; `#` starts a comment; lists are comma-separated.
inline SystemConfig parse_config(std::istream& in) {
    SystemConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));

        using detail::parse_number;
        if (key == "num_antennas")
            cfg.num_antennas = parse_number<Index>(key, value);
        else if (key == "num_users")
            cfg.num_users = parse_number<Index>(key, value);
        else if (key == "num_rf_chains")
            cfg.num_rf_chains = parse_number<Index>(key, value);
        else if (key == "num_paths")
            cfg.num_paths = parse_number<Index>(key, value);
        else if (key == "spacing_ratio")
            cfg.spacing_ratio = parse_number<double>(key, value);
        else if (key == "snr_db") {
            cfg.snr_grid_db.clear();
            for (const auto& v : detail::split_list(value))
                cfg.snr_grid_db.push_back(parse_number<double>(key, v));
        } else if (key == "num_trials")
            cfg.num_trials = parse_number<Index>(key, value);
        else if (key == "root_seed")
            cfg.root_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "t_max")
            cfg.t_max = parse_number<int>(key, value);
        else if (key == "epsilon")
            cfg.epsilon = parse_number<double>(key, value);
        else if (key == "strategies") {
            cfg.strategies.clear();
            for (const auto& v : detail::split_list(value))
                cfg.strategies.push_back(parse_strategy(v));
        } else if (key == "covariance_samples")
            cfg.covariance_samples = parse_number<Index>(key, value);
        else
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return cfg;
}

inline SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline std::string serialize_config(const SystemConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "num_antennas = " << cfg.num_antennas << '\n'
       << "num_users = " << cfg.num_users << '\n'
       << "num_rf_chains = " << cfg.num_rf_chains << '\n'
       << "num_paths = " << cfg.num_paths << '\n'
       << "spacing_ratio = " << cfg.spacing_ratio << '\n'
       << "snr_db = ";
    for (std::size_t i = 0; i < cfg.snr_grid_db.size(); ++i)
        os << (i ? ", " : "") << cfg.snr_grid_db[i];
    os << '\n'
       << "num_trials = " << cfg.num_trials << '\n'
       << "root_seed = " << cfg.root_seed << '\n'
       << "t_max = " << cfg.t_max << '\n'
       << "epsilon = " << cfg.epsilon << '\n'
       << "strategies = ";
    for (std::size_t i = 0; i < cfg.strategies.size(); ++i)
        os << (i ? ", " : "") << to_string(cfg.strategies[i]);
    os << '\n';
    if (cfg.covariance_samples)
        os << "covariance_samples = " << *cfg.covariance_samples << '\n';
    return os.str();
}

/// Expands "a:step:b" into a, a+step, ... <= b.
inline std::vector<double> parse_snr_range(std::string_view spec) {
    const auto parts = [&] {
        std::vector<std::string> out;
        std::size_t start = 0;
        for (;;) {
            const auto c = spec.find(':', start);
            out.push_back(detail::trim(spec.substr(start, c == spec.npos ? spec.npos : c - start)));
            if (c == spec.npos)
                break;
            start = c + 1;
        }
        return out;
    }();
    if (parts.size() != 3)
        throw ConfigError("--snr-db expects a:step:b");
    const double a = detail::parse_number<double>("--snr-db", parts[0]);
    const double step = detail::parse_number<double>("--snr-db", parts[1]);
    const double b = detail::parse_number<double>("--snr-db", parts[2]);
    if (!(step > 0.0) || !(a <= b))
        throw ConfigError("--snr-db needs step > 0 and a <= b");
    std::vector<double> grid;
    for (long i = 0;; ++i) {
        const double v = a + static_cast<double>(i) * step;
        if (v > b + 1e-9 * step)
            break;
        grid.push_back(v);
    }
    return grid;
}

} // namespace hpl

#endif // HPL_CONFIG_HPP
