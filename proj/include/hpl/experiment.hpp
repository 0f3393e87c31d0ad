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

#ifndef HPL_EXPERIMENT_HPP
#define HPL_EXPERIMENT_HPP

#include "hpl/channel.hpp"
#include "hpl/config.hpp"
#include "hpl/core.hpp"
#include "hpl/digital_design.hpp"
#include "hpl/precoding.hpp"
#include "hpl/rf_design.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace hpl {

/// Channel-side inputs shared by every strategy within one trial.
struct TrialInputs {
    ChannelRealization channel;
    std::optional<CovarianceEstimate> covariance;
};

/// Draws the trial's channel and, when requested, T_s covariance samples that
/// keep the same path angles but redraw the gains.
inline TrialInputs draw_trial(const SystemConfig& cfg, std::uint64_t trial) {
    RandomStream rng = trial_stream(cfg.root_seed, trial);
    const ArrayGeometry geom{cfg.num_antennas, cfg.spacing_ratio};
    const auto angles = draw_angles(cfg.num_users, cfg.num_paths, rng);
    TrialInputs in{channel_with_angles(angles, geom, rng), std::nullopt};
    if (cfg.needs_covariance()) {
        std::vector<ChannelRealization> samples;
        samples.reserve(static_cast<std::size_t>(*cfg.covariance_samples));
        for (Index i = 0; i < *cfg.covariance_samples; ++i)
            samples.push_back(channel_with_angles(angles, geom, rng));
        in.covariance = sample_covariance(samples);
    }
    return in;
}

/// Analog precoder for a strategy; identity for the fully-digital ones.
inline RfPrecoder build_rf(Strategy s, const TrialInputs& in, const SystemConfig& cfg) {
    const Index nrf = cfg.num_rf_chains;
    switch (s) {
    case Strategy::fully_digital_wmmse:
    case Strategy::zf_fully_digital:
        return RfPrecoder::identity(in.channel.num_antennas());
    case Strategy::argh_rf_baseline:
        return rf_from_channel_phases(in.channel, nrf);
    case Strategy::proposed_fc:
        return rf_from_left_singular(left_singular_basis(in.channel, nrf));
    case Strategy::proposed_fixed:
        return fixed_subarray_rf(left_singular_basis(in.channel, nrf), nrf);
    case Strategy::proposed_dynamic:
        return dynamic_subarray_rf(left_singular_basis(in.channel, nrf), nrf);
    default:
        break;
    }
    if (!in.covariance)
        throw ConfigError(std::string(to_string(s)) + " needs a covariance estimate");
    switch (s) {
    case Strategy::proposed_cov_fc:
        return rf_from_covariance(*in.covariance, nrf);
    case Strategy::proposed_cov_fixed:
        return fixed_subarray_rf(covariance_basis(*in.covariance, nrf), nrf);
    case Strategy::proposed_cov_dynamic:
        return dynamic_subarray_rf(covariance_basis(*in.covariance, nrf), nrf);
    default:
        throw ConfigError("unhandled strategy");
    }
}

/// Digital stage on a built analog precoder; output is power-normalized.
inline HybridPrecoder build_digital(Strategy s, const RfPrecoder& rf, const TrialInputs& in,
                                    const SystemConfig& cfg, const SnrPoint& snr) {
    if (s == Strategy::zf_fully_digital)
        return fully_digital_zf(in.channel);
    if (s == Strategy::argh_rf_baseline) // phase-of-H RF with its usual ZF baseband
        return make_normalized(rf, zf_precoder(effective_channel(rf, in.channel)));
    return design_digital_stage(rf, in.channel, snr, cfg.t_max, cfg.epsilon).precoder;
}

/// RF construction, effective channel, digital optimization, normalization.
inline HybridPrecoder strategy_build(Strategy s, const TrialInputs& in, const SystemConfig& cfg,
                                     const SnrPoint& snr) {
    return build_digital(s, build_rf(s, in, cfg), in, cfg, snr);
}

inline HybridPrecoder strategy_build(std::string_view name, const TrialInputs& in,
                                     const SystemConfig& cfg, const SnrPoint& snr) {
    return strategy_build(parse_strategy(name), in, cfg, snr);
}

struct ResultCell {
    Strategy strategy = Strategy::fully_digital_wmmse;
    double snr_db = 0.0;
    double mean_sum_se = 0.0;
    double std_sum_se = 0.0;
    Index trials = 0;
    double mean_build_seconds = 0.0;
    std::vector<double> samples; // per-trial sum-SE, trial order
};

struct ExperimentResult {
    SystemConfig config;
    std::string version;
    std::vector<ResultCell> cells; // strategy order, then ascending SNR

    const ResultCell& cell(Strategy s, double snr_db) const {
        for (const auto& c : cells)
            if (c.strategy == s && c.snr_db == snr_db)
                return c;
        throw InvalidInput("ExperimentResult: no such cell");
    }
};

struct RunOptions {
    unsigned threads = 1;
    bool measure_time = false; // off keeps output byte-reproducible
};

namespace detail {

struct TrialOutcome {
    std::vector<double> se;      // [strategy * snr_count + snr]
    std::vector<double> seconds; // same layout
};

inline TrialOutcome run_trial(const SystemConfig& cfg, const std::vector<double>& grid,
                              std::uint64_t trial, bool measure_time) {
    using clock = std::chrono::steady_clock;
    const auto seconds_since = [&](clock::time_point t0) {
        return measure_time ? std::chrono::duration<double>(clock::now() - t0).count() : 0.0;
    };

    const TrialInputs in = draw_trial(cfg, trial);
    TrialOutcome out;
    const std::size_t cells = cfg.strategies.size() * grid.size();
    out.se.resize(cells);
    out.seconds.resize(cells);

    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        const Strategy strat = cfg.strategies[s];
        const auto t_rf = clock::now();
        const RfPrecoder rf = build_rf(strat, in, cfg);
        const double rf_seconds = seconds_since(t_rf);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const SnrPoint snr = SnrPoint::from_db(grid[p]);
            const auto t_d = clock::now();
            const HybridPrecoder f = build_digital(strat, rf, in, cfg, snr);
            const std::size_t idx = s * grid.size() + p;
            out.seconds[idx] = rf_seconds + seconds_since(t_d);
            out.se[idx] = sum_se(in.channel, f, snr);
        }
    }
    return out;
}

} // namespace detail

/// Paired Monte Carlo: every strategy sees the same channel within a trial.
/// Results depend only on the config, never on the thread count.
inline ExperimentResult run_experiment(const SystemConfig& cfg, const RunOptions& opts = {}) {
    cfg.validate();
    std::vector<double> grid = cfg.snr_grid_db;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t n_trials = static_cast<std::size_t>(cfg.num_trials);
    std::vector<detail::TrialOutcome> outcomes(n_trials);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_trials)
                return;
            try {
                outcomes[t] = detail::run_trial(cfg, grid, t, opts.measure_time);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(n_trials);
                return;
            }
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_trials)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    ExperimentResult res;
    res.config = cfg;
    res.version = "hpl " + std::string(kVersion);
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const std::size_t idx = s * grid.size() + p;
            ResultCell c;
            c.strategy = cfg.strategies[s];
            c.snr_db = grid[p];
            c.trials = cfg.num_trials;
            c.samples.reserve(n_trials);
            double time_sum = 0.0;
            for (const auto& o : outcomes) {
                c.samples.push_back(o.se[idx]);
                time_sum += o.seconds[idx];
            }
            double sum = 0.0;
            for (double v : c.samples)
                sum += v;
            c.mean_sum_se = sum / static_cast<double>(n_trials);
            double sq = 0.0;
            for (double v : c.samples)
                sq += (v - c.mean_sum_se) * (v - c.mean_sum_se);
            c.std_sum_se = n_trials > 1 ? std::sqrt(sq / static_cast<double>(n_trials - 1)) : 0.0;
            c.mean_build_seconds = time_sum / static_cast<double>(n_trials);
            res.cells.push_back(std::move(c));
        }
    }
    return res;
}

} // namespace hpl

#endif // HPL_EXPERIMENT_HPP
