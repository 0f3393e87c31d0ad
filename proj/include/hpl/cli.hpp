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

#ifndef HPL_CLI_HPP
#define HPL_CLI_HPP

#include "hpl/config.hpp"
#include "hpl/csv.hpp"
#include "hpl/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace hpl {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

namespace detail {

inline void print_smoke_trial(const SystemConfig& cfg, std::ostream& out) {
    std::vector<double> grid = cfg.snr_grid_db;
    std::sort(grid.begin(), grid.end());
    const double snr_db = grid[grid.size() / 2];
    const SnrPoint snr = SnrPoint::from_db(snr_db);
    const TrialInputs in = draw_trial(cfg, 0);

    out << "smoke trial 0 at " << snr_db << " dB\n";
    bool all_ok = true;
    for (Strategy s : cfg.strategies) {
        out << "== " << to_string(s) << '\n';
        const RfPrecoder rf = build_rf(s, in, cfg);
        const RfReport rep = validate_rf(rf);
        out << rep;
        all_ok = all_ok && rep.ok();
        if (s == Strategy::zf_fully_digital) {
            out << "sum SE: " << sum_se(in.channel, fully_digital_zf(in.channel), snr) << '\n';
            continue;
        }
        const PrecoderDesign d = design_digital_stage(rf, in.channel, snr, cfg.t_max, cfg.epsilon);
        out << "wmmse iterations: " << d.state.iteration
            << (d.state.converged ? " (converged)" : " (hit t_max)") << '\n'
            << "wmmse sum-SE trace:";
        for (double v : d.state.objective_trace)
            out << ' ' << v;
        out << '\n' << "power trace: " << d.precoder.transmit_power() << '\n'
            << "sum SE: " << sum_se(in.channel, d.precoder, snr) << '\n';
    }
    if (!all_ok)
        throw NumericalError("validate: RF precoder structure violations reported above");
}

} // namespace detail

/// Command-line entry point: run, sweep, validate, version.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Hybrid precoding Monte Carlo simulator", "hpl_sim"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string snr_range;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    bool timing = false;

    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Configuration file")->required();
        sub->add_option("--out", out_path, "CSV output path ('-' for stdout)")->required();
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override root_seed");
        sub->add_flag("--timing", timing, "Record mean_build_seconds (output no longer reproducible)");
    };

    CLI::App* run = app.add_subcommand("run", "Run the configured experiment and write CSV");
    add_run_flags(run);
    CLI::App* sweep = app.add_subcommand("sweep", "Like run, with an SNR grid override");
    add_run_flags(sweep);
    sweep->add_option("--snr-db", snr_range, "SNR grid a:step:b in dB")->required();
    CLI::App* validate = app.add_subcommand("validate", "Check config and run one smoke trial");
    validate->add_option("--config", config_path, "Configuration file")->required();
    validate->add_option("--seed", seed, "Override root_seed");
    CLI::App* version = app.add_subcommand("version", "Print version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitConfig;
    }

    if (version->parsed()) {
        out << "hpl_sim " << kVersion << '\n';
        return kExitOk;
    }

    SystemConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed)
            cfg.root_seed = *seed;
        if (sweep->parsed())
            cfg.snr_grid_db = parse_snr_range(snr_range);
        cfg.validate();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (validate->parsed()) {
            out << "config ok\n" << serialize_config(cfg);
            detail::print_smoke_trial(cfg, out);
            return kExitOk;
        }
        std::ostringstream progress;
        progress << "running " << cfg.num_trials << " trials x " << cfg.strategies.size()
                 << " strategies x " << cfg.snr_grid_db.size() << " SNR points on " << threads
                 << " thread(s)";
        log(LogLevel::info, progress.str());
        const ExperimentResult res = run_experiment(cfg, {threads, timing});
        if (out_path == "-")
            emit_csv(res, out);
        else
            emit_csv(res, out_path);
        log(LogLevel::info, "wrote " + out_path);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace hpl

#endif // HPL_CLI_HPP
