// usc_battery.cpp - command-line scenario runner and figure-data emitter
//
// exit codes: 0 success, 2 config error, 3 instability, 4 oracle divergence, 1 other
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "usc/errors.hpp"
#include "usc/figures.hpp"
#include "usc/scenario.hpp"

namespace {

int run_table(const std::string& config_path, const std::string& out_dir, const std::string& name, usc::RunMode mode,
              bool force_oracle, bool need_sweep, int threads) {
    usc::ScenarioConfig cfg = usc::load_config(config_path);
    if (force_oracle) {
        if (!cfg.oracle.enabled) cfg.oracle.enabled = true;
        cfg = usc::parse_config(cfg.to_json()); // re-validate with the oracle switched on
    }
    if (need_sweep && cfg.sweep.empty()) throw usc::ConfigInvalid("sweep: at least one axis is required");
    const usc::ScenarioOutcome out = usc::evaluate_scenario(cfg, mode, threads);
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / (name + ".csv")).string();
    out.table.write(path);
    std::cout << path << " (" << out.table.rows.size() << " rows)\n";
    if (out.oracle_failure) {
        std::cerr << "oracle check failed: " << *out.oracle_failure << "\n";
        return 4;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissipative two-oscillator quantum battery laboratory"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads for sweeps (default: USC_BATTERY_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    std::string config, out = ".";
    auto add_io = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config, "scenario JSON file");
        if (config_required) opt->required();
        sub->add_option("--out", out, "output directory")->capture_default_str();
    };

    auto* spectrum = app.add_subcommand("spectrum", "normal-mode frequencies, bath weights and squeezing parameters");
    auto* evolve = app.add_subcommand("evolve", "battery figures of merit on the configured time grid");
    auto* steady = app.add_subcommand("steady", "steady-state battery figures of merit");
    auto* sweep = app.add_subcommand("sweep", "parameter sweep (time grid if given, otherwise steady state)");
    auto* oracle = app.add_subcommand("oracle-check", "compare the moment pipeline with the truncated Fock-space oracle");
    auto* figure = app.add_subcommand("figure", "emit the data tables of one figure");
    for (auto* s : {spectrum, evolve, steady, sweep, oracle}) add_io(s, true);
    add_io(figure, false);
    std::string figure_id;
    figure->add_option("id", figure_id, "figure id")->required()->check(CLI::IsMember(usc::figure_ids()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*figure) {
            for (const std::string& p : usc::write_figure(figure_id, out, threads)) std::cout << p << "\n";
            return 0;
        }
        auto grid_or_steady = [&]() {
            return usc::load_config(config).time_grid ? usc::RunMode::Evolve : usc::RunMode::Steady;
        };
        if (*spectrum) return run_table(config, out, "spectrum", usc::RunMode::Spectrum, false, false, threads);
        if (*evolve) return run_table(config, out, "evolve", usc::RunMode::Evolve, false, false, threads);
        if (*steady) return run_table(config, out, "steady", usc::RunMode::Steady, false, false, threads);
        if (*sweep) return run_table(config, out, "sweep", grid_or_steady(), false, true, threads);
        if (*oracle) return run_table(config, out, "oracle_check", grid_or_steady(), true, false, threads);
    } catch (const usc::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const usc::OracleDiverged& e) {
        std::cerr << "oracle diverged: " << e.what() << "\n";
        return 4;
    } catch (const usc::UnstableError& e) {
        std::cerr << "unstable: " << e.what() << "\n";
        return 3;
    } catch (const usc::DegenerateError& e) {
        std::cerr << "degenerate normal modes: " << e.what() << "\n";
        return 3;
    } catch (const usc::NoUniqueSteadyState& e) {
        std::cerr << "no unique steady state: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
