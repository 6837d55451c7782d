#include "popdyn/analysis.hpp"
#include "popdyn/config.hpp"
#include "popdyn/errors.hpp"
#include "popdyn/io.hpp"
#include "popdyn/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace popdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct GlobalOpts {
    std::string out_dir;
    int stride = -1;  // -1 keeps the config value
    bool quiet = false;
};

ResolvedExperiment load(const std::string& path, const GlobalOpts& opts) {
    ExperimentConfig cfg = parse_config_file(path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.stride >= 0) cfg.stride = opts.stride;
    return resolve(cfg);
}

std::string run_dir_for(const ResolvedExperiment& exp, const std::string& config_path) {
    if (!exp.config.out_dir.empty()) return exp.config.out_dir;
    return fs::path(config_path).stem().string() + "_out";
}

void write_outputs(const std::string& dir, const ResolvedExperiment& exp,
                   const RunResult& result) {
    write_text_atomic((fs::path(dir) / "trajectory.csv").string(),
                      trajectory_csv(result.trace, exp.game.n));
    write_text_atomic((fs::path(dir) / "updates.csv").string(),
                      update_log_csv(result.update_log));
    write_text_atomic((fs::path(dir) / "report.json").string(), report_json(result.report));
    write_text_atomic((fs::path(dir) / "meta.json").string(),
                      meta_json(exp.config, exp.consts));
}

int cmd_simulate(const std::string& config_path, const GlobalOpts& opts) {
    ResolvedExperiment exp;
    try {
        exp = load(config_path, opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    if (!opts.quiet) {
        std::cout << "== " << config_path << " ==\n" << constants_block(exp.consts);
        std::cout << "tuner  " << (exp.config.tuner ? "on" : "off") << "\n";
    }

    RunResult result;
    try {
        result = run_experiment(exp);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << " (last good t = " << e.last_good_time
                  << ")\n";
        return kExitNumeric;
    }

    const std::string dir = run_dir_for(exp, config_path);
    write_outputs(dir, exp, result);
    if (!opts.quiet) {
        const RunReport& r = result.report;
        std::cout << "final ne_dist       " << r.final_ne_dist << "\n"
                  << "final transit mass  " << r.final_transit_mass << "\n"
                  << "tail amplitude      " << r.osc_amplitude << "\n"
                  << "tail mean transit   " << r.mean_transit_mass_tail << "\n"
                  << "rate updates        " << r.update_count << "\n"
                  << "converged           " << (r.converged ? "yes" : "no") << "\n"
                  << "outputs             " << dir << "\n";
    }
    return kExitOk;
}

int cmd_check_game(const std::string& config_path, const GlobalOpts& opts) {
    ResolvedExperiment exp;
    try {
        exp = load(config_path, opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const ContractivityReport contract = verify_contractive(exp.game, 2000);
    const RhoCalibration cal = max_valid_rho(exp.game, kRhoAutoGrid);
    const double rho_used = exp.params.rho;
    const bool rho_ok = cal.any_rho_valid || rho_used <= cal.rho + 1e-12;

    if (!opts.quiet || !(contract.contractive && rho_ok)) {
        std::cout << "game            " << exp.game.name << " (n = " << exp.game.n << ")\n";
        std::cout << "contractive     " << (contract.contractive ? "yes" : "no") << "\n";
        std::cout << "worst tangent   " << contract.worst_value << "\n";
        if (!contract.contractive) {
            std::cout << "witness x       " << contract.witness_x.transpose() << "\n";
            std::cout << "witness tangent " << contract.witness_tangent.transpose() << "\n";
        }
        if (cal.any_rho_valid)
            std::cout << "rho calibration any rho valid (payoff gaps vanish)\n";
        else
            std::cout << "rho calibration max " << cal.rho << " (auto uses "
                      << cal.rho * kRhoSafety << ")\n";
        std::cout << "rho in use      " << rho_used << (rho_ok ? "" : "  INVALID") << "\n";
        std::cout << "B_DF            " << exp.game.bound_df << "\n";
    }
    return contract.contractive && rho_ok ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const std::vector<std::string>& config_paths, const GlobalOpts& opts) {
    std::vector<RunReport> reports;
    std::vector<std::string> labels;
    std::vector<std::string> dirs;
    for (const std::string& path : config_paths) {
        ResolvedExperiment exp;
        try {
            exp = load(path, opts);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            if (!reports.empty()) std::cerr << "(partial results above were not written)\n";
            return kExitConfig;
        }
        // --out names the comparison root; each run gets its own subdirectory.
        std::string dir = fs::path(path).stem().string() + "_out";
        if (!opts.out_dir.empty()) dir = (fs::path(opts.out_dir) / fs::path(path).stem()).string();
        else if (!exp.config.out_dir.empty()) dir = exp.config.out_dir;

        RunResult result;
        try {
            result = run_experiment(exp);
        } catch (const NumericalError& e) {
            std::cerr << "numerical failure in " << path << ": " << e.what() << "\n";
            return kExitNumeric;
        }
        write_outputs(dir, exp, result);
        reports.push_back(result.report);
        labels.push_back(fs::path(path).stem().string());
        dirs.push_back(dir);
    }

    const std::string table = comparison_table(reports, labels);
    if (!opts.quiet) std::cout << table;

    std::string csv = "run,final_ne_dist,final_transit_mass,osc_amplitude,mean_transit_mass_tail,"
                      "update_count,converged\n";
    char line[256];
    for (std::size_t i : compare_order(reports)) {
        const RunReport& r = reports[i];
        std::snprintf(line, sizeof(line), "%s,%.12g,%.12g,%.12g,%.12g,%d,%d\n",
                      labels[i].c_str(), r.final_ne_dist, r.final_transit_mass, r.osc_amplitude,
                      r.mean_transit_mass_tail, r.update_count, r.converged ? 1 : 0);
        csv += line;
    }
    const std::string csv_path =
        opts.out_dir.empty() ? "compare.csv" : (fs::path(opts.out_dir) / "compare.csv").string();
    write_text_atomic(csv_path, csv);
    if (!opts.quiet) std::cout << "comparison csv      " << csv_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed evolutionary dynamics in population games"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--out", opts.out_dir, "Output directory (overrides the config)");
    app.add_option("--stride", opts.stride, "Recording stride in steps (overrides the config)");
    app.add_flag("--quiet", opts.quiet, "Suppress normal output");

    std::string sim_config;
    CLI::App* sim = app.add_subcommand("simulate", "Run one experiment and write its outputs");
    sim->add_option("config", sim_config, "Experiment config (JSON)")->required();

    std::string check_config;
    CLI::App* check =
        app.add_subcommand("check-game", "Verify contractivity and the rho calibration");
    check->add_option("config", check_config, "Experiment config (JSON)")->required();

    std::vector<std::string> compare_configs;
    CLI::App* compare = app.add_subcommand("compare", "Run several configs and rank the results");
    compare->add_option("configs", compare_configs, "Experiment configs (JSON)")
        ->required()
        ->expected(2, -1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, opts);
        if (check->parsed()) return cmd_check_game(check_config, opts);
        if (compare->parsed()) return cmd_compare(compare_configs, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
