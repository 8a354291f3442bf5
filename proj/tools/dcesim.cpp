// Command-line front end: run, preset, sweep, perturbative.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dce/errors.hpp"
#include "dce/runner.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dce::Error("cannot write " + path.string());
    out << text;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir) {
    const dce::RunConfig config = dce::load_run_config(config_path);
    const dce::RunOutput out = dce::execute(config);
    dce::write_run(config, out, out_dir);
    std::cout << "C_max " << dce::format_number(out.peak.value) << " at t = "
              << dce::format_number(out.peak.time) << " ns (n_fock " << out.n_fock_used << ")\n";
    return 0;
}

int cmd_preset(const std::string& name, const fs::path& out_dir, bool exec) {
    const dce::Preset preset = dce::make_preset(name);
    dce::write_preset(preset, out_dir, exec);
    for (const auto& t : preset.tables) std::cout << (out_dir / (t.name + ".csv")).string() << "\n";
    for (const auto& c : preset.runs) {
        std::cout << (out_dir / (c.name + ".json")).string();
        if (exec) std::cout << " -> " << (out_dir / c.name).string();
        std::cout << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir, int jobs) {
    const dce::SweepConfig sweep = dce::parse_sweep_config(dce::read_json_file(config_path));
    const dce::SweepResult r = dce::run_sweep(sweep, jobs);
    write_file(out_dir / "sweep.csv", r.csv);
    std::cout << r.cells - r.failures << " of " << r.cells << " cells succeeded\n";
    if (r.cells > 0 && r.failures == r.cells) {
        std::cerr << "error: every sweep cell failed\n";
        return exit_numerical;
    }
    return 0;
}

int cmd_perturbative(const std::string& config_path, const std::string& times, const std::string& out) {
    const dce::RunConfig config = dce::load_run_config(config_path);
    const std::string csv = dce::perturbative_csv(config, dce::parse_time_list(times));
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_file(out, csv);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two moving qubits entangled through a parametrically driven cavity pair"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset_name, times, pert_out;
    bool exec = false;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "simulate one configuration");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    auto* preset = app.add_subcommand("preset", "write (and optionally run) a named figure preset");
    preset->add_option("--name", preset_name, "fig2 ... fig7")->required();
    preset->add_option("--out", out_dir, "output directory")->required();
    preset->add_flag("--exec", exec, "also run every configuration of the preset");

    auto* sweep = app.add_subcommand("sweep", "run a grid of configurations over one or two axes");
    sweep->add_option("--config", config_path, "JSON sweep configuration")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* pert = app.add_subcommand("perturbative", "third-order estimate with closed-form comparison");
    pert->add_option("--config", config_path, "JSON run configuration")->required();
    pert->add_option("--t", times, "times in ns: a,b,c or start:stop:step")->required();
    pert->add_option("--out", pert_out, "CSV file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*preset) return cmd_preset(preset_name, out_dir, exec);
        if (*sweep) return cmd_sweep(config_path, out_dir, jobs);
        if (*pert) return cmd_perturbative(config_path, times, pert_out);
    } catch (const dce::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const dce::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
