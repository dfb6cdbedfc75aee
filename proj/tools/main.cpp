// cavity: batch driver for the cavity scattering solver.
//
//   cavity <validate|solve|rcs|field|bench> [--config run.json] [--out table.csv]
//          [--k 1,10,20] [--angles 360 | --angles 30,60,90.5] [--threads n] [--json table.json]

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "cavity/cli.hpp"

using namespace cavity;

int main(int argc, char** argv) {
    CLI::App app{"2D TM cavity scattering: validation, densities, backscatter RCS, field maps, scaling"};
    std::string command, config_path, out_path, json_path, k_text, angles_text;
    int threads = -1;
    app.add_option("command", command, "validate, solve, rcs, field or bench")->required();
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_path, "CSV output path (default stdout)");
    app.add_option("--k", k_text, "comma-separated wavenumbers, overriding the config");
    app.add_option("--angles", angles_text, "angle count, or comma-separated incidence angles in degrees");
    app.add_option("--threads", threads, "OpenMP threads, overriding the config");
    app.add_option("--json", json_path, "also write the table as JSON");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }

    cli::RunConfig cfg;
    try {
        cfg = config_path.empty() ? cli::parse_config("{}") : cli::load_config(config_path);
        if (!k_text.empty()) cli::override_k(cfg, cli::parse_number_list(k_text));
        if (!angles_text.empty()) cli::override_angles(cfg, angles_text);
        if (threads >= 0) cfg.threads = threads;
    } catch (const CavityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::kConfigError;
    }
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    cli::CommandResult result;
    try {
        result = cli::run_command(command, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::kConfigError;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return cli::kGeometryError;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return cli::kSolverError;
    }

    if (out_path.empty()) {
        cli::write_csv(std::cout, command, cfg, result.table);
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write '" << out_path << "'\n";
            return cli::kConfigError;
        }
        cli::write_csv(out, command, cfg, result.table);
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) {
            std::cerr << "cannot write '" << json_path << "'\n";
            return cli::kConfigError;
        }
        cli::write_json(out, command, cfg, result.table);
    }
    if (result.exit_code == cli::kAccuracyExceeded) std::cerr << "accuracy threshold exceeded\n";
    return result.exit_code;
}
