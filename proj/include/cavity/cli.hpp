#pragma once

// Batch front end: JSON run configuration and the validate / solve / rcs /
// field / bench commands, each producing a CSV table.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavity/geometry.hpp"
#include "cavity/scattering.hpp"

namespace cavity::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kGeometryError = 3, kSolverError = 4, kAccuracyExceeded = 5 };

enum class FieldMode { Scattering, Validation };

struct Grid {
    double x0 = -2.5, x1 = 3.5;
    double y0 = -2.5, y1 = 3.0;
    int nx = 41, ny = 41;
};

struct RunConfig {
    std::string geometry = "pot";
    /// Cavity wall for a custom geometry; empty for presets.
    std::vector<CurveSegment> custom_gamma;

    std::vector<double> k{1.0};
    int p = 10;
    int n_corner = 10;
    /// One value for every k, or one per k. 0 selects the per-segment wavelength rule.
    std::vector<int> n_mid{10};
    /// When positive, N_mid = max(2, ceil(n_mid_per_k * k)) and n_mid is ignored.
    double n_mid_per_k = 0.0;
    DomeSpec dome{};
    double aca_tol = 1e-10;
    std::size_t leaf_size = 200;
    std::size_t dense_cap = 6000;
    SolverKind solver = SolverKind::Hodlr;
    double reflection_sign = -1.0;
    double near_factor = 1.0;

    Point2 source{5.0, 12.0};
    std::size_t interior_points = 20;
    std::size_t exterior_points = 20;
    double error_threshold = 1e-6;

    std::vector<double> angles_deg;  // incidence angles for rcs
    std::size_t angle_count = 360;   // nonzero when angles_deg is the equispaced default grid of this size
    double theta_deg = 90.0;         // incidence angle for solve and field
    FieldMode mode = FieldMode::Scattering;
    Grid grid{};

    bool timing_columns = false;
    int threads = 0;  // 0 leaves the OpenMP default

    /// Effective configuration as compact JSON, echoed into the CSV preamble.
    std::string echo;

    int n_mid_for(std::size_t k_index) const;
    Discretization discretization(std::size_t k_index) const;
    SceneGeometry scene() const;
};

/// Parses and validates a JSON document. Unknown keys and out-of-range values
/// throw ConfigError naming the field, or the line and column of a syntax error.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// "1,10,20" -> {1, 10, 20}.
std::vector<double> parse_number_list(const std::string& text);
/// A bare integer n selects n equispaced angles; anything else is a comma list in degrees.
std::vector<double> parse_angles(const std::string& text);

/// Applies command-line overrides and recomputes the config echo.
void override_k(RunConfig& cfg, const std::vector<double>& k);
/// Takes the same forms as parse_angles.
void override_angles(RunConfig& cfg, const std::string& text);

/// CSV table with '#' preamble and footer lines. Empty optional cells are
/// written as empty fields.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> footer;
};

struct CommandResult {
    Table table;
    int exit_code = kOk;
};

CommandResult cmd_validate(const RunConfig& cfg);
CommandResult cmd_solve(const RunConfig& cfg);
CommandResult cmd_rcs(const RunConfig& cfg);
CommandResult cmd_field(const RunConfig& cfg);
CommandResult cmd_bench(const RunConfig& cfg);

/// Mean of the per-step factorization time ratios, each rescaled to an exact
/// doubling of N. Steps where N does not grow are skipped.
double mean_doubling_ratio(const std::vector<double>& n, const std::vector<double>& t);

/// Dispatches by command name; throws ConfigError for an unknown command.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

/// Writes the preamble (command, version, timestamp, config echo), the header,
/// the rows and the footer.
void write_csv(std::ostream& out, const std::string& command, const RunConfig& cfg, const Table& table);
void write_json(std::ostream& out, const std::string& command, const RunConfig& cfg, const Table& table);

/// Fixed-format number used for every CSV cell.
std::string fmt(double v);

}  // namespace cavity::cli
