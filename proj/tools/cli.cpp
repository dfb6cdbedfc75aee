#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>

#include <json.hpp>

#include "cavity/cli.hpp"

namespace cavity::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_int(std::size_t v) { return std::to_string(v); }

std::string n_mid_cell(int n_mid) { return n_mid == 0 ? "auto" : std::to_string(n_mid); }

std::string timing_cell(const RunConfig& cfg, double seconds) { return cfg.timing_columns ? fmt(seconds) : ""; }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

RightHandSide make_rhs(const RunConfig& cfg, const SceneGeometry& scene, const SystemOperator& op) {
    if (cfg.mode == FieldMode::Validation) return rhs_validation(scene, op, cfg.source);
    return rhs_scattering(op, cfg.theta_deg * kPi / 180.0, cfg.reflection_sign);
}

double grid_coord(double a, double b, int n, int i) {
    if (n == 1) return 0.5 * (a + b);
    return a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CommandResult cmd_validate(const RunConfig& cfg) {
    CommandResult res;
    res.table.columns = {"k", "N_corner", "N_mid", "N_tot", "T_factor", "T_solve", "E_error", "E_exterior"};
    const SceneGeometry scene = cfg.scene();
    for (std::size_t i = 0; i < cfg.k.size(); ++i) {
        const Discretization disc = cfg.discretization(i);
        const SolveReport rep = validate_point_source(scene, WaveContext(cfg.k[i]), disc, cfg.source,
                                                      cfg.interior_points, cfg.exterior_points);
        res.table.rows.push_back({fmt(cfg.k[i]), std::to_string(cfg.n_corner), n_mid_cell(disc.mesh.n_mid),
                                  fmt_int(rep.n_tot), timing_cell(cfg, rep.t_factor), timing_cell(cfg, rep.t_solve),
                                  fmt(*rep.e_error), fmt(*rep.exterior_max)});
        res.table.footer.push_back({"timing", "k=" + fmt(cfg.k[i]) + " T_factor=" + fmt(rep.t_factor) +
                                                  " T_solve=" + fmt(rep.t_solve) + " residual=" + fmt(rep.residual)});
        if (*rep.e_error > cfg.error_threshold) res.exit_code = kAccuracyExceeded;
    }
    return res;
}

CommandResult cmd_solve(const RunConfig& cfg) {
    CommandResult res;
    res.table.columns = {"k", "node", "component", "x1", "x2", "re_mu", "im_mu", "re_sigma", "im_sigma"};
    const SceneGeometry scene = cfg.scene();
    for (std::size_t i = 0; i < cfg.k.size(); ++i) {
        const ScatteringSolver solver(scene, WaveContext(cfg.k[i]), cfg.discretization(i));
        SolveReport rep;
        const DensitySolution sol = solver.solve(make_rhs(cfg, scene, solver.op()), &rep);
        const Mesh& m = solver.mesh();
        const std::size_t n1 = m.gamma1_nodes;
        for (std::size_t node = 0; node < m.node_count(); ++node) {
            const Component c = m.panels[m.node_panel[node]].component;
            cplx mu;
            std::string re_s, im_s;
            if (node < n1) {
                mu = sol.mu_gamma1[static_cast<Index>(node)];
                re_s = fmt(sol.sigma_gamma1[static_cast<Index>(node)].real());
                im_s = fmt(sol.sigma_gamma1[static_cast<Index>(node)].imag());
            } else {
                mu = sol.mu_bgamma[static_cast<Index>(node - n1)];
            }
            res.table.rows.push_back({fmt(cfg.k[i]), fmt_int(node), to_string(c), fmt(m.x[node].x), fmt(m.x[node].y),
                                      fmt(mu.real()), fmt(mu.imag()), re_s, im_s});
        }
        res.table.footer.push_back({"timing", "k=" + fmt(cfg.k[i]) + " N_tot=" + fmt_int(rep.n_tot) +
                                                  " T_factor=" + fmt(rep.t_factor) + " T_solve=" + fmt(rep.t_solve) +
                                                  " residual=" + fmt(rep.residual)});
    }
    return res;
}

CommandResult cmd_rcs(const RunConfig& cfg) {
    CommandResult res;
    res.table.columns = {"k", "theta_deg", "rcs_db"};
    const SceneGeometry scene = cfg.scene();
    std::vector<double> degrees = cfg.angles_deg;
    if (degrees.empty() && cfg.angle_count > 0) {
        for (double r : default_angles(cfg.angle_count)) degrees.push_back(r * 180.0 / kPi);
    }
    std::vector<double> angles;
    for (double a : degrees) angles.push_back(a * kPi / 180.0);
    for (std::size_t i = 0; i < cfg.k.size(); ++i) {
        const ScatteringSolver solver(scene, WaveContext(cfg.k[i]), cfg.discretization(i));
        const FarField ff = backscatter_rcs(solver, angles, cfg.reflection_sign);
        for (std::size_t a = 0; a < angles.size(); ++a) {
            res.table.rows.push_back({fmt(cfg.k[i]), fmt(degrees[a]), fmt(ff.db[a])});
        }
        const double per_angle = angles.empty() ? 0.0 : ff.t_solve_total / static_cast<double>(angles.size());
        res.table.footer.push_back({"timing", "k=" + fmt(cfg.k[i]) + " N_tot=" + fmt_int(solver.op().size()) +
                                                  " T_factor=" + fmt(solver.factor_seconds()) +
                                                  " T_solve_total=" + fmt(ff.t_solve_total) +
                                                  " T_solve_per_angle=" + fmt(per_angle)});
    }
    return res;
}

CommandResult cmd_field(const RunConfig& cfg) {
    CommandResult res;
    res.table.columns = {"k", "x1", "x2", "re_us", "im_us", "region", "accuracy_flag"};
    const SceneGeometry scene = cfg.scene();
    const Grid& g = cfg.grid;
    for (std::size_t i = 0; i < cfg.k.size(); ++i) {
        const ScatteringSolver solver(scene, WaveContext(cfg.k[i]), cfg.discretization(i));
        SolveReport rep;
        const DensitySolution sol = solver.solve(make_rhs(cfg, scene, solver.op()), &rep);
        const auto start = Clock::now();
        for (int iy = 0; iy < g.ny; ++iy) {
            for (int ix = 0; ix < g.nx; ++ix) {
                const Point2 q{grid_coord(g.x0, g.x1, g.nx, ix), grid_coord(g.y0, g.y1, g.ny, iy)};
                const RegionLabel region = classify_point(scene, q);
                std::vector<std::string> row{fmt(cfg.k[i]), fmt(q.x), fmt(q.y), "", "", to_string(region), ""};
                if (region == RegionLabel::Omega1 || region == RegionLabel::ExteriorUpper) {
                    const cplx u = eval_scattered_field(sol, q, region);
                    row[3] = fmt(u.real());
                    row[4] = fmt(u.imag());
                    row[6] = near_boundary(solver.mesh(), q) ? "near_boundary" : "ok";
                }
                res.table.rows.push_back(std::move(row));
            }
        }
        res.table.footer.push_back({"timing", "k=" + fmt(cfg.k[i]) + " N_tot=" + fmt_int(rep.n_tot) +
                                                  " T_factor=" + fmt(rep.t_factor) + " T_solve=" + fmt(rep.t_solve) +
                                                  " T_eval=" + fmt(seconds_since(start))});
    }
    return res;
}

CommandResult cmd_bench(const RunConfig& cfg) {
    CommandResult res;
    res.table.columns = {"k", "N_corner", "N_mid", "N_tot", "T_factor", "T_solve", "max_rank", "status"};
    const SceneGeometry scene = cfg.scene();
    std::vector<double> n_ok, t_ok;
    for (std::size_t i = 0; i < cfg.k.size(); ++i) {
        const Discretization disc = cfg.discretization(i);
        std::vector<std::string> row{fmt(cfg.k[i]), std::to_string(cfg.n_corner), n_mid_cell(disc.mesh.n_mid),
                                     "", "", "", "", "ok"};
        try {
            const ScatteringSolver solver(scene, WaveContext(cfg.k[i]), disc);
            SolveReport rep;
            solver.solve(rhs_validation(scene, solver.op(), cfg.source), &rep);
            Index max_rank = 0;
            if (const HodlrMatrix* h = solver.hodlr()) {
                for (const LevelRanks& l : h->rank_report()) max_rank = std::max(max_rank, l.max_rank);
            }
            row[3] = fmt_int(rep.n_tot);
            row[4] = timing_cell(cfg, rep.t_factor);
            row[5] = timing_cell(cfg, rep.t_solve);
            row[6] = solver.hodlr() ? std::to_string(max_rank) : "";
            n_ok.push_back(static_cast<double>(rep.n_tot));
            t_ok.push_back(rep.t_factor);
            res.table.footer.push_back({"timing", "k=" + fmt(cfg.k[i]) + " N_tot=" + fmt_int(rep.n_tot) +
                                                      " T_factor=" + fmt(rep.t_factor) +
                                                      " T_solve=" + fmt(rep.t_solve)});
        } catch (const CavityError& e) {
            row[7] = std::string("failed: ") + e.what();
        }
        res.table.rows.push_back(std::move(row));
    }
    if (n_ok.size() >= 2) {
        // Least-squares slope of log T_factor against log N.
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n_ok.size(); ++i) {
            mx += std::log(n_ok[i]);
            my += std::log(t_ok[i]);
        }
        mx /= static_cast<double>(n_ok.size());
        my /= static_cast<double>(n_ok.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < n_ok.size(); ++i) {
            sxy += (std::log(n_ok[i]) - mx) * (std::log(t_ok[i]) - my);
            sxx += (std::log(n_ok[i]) - mx) * (std::log(n_ok[i]) - mx);
        }
        if (sxx > 0.0) res.table.footer.push_back({"growth_exponent", fmt(sxy / sxx)});
        res.table.footer.push_back({"mean_doubling_ratio", fmt(mean_doubling_ratio(n_ok, t_ok))});
    }
    return res;
}

double mean_doubling_ratio(const std::vector<double>& n, const std::vector<double>& t) {
    double sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t i = 0; i + 1 < n.size(); ++i) {
        if (!(n[i + 1] > n[i]) || !(t[i] > 0.0) || !(t[i + 1] > 0.0)) continue;
        // Ratio per step, rescaled to an exact doubling of N.
        sum += std::pow(t[i + 1] / t[i], std::log(2.0) / std::log(n[i + 1] / n[i]));
        ++steps;
    }
    return steps ? sum / static_cast<double>(steps) : 0.0;
}

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
    if (command != "validate" && command != "solve" && command != "rcs" && command != "field" &&
        command != "bench") {
        throw ConfigError("unknown command '" + command + "'");
    }
    if (const auto v = validate_scene(cfg.scene()); !v.empty()) {
        throw GeometryError("invalid scene (" + v.front().code + "): " + v.front().message);
    }
    if (command == "validate") return cmd_validate(cfg);
    if (command == "solve") return cmd_solve(cfg);
    if (command == "rcs") return cmd_rcs(cfg);
    if (command == "field") return cmd_field(cfg);
    return cmd_bench(cfg);
}

void write_csv(std::ostream& out, const std::string& command, const RunConfig& cfg, const Table& table) {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# cavity " << command << "\n";
    out << "# version " << kVersion << "\n";
    out << "# timestamp " << stamp << "\n";
    out << "# config " << cfg.echo << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
        out << "\n";
    }
    for (const auto& [key, value] : table.footer) out << "# " << key << " " << value << "\n";
}

void write_json(std::ostream& out, const std::string& command, const RunConfig& cfg, const Table& table) {
    nlohmann::json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["config"] = cfg.echo.empty() ? nlohmann::json::object() : nlohmann::json::parse(cfg.echo);
    j["columns"] = table.columns;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& cell : row) {
            if (cell.empty()) r.push_back(nullptr);
            else r.push_back(cell);
        }
        j["rows"].push_back(std::move(r));
    }
    j["meta"] = nlohmann::json::array();
    for (const auto& [key, value] : table.footer) j["meta"].push_back({{"key", key}, {"value", value}});
    out << j.dump(2) << "\n";
}

}  // namespace cavity::cli
