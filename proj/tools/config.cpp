#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cavity/cli.hpp"

namespace cavity::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
    }
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
}

long long integer(const json& j, const std::string& field, long long lo, long long hi) {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    const long long v = j.get<long long>();
    if (v < lo || v > hi) fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

Point2 point(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) fail(field, "expected [x1, x2]");
    return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

std::array<double, 2> interval(const json& j, const std::string& field) {
    const Point2 p = point(j, field);
    if (!(p.x <= p.y)) fail(field, "lower bound exceeds upper bound");
    return {p.x, p.y};
}

bool flag(const json& obj, const char* key, const std::string& where, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(where + "." + key, "expected true or false");
    return obj[key].get<bool>();
}

std::vector<CurveSegment> parse_custom_geometry(const json& g, std::string& name) {
    check_keys(g, "geometry", {"name", "segments"});
    name = "custom";
    if (g.contains("name")) {
        if (!g["name"].is_string()) fail("geometry.name", "expected a string");
        name = g["name"].get<std::string>();
    }
    if (!g.contains("segments") || !g["segments"].is_array() || g["segments"].empty()) {
        fail("geometry.segments", "expected a non-empty array");
    }
    std::vector<CurveSegment> out;
    for (std::size_t i = 0; i < g["segments"].size(); ++i) {
        const json& s = g["segments"][i];
        const std::string where = "geometry.segments[" + std::to_string(i) + "]";
        if (!s.is_object() || !s.contains("type") || !s["type"].is_string()) fail(where, "expected an object with a type");
        const std::string type = s["type"].get<std::string>();
        if (type == "polyline") {
            check_keys(s, where, {"type", "points", "corners", "corner_start", "corner_end"});
            if (!s.contains("points") || !s["points"].is_array() || s["points"].size() < 2) {
                fail(where + ".points", "expected at least two points");
            }
            const bool corners = flag(s, "corners", where, true);
            const std::size_t first = out.size();
            const json& pts = s["points"];
            for (std::size_t v = 0; v + 1 < pts.size(); ++v) {
                const std::string pw = where + ".points[" + std::to_string(v) + "]";
                out.push_back(CurveSegment::line(point(pts[v], pw), point(pts[v + 1], pw)));
                out.back().corner_start = out.back().corner_end = corners;
            }
            out[first].corner_start = flag(s, "corner_start", where, corners);
            out.back().corner_end = flag(s, "corner_end", where, corners);
        } else if (type == "arc") {
            check_keys(s, where, {"type", "center", "radius", "theta0", "theta1", "corner_start", "corner_end"});
            for (const char* key : {"center", "radius", "theta0", "theta1"}) {
                if (!s.contains(key)) fail(where + "." + key, "missing");
            }
            const double r = number(s["radius"], where + ".radius");
            if (!(r > 0.0)) fail(where + ".radius", "must be positive");
            const double t0 = number(s["theta0"], where + ".theta0");
            const double t1 = number(s["theta1"], where + ".theta1");
            if (t0 == t1) fail(where + ".theta1", "must differ from theta0");
            out.push_back(CurveSegment::arc(point(s["center"], where + ".center"), r, t0, t1));
            out.back().corner_start = flag(s, "corner_start", where, false);
            out.back().corner_end = flag(s, "corner_end", where, false);
        } else if (type == "trig_radial") {
            check_keys(s, where, {"type", "center", "y_scale", "r0", "sines", "sine_products", "theta0", "theta1",
                                  "corner_start", "corner_end"});
            auto shape = std::make_shared<TrigRadialShape>();
            if (s.contains("center")) shape->center = point(s["center"], where + ".center");
            if (s.contains("y_scale")) shape->y_scale = number(s["y_scale"], where + ".y_scale");
            if (s.contains("r0")) shape->r0 = number(s["r0"], where + ".r0");
            if (s.contains("sines")) {
                if (!s["sines"].is_array()) fail(where + ".sines", "expected [[amplitude, frequency], ...]");
                for (const json& e : s["sines"]) {
                    if (!e.is_array() || e.size() != 2) fail(where + ".sines", "expected [amplitude, frequency] pairs");
                    shape->sines.push_back({number(e[0], where + ".sines"), number(e[1], where + ".sines")});
                }
            }
            if (s.contains("sine_products")) {
                if (!s["sine_products"].is_array()) fail(where + ".sine_products", "expected [[a, f1, f2], ...]");
                for (const json& e : s["sine_products"]) {
                    if (!e.is_array() || e.size() != 3) fail(where + ".sine_products", "expected [a, f1, f2] triples");
                    shape->sine_products.push_back({number(e[0], where + ".sine_products"),
                                                    number(e[1], where + ".sine_products"),
                                                    number(e[2], where + ".sine_products")});
                }
            }
            for (const char* key : {"theta0", "theta1"}) {
                if (!s.contains(key)) fail(where + "." + key, "missing");
            }
            const double t0 = number(s["theta0"], where + ".theta0");
            const double t1 = number(s["theta1"], where + ".theta1");
            if (t0 == t1) fail(where + ".theta1", "must differ from theta0");
            out.push_back(CurveSegment::trig_radial(shape, t0, t1));
            out.back().corner_start = flag(s, "corner_start", where, false);
            out.back().corner_end = flag(s, "corner_end", where, false);
        } else {
            fail(where + ".type", "expected polyline, arc or trig_radial");
        }
    }
    return out;
}

void check_k(const std::vector<double>& k) {
    for (double v : k) {
        if (!(v > 0.0) || !std::isfinite(v) || v > 1e4) fail("k", "wavenumbers must lie in (0, 1e4]");
    }
}

void check_n_mid(const RunConfig& cfg) {
    if (cfg.n_mid_per_k > 0.0) return;
    if (cfg.n_mid.size() != 1 && cfg.n_mid.size() != cfg.k.size()) {
        fail("n_mid", "an array must have one entry per wavenumber");
    }
}

void check_angles(const std::vector<double>& a) {
    for (double v : a) {
        if (!(v > 0.0 && v < 180.0)) fail("angles", "incidence angles must lie strictly between 0 and 180 degrees");
    }
}

std::vector<double> equispaced_degrees(long long n) {
    std::vector<double> out;
    for (double r : default_angles(static_cast<std::size_t>(n))) out.push_back(r * 180.0 / kPi);
    return out;
}

json config_json(const RunConfig& c, const json& geometry) {
    json j;
    j["geometry"] = geometry;
    j["k"] = c.k;
    j["p"] = c.p;
    j["n_corner"] = c.n_corner;
    j["n_mid"] = c.n_mid;
    j["n_mid_per_k"] = c.n_mid_per_k;
    j["dome"] = {{"center", {c.dome.center.x, c.dome.center.y}}, {"radius", c.dome.radius}};
    j["aca_tol"] = c.aca_tol;
    j["leaf_size"] = c.leaf_size;
    j["dense_cap"] = c.dense_cap;
    j["solver"] = c.solver == SolverKind::Dense ? "dense" : c.solver == SolverKind::Auto ? "auto" : "hodlr";
    j["reflection_sign"] = c.reflection_sign;
    j["near_factor"] = c.near_factor;
    j["source"] = {c.source.x, c.source.y};
    j["interior_points"] = c.interior_points;
    j["exterior_points"] = c.exterior_points;
    j["error_threshold"] = c.error_threshold;
    if (c.angle_count > 0) j["angles"] = c.angle_count;
    else j["angles"] = c.angles_deg;
    j["theta"] = c.theta_deg;
    j["mode"] = c.mode == FieldMode::Validation ? "validation" : "scattering";
    j["grid"] = {{"x", {c.grid.x0, c.grid.x1}}, {"y", {c.grid.y0, c.grid.y1}}, {"nx", c.grid.nx}, {"ny", c.grid.ny}};
    j["timing_columns"] = c.timing_columns;
    j["threads"] = c.threads;
    return j;
}

// The geometry entry as given, so custom segment lists echo verbatim.
json geometry_echo(const RunConfig& c) {
    if (c.custom_gamma.empty()) return c.geometry;
    return json::parse(c.echo).at("geometry");
}

void refresh_echo(RunConfig& c) { c.echo = config_json(c, geometry_echo(c)).dump(); }

}  // namespace

int RunConfig::n_mid_for(std::size_t k_index) const {
    if (n_mid_per_k > 0.0) return std::max(2, static_cast<int>(std::ceil(n_mid_per_k * k.at(k_index) - 1e-9)));
    return n_mid.size() == 1 ? n_mid.front() : n_mid.at(k_index);
}

Discretization RunConfig::discretization(std::size_t k_index) const {
    Discretization d;
    d.mesh.n_mid = n_mid_for(k_index);
    d.mesh.n_corner = n_corner;
    d.mesh.p = p;
    d.mesh.wavenumber = k.at(k_index);
    d.assembly.near_factor = near_factor;
    d.hodlr.leaf_size = leaf_size;
    d.hodlr.tol = aca_tol;
    d.solver = solver;
    d.dense_cap = dense_cap;
    return d;
}

SceneGeometry RunConfig::scene() const {
    if (custom_gamma.empty()) return build_preset(geometry, dome);
    return SceneGeometry(geometry, custom_gamma, dome);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    check_keys(j, "", {"geometry", "k", "p", "n_mid", "n_mid_per_k", "n_corner", "dome", "aca_tol", "leaf_size",
                       "dense_cap", "solver", "reflection_sign", "near_factor", "source", "interior_points",
                       "exterior_points", "error_threshold", "angles", "theta", "mode", "grid", "timing_columns",
                       "threads"});

    RunConfig c;
    json geometry = "pot";
    if (j.contains("geometry")) {
        geometry = j["geometry"];
        if (geometry.is_string()) {
            c.geometry = geometry.get<std::string>();
            if (c.geometry != "pot" && c.geometry != "engine" && c.geometry != "rough") {
                fail("geometry", "unknown preset '" + c.geometry + "' (expected pot, engine or rough)");
            }
        } else if (geometry.is_object()) {
            c.custom_gamma = parse_custom_geometry(geometry, c.geometry);
        } else {
            fail("geometry", "expected a preset name or a segment list");
        }
    }
    if (j.contains("k")) {
        c.k.clear();
        if (j["k"].is_array()) {
            for (const json& v : j["k"]) c.k.push_back(number(v, "k"));
        } else {
            c.k.push_back(number(j["k"], "k"));
        }
        check_k(c.k);
    }
    if (j.contains("p")) c.p = static_cast<int>(integer(j["p"], "p", 4, 32));
    if (j.contains("n_corner")) c.n_corner = static_cast<int>(integer(j["n_corner"], "n_corner", 0, 40));
    if (j.contains("n_mid")) {
        const json& v = j["n_mid"];
        c.n_mid.clear();
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") fail("n_mid", "expected an integer, an array or \"auto\"");
            c.n_mid.push_back(0);
        } else if (v.is_array()) {
            for (const json& e : v) c.n_mid.push_back(static_cast<int>(integer(e, "n_mid", 1, 100000)));
            if (c.n_mid.empty()) fail("n_mid", "array must not be empty");
        } else {
            c.n_mid.push_back(static_cast<int>(integer(v, "n_mid", 1, 100000)));
        }
    }
    if (j.contains("n_mid_per_k")) {
        c.n_mid_per_k = number(j["n_mid_per_k"], "n_mid_per_k");
        if (c.n_mid_per_k < 0.0) fail("n_mid_per_k", "must be non-negative");
    }
    check_n_mid(c);
    if (j.contains("dome")) {
        const json& d = j["dome"];
        if (!d.is_object()) fail("dome", "expected {\"center\": [x1, 0], \"radius\": r}");
        check_keys(d, "dome", {"center", "radius"});
        if (d.contains("center")) c.dome.center = point(d["center"], "dome.center");
        if (d.contains("radius")) c.dome.radius = number(d["radius"], "dome.radius");
        if (c.dome.center.y != 0.0) fail("dome.center", "the centre must lie on the ground line x2 = 0");
        if (!(c.dome.radius > 0.0)) fail("dome.radius", "must be positive");
    }
    if (j.contains("aca_tol")) {
        c.aca_tol = number(j["aca_tol"], "aca_tol");
        if (!(c.aca_tol >= 1e-14 && c.aca_tol <= 1e-2)) fail("aca_tol", "must lie in [1e-14, 1e-2]");
    }
    if (j.contains("leaf_size")) c.leaf_size = static_cast<std::size_t>(integer(j["leaf_size"], "leaf_size", 8, 100000));
    if (j.contains("dense_cap")) c.dense_cap = static_cast<std::size_t>(integer(j["dense_cap"], "dense_cap", 1, 100000));
    if (j.contains("solver")) {
        const std::string s = j["solver"].is_string() ? j["solver"].get<std::string>() : "";
        if (s == "hodlr") c.solver = SolverKind::Hodlr;
        else if (s == "dense") c.solver = SolverKind::Dense;
        else if (s == "auto") c.solver = SolverKind::Auto;
        else fail("solver", "expected hodlr, dense or auto");
    }
    if (j.contains("reflection_sign")) {
        c.reflection_sign = number(j["reflection_sign"], "reflection_sign");
        if (c.reflection_sign != 1.0 && c.reflection_sign != -1.0) fail("reflection_sign", "must be 1 or -1");
    }
    if (j.contains("near_factor")) {
        c.near_factor = number(j["near_factor"], "near_factor");
        if (!(c.near_factor > 0.0 && c.near_factor <= 10.0)) fail("near_factor", "must lie in (0, 10]");
    }
    if (j.contains("source")) {
        c.source = point(j["source"], "source");
        if (!(c.source.y > 0.0)) fail("source", "must lie above the ground line");
    }
    if (!(norm(c.source - c.dome.center) > c.dome.radius)) fail("source", "must lie outside the dome");
    if (j.contains("interior_points")) {
        c.interior_points = static_cast<std::size_t>(integer(j["interior_points"], "interior_points", 1, 100000));
    }
    if (j.contains("exterior_points")) {
        c.exterior_points = static_cast<std::size_t>(integer(j["exterior_points"], "exterior_points", 1, 100000));
    }
    if (j.contains("error_threshold")) {
        c.error_threshold = number(j["error_threshold"], "error_threshold");
        if (!(c.error_threshold > 0.0)) fail("error_threshold", "must be positive");
    }
    if (j.contains("angles")) {
        const json& a = j["angles"];
        if (a.is_array()) {
            for (const json& v : a) c.angles_deg.push_back(number(v, "angles"));
            c.angle_count = 0;
        } else {
            c.angle_count = static_cast<std::size_t>(integer(a, "angles", 1, 1000000));
            c.angles_deg = equispaced_degrees(static_cast<long long>(c.angle_count));
        }
        check_angles(c.angles_deg);
    } else {
        c.angles_deg = equispaced_degrees(360);
    }
    if (j.contains("theta")) {
        c.theta_deg = number(j["theta"], "theta");
        if (!(c.theta_deg > 0.0 && c.theta_deg < 180.0)) fail("theta", "must lie strictly between 0 and 180 degrees");
    }
    if (j.contains("mode")) {
        const std::string m = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
        if (m == "scattering") c.mode = FieldMode::Scattering;
        else if (m == "validation") c.mode = FieldMode::Validation;
        else fail("mode", "expected scattering or validation");
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) fail("grid", "expected {\"x\": [a, b], \"y\": [a, b], \"nx\": n, \"ny\": n}");
        check_keys(g, "grid", {"x", "y", "nx", "ny"});
        if (g.contains("x")) {
            const auto x = interval(g["x"], "grid.x");
            c.grid.x0 = x[0];
            c.grid.x1 = x[1];
        }
        if (g.contains("y")) {
            const auto y = interval(g["y"], "grid.y");
            c.grid.y0 = y[0];
            c.grid.y1 = y[1];
        }
        if (g.contains("nx")) c.grid.nx = static_cast<int>(integer(g["nx"], "grid.nx", 1, 10000));
        if (g.contains("ny")) c.grid.ny = static_cast<int>(integer(g["ny"], "grid.ny", 1, 10000));
    }
    if (j.contains("timing_columns")) {
        if (!j["timing_columns"].is_boolean()) fail("timing_columns", "expected true or false");
        c.timing_columns = j["timing_columns"].get<bool>();
    }
    if (j.contains("threads")) c.threads = static_cast<int>(integer(j["threads"], "threads", 0, 1024));

    c.echo = config_json(c, geometry).dump();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("'" + item + "' is not a number");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw ConfigError("'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_angles(const std::string& text) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
        if (text.size() > 7 || std::stoll(text) < 1) throw ConfigError("angle count must lie in [1, 1000000]");
        return equispaced_degrees(std::stoll(text));
    }
    return parse_number_list(text);
}

void override_k(RunConfig& cfg, const std::vector<double>& k) {
    check_k(k);
    cfg.k = k;
    check_n_mid(cfg);
    refresh_echo(cfg);
}

void override_angles(RunConfig& cfg, const std::string& text) {
    const bool count = !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
    cfg.angles_deg = parse_angles(text);
    check_angles(cfg.angles_deg);
    cfg.angle_count = count ? cfg.angles_deg.size() : 0;
    refresh_echo(cfg);
}

}  // namespace cavity::cli
