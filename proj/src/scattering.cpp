#include "cavity/scattering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cavity {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr cplx kI{0.0, 1.0};

double radical_inverse(std::size_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

}  // namespace

ScatteringSolver::ScatteringSolver(const SceneGeometry& scene, const WaveContext& ctx,
                                   const Discretization& disc) {
    if (const auto v = validate_scene(scene); !v.empty()) {
        throw GeometryError("invalid scene (" + v.front().code + "): " + v.front().message);
    }
    const auto start = Clock::now();
    mesh_ = std::make_shared<const Mesh>(generate_mesh(scene, disc.mesh));
    op_ = std::make_unique<SystemOperator>(*mesh_, ctx, disc.assembly);
    const std::size_t n = op_->size();

    kind_ = disc.solver;
    if (kind_ == SolverKind::Auto) kind_ = n <= 2 * disc.hodlr.leaf_size ? SolverKind::Dense : SolverKind::Hodlr;
    if (kind_ == SolverKind::Dense) {
        dense_ = assemble_dense(*op_, disc.dense_cap);
        dense_lu_.compute(dense_);
        if (!(dense_lu_.rcond() > 1e-14)) throw SolverError("dense system matrix is numerically singular");
    } else {
        const SystemOperator* op = op_.get();
        hodlr_.emplace(HodlrMatrix::build([op](std::size_t i, std::size_t j) { return op->entry(i, j); }, n,
                                          disc.hodlr));
        factor_ = std::make_unique<HodlrFactorization>(*hodlr_);
    }
    t_factor_ = seconds_since(start);
}

Eigen::VectorXcd ScatteringSolver::solve_scaled(const Eigen::VectorXcd& b) const {
    if (static_cast<std::size_t>(b.size()) != op_->size()) throw SolverError("right-hand side has the wrong size");
    if (kind_ == SolverKind::Dense) return dense_lu_.solve(b);
    return factor_->solve(b);
}

Eigen::MatrixXcd ScatteringSolver::solve_scaled(const Eigen::MatrixXcd& b) const {
    if (static_cast<std::size_t>(b.rows()) != op_->size()) throw SolverError("right-hand side has the wrong size");
    if (kind_ == SolverKind::Dense) return dense_lu_.solve(b);
    return factor_->solve(b);
}

Eigen::VectorXcd ScatteringSolver::apply(const Eigen::VectorXcd& x) const {
    if (kind_ == SolverKind::Dense) return dense_ * x;
    return hodlr_->matvec(x);
}

DensitySolution ScatteringSolver::unscale(const Eigen::VectorXcd& x) const {
    const auto& lay = op_->layout();
    const Eigen::VectorXcd phys = x.cwiseQuotient(op_->sqrt_weights().cast<cplx>());
    const auto n1 = static_cast<Index>(lay.gamma1_nodes);
    DensitySolution s;
    s.mesh = mesh_;
    s.k = op_->wavenumber();
    s.mu_gamma1 = phys.head(n1);
    s.sigma_gamma1 = phys.segment(n1, n1);
    s.mu_bgamma = phys.tail(static_cast<Index>(lay.bgamma_nodes));
    return s;
}

DensitySolution ScatteringSolver::solve(const RightHandSide& rhs, SolveReport* report) const {
    const auto start = Clock::now();
    const Eigen::VectorXcd x = solve_scaled(rhs.values);
    const double t = seconds_since(start);
    if (!x.allFinite()) throw SolverError("solution is not finite");
    if (report) {
        report->n_tot = op_->size();
        report->t_factor = t_factor_;
        report->t_solve = t;
        const double bn = rhs.values.norm();
        report->residual = bn > 0.0 ? (apply(x) - rhs.values).norm() / bn : x.norm();
    }
    return unscale(x);
}

std::pair<DensitySolution, SolveReport> solve_densities(const SceneGeometry& scene, const WaveContext& ctx,
                                                        const Discretization& disc, const RightHandSide& rhs) {
    ScatteringSolver solver(scene, ctx, disc);
    SolveReport report;
    DensitySolution sol = solver.solve(rhs, &report);
    return {std::move(sol), report};
}

cplx eval_scattered_field(const DensitySolution& sol, Point2 x, RegionLabel region) {
    if (region != RegionLabel::Omega1 && region != RegionLabel::ExteriorUpper) {
        throw GeometryError("field evaluation needs a point in Omega1 or above the ground outside it");
    }
    const Mesh& m = *sol.mesh;
    const WaveContext ctx(sol.k);
    const bool interior = region == RegionLabel::Omega1;
    const Vec2 unused{0.0, 0.0};
    cplx u = 0.0;
    for (std::size_t node = 0; node < m.node_count(); ++node) {
        const Point2 y = m.x[node];
        const Vec2 ny = m.normal[node];
        if (node < m.gamma1_nodes) {
            const auto i = static_cast<Index>(node);
            u += m.w[node] * (kernel(ctx, KernelKind::S, KernelSpace::Half, x, unused, y, ny) * sol.sigma_gamma1[i] +
                              kernel(ctx, KernelKind::D, KernelSpace::Half, x, unused, y, ny) * sol.mu_gamma1[i]);
            continue;
        }
        const Component c = m.panels[m.node_panel[node]].component;
        if (c == Component::Gamma && !interior) continue;
        const auto i = static_cast<Index>(node - m.gamma1_nodes);
        u += m.w[node] * kernel(ctx, KernelKind::D, KernelSpace::Free, x, unused, y, ny) * sol.mu_bgamma[i];
    }
    return u;
}

cplx eval_scattered_field(const SceneGeometry& scene, const DensitySolution& sol, Point2 x) {
    const RegionLabel region = classify_point(scene, x);
    if (region == RegionLabel::OnBoundary) throw GeometryError("field evaluation point lies on the boundary");
    if (region == RegionLabel::BelowGround) throw GeometryError("field evaluation point lies below the ground");
    return eval_scattered_field(sol, x, region);
}

cplx far_field(const DensitySolution& sol, double theta_out) {
    if (!(theta_out > 0.0 && theta_out < kPi)) throw ConfigError("far-field angle must lie in (0, pi)");
    const Mesh& m = *sol.mesh;
    const double k = sol.k;
    const Vec2 xh{std::cos(theta_out), std::sin(theta_out)};
    // Phi(x, y) ~ C exp(ik|x|)/sqrt|x| exp(-ik xh.y)
    const cplx c = 0.25 * kI * std::sqrt(2.0 / (kPi * k)) * std::exp(-0.25 * kI * kPi);
    auto plane = [&](Point2 y) { return std::exp(-kI * k * dot(xh, y)); };
    cplx acc = 0.0;
    for (std::size_t node = 0; node < m.node_count(); ++node) {
        const Point2 y = m.x[node];
        const Vec2 ny = m.normal[node];
        if (node < m.gamma1_nodes) {
            const auto i = static_cast<Index>(node);
            const cplx e = plane(y), ei = plane(mirror(y));
            acc += m.w[node] * (sol.sigma_gamma1[i] * (e - ei) +
                                sol.mu_gamma1[i] * (-kI * k) * (dot(xh, ny) * e - dot(xh, mirror(ny)) * ei));
            continue;
        }
        if (m.panels[m.node_panel[node]].component == Component::Gamma) continue;
        const auto i = static_cast<Index>(node - m.gamma1_nodes);
        acc += m.w[node] * sol.mu_bgamma[i] * (-kI * k) * dot(xh, ny) * plane(y);
    }
    return c * acc;
}

double rcs_db(double rcs) {
    if (!(rcs > 0.0)) return -300.0;
    return std::max(-300.0, 10.0 * std::log10(rcs));
}

std::vector<double> default_angles(std::size_t n) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (static_cast<double>(i) + 0.5) * kPi / static_cast<double>(n);
    return a;
}

FarField backscatter_rcs(const ScatteringSolver& solver, const std::vector<double>& angles,
                         double reflection_sign) {
    FarField ff;
    ff.angles = angles;
    if (angles.empty()) return ff;
    Eigen::MatrixXcd b(static_cast<Index>(solver.op().size()), static_cast<Index>(angles.size()));
    for (std::size_t a = 0; a < angles.size(); ++a) {
        b.col(static_cast<Index>(a)) = rhs_scattering(solver.op(), angles[a], reflection_sign).values;
    }
    const auto start = Clock::now();
    const Eigen::MatrixXcd x = solver.solve_scaled(b);
    ff.t_solve_total = seconds_since(start);
    if (!x.allFinite()) throw SolverError("solution is not finite");
    for (std::size_t a = 0; a < angles.size(); ++a) {
        const DensitySolution sol = solver.unscale(x.col(static_cast<Index>(a)));
        const cplx u = far_field(sol, kPi - angles[a]);
        const double rcs = 4.0 / sol.k * std::norm(u);
        ff.pattern.push_back(u);
        ff.rcs.push_back(rcs);
        ff.db.push_back(rcs_db(rcs));
    }
    return ff;
}

std::vector<Point2> sample_points(const SceneGeometry& scene, const Mesh& mesh, RegionLabel region,
                                  std::size_t count) {
    double h_min = std::numeric_limits<double>::infinity();
    for (const Panel& p : mesh.panels) h_min = std::min(h_min, p.length);

    // Bounding box of the region to sample.
    const auto& poly = scene.polygon();
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (const Point2& q : poly) {
        x0 = std::min(x0, q.x);
        x1 = std::max(x1, q.x);
        y0 = std::min(y0, q.y);
        y1 = std::max(y1, q.y);
    }
    if (region == RegionLabel::ExteriorUpper) {
        const DomeSpec& d = scene.dome();
        x0 = d.center.x - 2.0 * d.radius;
        x1 = d.center.x + 2.0 * d.radius;
        y0 = 0.0;
        y1 = std::max(y1, 0.0) + d.radius;
    }

    std::vector<Point2> out;
    const std::size_t max_tries = 200000;
    for (std::size_t i = 1; i <= max_tries && out.size() < count; ++i) {
        const Point2 q{x0 + (x1 - x0) * radical_inverse(i, 2), y0 + (y1 - y0) * radical_inverse(i, 3)};
        if (classify_point(scene, q) != region) continue;
        bool ok = true;
        for (std::size_t j = 0; j < mesh.panel_count() && ok; ++j) {
            const Panel& p = mesh.panels[j];
            const double keep_out = std::max(2.0 * h_min, p.length);
            if (norm(q - p.center) - p.radius >= keep_out) continue;
            ok = mesh.distance_to_panel(q, j) >= keep_out;
        }
        if (ok) out.push_back(q);
    }
    if (out.size() < count) {
        throw CavityError("found only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                          " sample points in region " + to_string(region));
    }
    return out;
}

bool near_boundary(const Mesh& mesh, Point2 q, double factor) {
    for (std::size_t j = 0; j < mesh.panel_count(); ++j) {
        const Panel& p = mesh.panels[j];
        const double reach = factor * p.length;
        if (norm(q - p.center) - p.radius >= reach) continue;
        if (mesh.distance_to_panel(q, j) < reach) return true;
    }
    return false;
}

SolveReport validate_point_source(const SceneGeometry& scene, const WaveContext& ctx,
                                  const Discretization& disc, Point2 x0, std::size_t interior_points,
                                  std::size_t exterior_points) {
    const ScatteringSolver solver(scene, ctx, disc);
    SolveReport report;
    const DensitySolution sol = solver.solve(rhs_validation(scene, solver.op(), x0), &report);
    const PointSourcePair src{x0};

    double err_sum = 0.0, u_max = 0.0;
    const auto inner = sample_points(scene, solver.mesh(), RegionLabel::Omega1, interior_points);
    for (const Point2& q : inner) {
        const cplx exact = src.value(ctx.k, q);
        err_sum += std::abs(eval_scattered_field(sol, q, RegionLabel::Omega1) - exact) / std::abs(exact);
        u_max = std::max(u_max, std::abs(exact));
    }
    report.e_error = inner.empty() ? 0.0 : err_sum / static_cast<double>(inner.size());

    double ext_max = 0.0;
    for (const Point2& q : sample_points(scene, solver.mesh(), RegionLabel::ExteriorUpper, exterior_points)) {
        ext_max = std::max(ext_max, std::abs(eval_scattered_field(sol, q, RegionLabel::ExteriorUpper)));
    }
    report.exterior_max = u_max > 0.0 ? ext_max / u_max : ext_max;
    return report;
}

}  // namespace cavity
