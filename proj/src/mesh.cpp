#include "cavity/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cavity/quadrature.hpp"

namespace cavity {

const char* to_string(PairClass c) {
    switch (c) {
        case PairClass::Self: return "self";
        case PairClass::Adjacent: return "adjacent";
        case PairClass::Near: return "near";
        case PairClass::Far: return "far";
    }
    return "?";
}

std::vector<double> panel_breaks(int n_mid, int n_corner, bool corner_start, bool corner_end) {
    if (n_mid < 1) throw ConfigError("n_mid must be at least 1");
    if (n_corner < 0) throw ConfigError("n_corner must be non-negative");
    std::vector<double> mid;
    if (n_mid == 1 && corner_start && corner_end && n_corner > 0) {
        mid = {0.0, 0.5, 1.0};
    } else {
        for (int i = 0; i <= n_mid; ++i) mid.push_back(static_cast<double>(i) / n_mid);
    }
    std::vector<double> out;
    const std::size_t last = mid.size() - 1;
    if (corner_start && n_corner > 0) {
        const double len = mid[1];
        out.push_back(0.0);
        for (int l = n_corner; l >= 1; --l) out.push_back(std::ldexp(len, -l));
    } else {
        out.push_back(0.0);
    }
    for (std::size_t i = 1; i < last; ++i) out.push_back(mid[i]);
    if (corner_end && n_corner > 0) {
        const double len = 1.0 - mid[last - 1];
        for (int l = 1; l <= n_corner; ++l) out.push_back(1.0 - std::ldexp(len, -l));
    }
    out.push_back(1.0);
    return out;
}

int auto_panel_count(double length, double wavenumber, int p) {
    if (!(wavenumber > 0.0)) throw ConfigError("automatic n_mid needs a positive wavenumber");
    const double wavelength = 2.0 * kPi / wavenumber;
    const double target = (p / 50.0) * wavelength;
    return std::max(1, static_cast<int>(std::ceil(length / target - 1e-9)));
}

std::optional<Junction> Mesh::junction(std::size_t seg_a, std::size_t seg_b) const {
    return junctions_[seg_a][seg_b];
}

Vec2 Mesh::separation(std::size_t node, std::size_t seg, double ty) const {
    const std::size_t sa = panels[node_panel[node]].segment;
    const CurveSegment& cb = segments[seg].curve;
    if (sa == seg) return cb.chord(t[node], ty);
    if (const auto& j = junctions_[sa][seg]) {
        const CurveSegment& ca = segments[sa].curve;
        return ca.chord(t[node], j->end_a) - cb.chord(ty, j->end_b);
    }
    return x[node] - cb.point(ty);
}

double Mesh::distance_to_panel(Point2 q, std::size_t j) const {
    const Panel& pan = panels[j];
    const CurveSegment& c = segments[pan.segment].curve;
    const int n = 4 * p;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double tt = pan.t0 + (pan.t1 - pan.t0) * i / n;
        best = std::min(best, norm(c.point(tt) - q));
    }
    return best;
}

namespace {

bool touches(const Panel& a, const Panel& b, const Mesh& m) {
    if (a.segment == b.segment) {
        return a.t1 == b.t0 || b.t1 == a.t0;
    }
    const auto j = m.junction(a.segment, b.segment);
    if (!j) return false;
    const bool a_end = (j->end_a == 0.0) ? a.t0 == 0.0 : a.t1 == 1.0;
    const bool b_end = (j->end_b == 0.0) ? b.t0 == 0.0 : b.t1 == 1.0;
    return a_end && b_end;
}

}  // namespace

PairClass Mesh::classify_pair(std::size_t target, std::size_t source, double near_factor,
                              bool image) const {
    if (target == source) return PairClass::Self;
    const Panel& a = panels[target];
    const Panel& b = panels[source];
    if (touches(a, b, *this)) return PairClass::Adjacent;

    const double reach = near_factor * b.length;
    auto near_to = [&](bool mirrored) {
        const Point2 cb = mirrored ? mirror(b.center) : b.center;
        if (norm(a.center - cb) - a.radius - b.radius > reach) return false;
        for (int m = 0; m < p; ++m) {
            const Point2 q = x[a.first_node + m];
            if (distance_to_panel(mirrored ? mirror(q) : q, source) < reach) return true;
        }
        return false;
    };
    if (near_to(false)) return PairClass::Near;
    if (image && near_to(true)) return PairClass::Near;
    return PairClass::Far;
}

std::vector<std::pair<std::size_t, PairClass>> Mesh::neighbours(std::size_t target, double near_factor,
                                                                bool image_for_gamma1) const {
    std::vector<std::pair<std::size_t, PairClass>> out;
    for (std::size_t s = 0; s < panels.size(); ++s) {
        const bool image = image_for_gamma1 && panels[s].component == Component::Gamma1;
        const PairClass c = classify_pair(target, s, near_factor, image);
        if (c != PairClass::Far) out.emplace_back(s, c);
    }
    return out;
}

Mesh generate_mesh(const SceneGeometry& scene, const MeshParams& params) {
    if (params.p < 4 || params.p > 32) {
        throw ConfigError("p must be in [4, 32], got " + std::to_string(params.p));
    }
    if (params.n_mid < 0) throw ConfigError("n_mid must be positive (or 0 for automatic)");
    if (params.n_corner < 0 || params.n_corner > 40) {
        throw ConfigError("n_corner must be in [0, 40], got " + std::to_string(params.n_corner));
    }

    Mesh mesh;
    mesh.params = params;
    mesh.p = params.p;
    mesh.diameter = scene.diameter();
    const auto& rule = gauss_legendre(params.p);
    mesh.ref_nodes = rule.nodes;
    mesh.ref_weights = rule.weights;
    mesh.bary = barycentric_weights(rule.nodes);

    // Gamma1 first, then the rest of the loop in order.
    const auto lp = scene.loop();
    mesh.segments.push_back({*lp.back().second, Component::Gamma1});
    for (std::size_t i = 0; i + 1 < lp.size(); ++i) {
        mesh.segments.push_back({*lp[i].second, lp[i].first});
    }

    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        MeshSegment& ms = mesh.segments[s];
        const CurveSegment& c = ms.curve;
        const int n_mid = params.n_mid > 0 ? params.n_mid
                                           : auto_panel_count(c.length(), params.wavenumber, params.p);
        const auto br = panel_breaks(n_mid, params.n_corner, c.corner_start, c.corner_end);
        ms.first_panel = mesh.panels.size();
        ms.panel_count = br.size() - 1;
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            Panel pan;
            pan.segment = s;
            pan.component = ms.component;
            pan.t0 = br[i];
            pan.t1 = br[i + 1];
            pan.first_node = mesh.x.size();
            const double half = 0.5 * (pan.t1 - pan.t0);
            double len = 0.0;
            for (int q = 0; q < params.p; ++q) {
                const double tt = pan.t0 + half * (rule.nodes[q] + 1.0);
                const double sp = c.speed(tt);
                mesh.x.push_back(c.point(tt));
                mesh.normal.push_back(c.normal(tt));
                mesh.t.push_back(tt);
                mesh.speed.push_back(sp);
                mesh.w.push_back(half * rule.weights[q] * sp);
                mesh.node_panel.push_back(mesh.panels.size());
                len += mesh.w.back();
            }
            pan.length = len;

            // Bounding circle from a sampling that includes the endpoints.
            std::vector<Point2> pts;
            for (int q = 0; q <= 2 * params.p; ++q) pts.push_back(c.point(pan.t0 + (pan.t1 - pan.t0) * q / (2.0 * params.p)));
            double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
            for (const auto& q : pts) {
                x0 = std::min(x0, q.x);
                x1 = std::max(x1, q.x);
                y0 = std::min(y0, q.y);
                y1 = std::max(y1, q.y);
            }
            pan.center = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
            for (const auto& q : pts) pan.radius = std::max(pan.radius, norm(q - pan.center));
            // Sampling can miss a bulge between samples; pad by a fraction of the length.
            pan.radius += 0.05 * len;
            mesh.panels.push_back(pan);
        }
        if (ms.component == Component::Gamma1) mesh.gamma1_nodes = mesh.x.size();
    }

    const std::size_t ns = mesh.segments.size();
    const double tol = 1e-12 * std::max(1.0, mesh.diameter);
    mesh.junctions_.assign(ns, std::vector<std::optional<Junction>>(ns));
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ns; ++b) {
            if (a == b) continue;
            const auto& ca = mesh.segments[a].curve;
            const auto& cb = mesh.segments[b].curve;
            for (double ea : {0.0, 1.0}) {
                for (double eb : {0.0, 1.0}) {
                    if (!mesh.junctions_[a][b] && norm(ca.point(ea) - cb.point(eb)) <= tol) {
                        mesh.junctions_[a][b] = Junction{ea, eb};
                    }
                }
            }
        }
    }
    return mesh;
}

// ---------------------------------------------------------------- corrected blocks

std::vector<Eigen::MatrixXcd> panel_blocks(const Mesh& mesh, double k, std::size_t target,
                                           std::size_t source, PairClass cls,
                                           std::span<const KernelTerm> terms, double rel_tol) {
    const int p = mesh.p;
    const int nt = static_cast<int>(terms.size());
    const Panel& tp = mesh.panels[target];
    const Panel& sp = mesh.panels[source];
    const CurveSegment& curve = mesh.segments[sp.segment].curve;
    const double half = 0.5 * (sp.t1 - sp.t0);

    std::vector<Eigen::MatrixXcd> out(nt, Eigen::MatrixXcd::Zero(p, p));
    AdaptiveOptions opts;
    opts.rel_tol = rel_tol;
    // (x - y).n_y loses its leading digits as y -> x, leaving D and T with
    // roundoff of about eps/|x - y|. Each graded piece then carries an O(eps)
    // error that no refinement removes, so the tolerance needs an absolute floor.
    opts.abs_tol = 1e-15;

    // Which source end is shared with the target panel (adjacent pairs).
    bool sing_lo = false, sing_hi = false;
    if (cls == PairClass::Adjacent) {
        const CurveSegment& tc = mesh.segments[tp.segment].curve;
        const double tol = 1e-12 * std::max(1.0, mesh.diameter);
        const Point2 s0 = curve.point(sp.t0), s1 = curve.point(sp.t1);
        const Point2 a0 = tc.point(tp.t0), a1 = tc.point(tp.t1);
        sing_lo = norm(s0 - a0) <= tol || norm(s0 - a1) <= tol;
        sing_hi = !sing_lo && (norm(s1 - a0) <= tol || norm(s1 - a1) <= tol);
    }

    std::vector<double> basis(p);
    for (int m = 0; m < p; ++m) {
        const std::size_t node = tp.first_node + m;
        const Point2 xm = mesh.x[node];
        const Vec2 nx = mesh.normal[node];
        VectorIntegrand f = [&](double u, Eigen::Ref<Eigen::VectorXcd> v) {
            const double tt = sp.t0 + half * (u + 1.0);
            const Vec2 dy = curve.derivative(tt);
            const double speed = norm(dy);
            const Vec2 ny = rot_cw(dy) / speed;  // mesh segments are never mirrored copies
            const Vec2 d = mesh.separation(node, sp.segment, tt);
            if (d.x == 0.0 && d.y == 0.0) {
                // u rounded onto the target node; the graded Jacobian makes this point negligible.
                v.setZero();
                return;
            }
            lagrange_basis(mesh.ref_nodes, mesh.bary, u, basis.data());
            const double jac = speed * half;
            for (int q = 0; q < nt; ++q) {
                cplx kv = kernel_from_separation(k, terms[q].kind, d, nx, ny);
                if (terms[q].space == KernelSpace::Half) {
                    const Point2 y = curve.point(tt);
                    kv -= kernel_from_separation(k, terms[q].kind, xm - mirror(y), nx, mirror(ny));
                }
                kv *= jac;
                for (int j = 0; j < p; ++j) v[q * p + j] = kv * basis[j];
            }
        };

        Eigen::VectorXcd total;
        if (cls == PairClass::Self) {
            const double um = mesh.ref_nodes[m];
            total = adaptive_integrate(f, nt * p, -1.0, um, false, true, opts) +
                    adaptive_integrate(f, nt * p, um, 1.0, true, false, opts);
        } else if (cls == PairClass::Adjacent) {
            total = adaptive_integrate(f, nt * p, -1.0, 1.0, sing_lo, sing_hi, opts);
        } else {
            // Split at the closest source point.
            // Half-space terms are also nearly singular where the target
            // approaches the source's mirror image.
            const bool any_half = std::any_of(terms.begin(), terms.end(),
                                              [](const KernelTerm& kt) { return kt.space == KernelSpace::Half; });
            const int ns = 8 * p;
            double best = std::numeric_limits<double>::infinity(), ustar = 0.0;
            for (int i = 0; i <= ns; ++i) {
                const double u = -1.0 + 2.0 * i / ns;
                const double tt = sp.t0 + half * (u + 1.0);
                double dist = norm(mesh.separation(node, sp.segment, tt));
                if (any_half) dist = std::min(dist, norm(xm - mirror(curve.point(tt))));
                if (dist < best) {
                    best = dist;
                    ustar = u;
                }
            }
            // The integrand is smooth but peaked at ustar; plain bisection
            // refines only as far as the peak needs.
            if (ustar <= -1.0 || ustar >= 1.0) {
                total = adaptive_integrate(f, nt * p, -1.0, 1.0, false, false, opts);
            } else {
                total = adaptive_integrate(f, nt * p, -1.0, ustar, false, false, opts) +
                        adaptive_integrate(f, nt * p, ustar, 1.0, false, false, opts);
            }
        }
        for (int q = 0; q < nt; ++q) {
            for (int j = 0; j < p; ++j) out[q](m, j) = total[q * p + j];
        }
    }
    return out;
}

Eigen::MatrixXcd singular_block(const Mesh& mesh, double k, std::size_t panel, KernelTerm term) {
    const KernelTerm terms[] = {term};
    return panel_blocks(mesh, k, panel, panel, PairClass::Self, terms).front();
}

Eigen::MatrixXcd adjacent_block(const Mesh& mesh, double k, std::size_t target, std::size_t source,
                                KernelTerm term) {
    if (mesh.classify_pair(target, source, 0.0, false) != PairClass::Adjacent) {
        throw std::invalid_argument("adjacent_block: panels do not share an endpoint");
    }
    const KernelTerm terms[] = {term};
    return panel_blocks(mesh, k, target, source, PairClass::Adjacent, terms).front();
}

}  // namespace cavity
