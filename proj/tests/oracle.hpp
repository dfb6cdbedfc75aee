#pragma once

// Reference values for the tests, computed without the library's own Bessel
// code or quadrature rules: Boost Hankel functions, Boost Gauss-Kronrod
// subdivision, and naive dense assembly.

#include <optional>
#include <random>

#include <boost/math/special_functions/hankel.hpp>

#include "cavity/assembly.hpp"
#include "cavity/mesh.hpp"
#include "cavity/quadrature.hpp"

namespace oracle {

using cavity::cplx;
using cavity::Vec2;

inline cplx h0(double x) { return boost::math::cyl_hankel_1(0, x); }
inline cplx h1(double x) { return boost::math::cyl_hankel_1(1, x); }

/// Free-space S or D kernel from the separation d = x - y.
inline cplx free_kernel(double k, cavity::KernelKind kind, Vec2 d, Vec2 nx, Vec2 ny) {
    const double r = cavity::norm(d);
    const cplx i4{0.0, 0.25};
    switch (kind) {
        case cavity::KernelKind::S: return i4 * h0(k * r);
        case cavity::KernelKind::D: return i4 * k * h1(k * r) * cavity::dot(d, ny) / r;
        case cavity::KernelKind::N: return -i4 * k * h1(k * r) * cavity::dot(d, nx) / r;
        case cavity::KernelKind::T: {
            const cplx h2 = boost::math::cyl_hankel_1(2, k * r);
            const double dn = cavity::dot(d, nx) * cavity::dot(d, ny) / (r * r);
            return -i4 * k * (k * h2 * dn - h1(k * r) * cavity::dot(nx, ny) / r);
        }
    }
    return 0.0;
}

/// One corrected-block entry: the integral over source panel `src` of
/// K(x_node, y(t)) l_b(t) |y'(t)| dt, with l_b the Lagrange basis polynomial of
/// source node b. `sing` marks a reference coordinate in [-1, 1] to split at.
inline cplx block_entry(const cavity::Mesh& mesh, double k, std::size_t node, std::size_t src, int b,
                        cavity::KernelTerm term, std::optional<double> sing) {
    const cavity::Panel& sp = mesh.panels[src];
    const auto& curve = mesh.segments[sp.segment].curve;
    const double half = 0.5 * (sp.t1 - sp.t0);
    const Vec2 nx = mesh.normal[node];
    auto f = [&](double u) -> cplx {
        const double t = sp.t0 + half * (u + 1.0);
        const Vec2 dy = curve.derivative(t);
        const double speed = cavity::norm(dy);
        const Vec2 ny = curve.normal(t);
        const Vec2 d = mesh.separation(node, sp.segment, t);
        if (cavity::norm(d) == 0.0) return 0.0;
        double l = 1.0;
        for (int q = 0; q < mesh.p; ++q) {
            if (q != b) l *= (u - mesh.ref_nodes[q]) / (mesh.ref_nodes[b] - mesh.ref_nodes[q]);
        }
        cplx kval = free_kernel(k, term.kind, d, nx, ny);
        if (term.space == cavity::KernelSpace::Half) {
            const Vec2 di = mesh.x[node] - cavity::mirror(curve.point(t));
            kval -= free_kernel(k, term.kind, di, nx, cavity::mirror(ny));
        }
        return kval * l * speed * half;
    };
    return cavity::oracle_integrate(f, -1.0, 1.0, sing, 1e-13);
}

/// Max entrywise error of a library block against the oracle, and the max oracle magnitude.
struct BlockCheck {
    double err = 0.0;
    double scale = 0.0;
};

inline BlockCheck check_block(const cavity::Mesh& mesh, double k, std::size_t target, std::size_t source,
                              cavity::PairClass cls, cavity::KernelTerm term) {
    const cavity::KernelTerm terms[] = {term};
    const Eigen::MatrixXcd blk = cavity::panel_blocks(mesh, k, target, source, cls, terms).front();
    BlockCheck out;
    const auto& tp = mesh.panels[target];
    for (int a = 0; a < mesh.p; ++a) {
        const std::optional<double> sing =
            cls == cavity::PairClass::Self ? std::optional<double>(mesh.ref_nodes[a]) : std::nullopt;
        for (int b = 0; b < mesh.p; ++b) {
            const cplx ref = block_entry(mesh, k, tp.first_node + a, source, b, term, sing);
            out.err = std::max(out.err, std::abs(ref - blk(a, b)));
            out.scale = std::max(out.scale, std::abs(ref));
        }
    }
    return out;
}

/// Dense unscaled system matrix written out from the kernel definitions with
/// plain quadrature weights only, node by node. Entries for panel pairs that
/// need corrected blocks are left for the caller to overwrite.
inline Eigen::MatrixXcd naive_unscaled(const cavity::SystemOperator& op) {
    using cavity::Component;
    using cavity::KernelKind;
    using cavity::KernelSpace;
    const cavity::Mesh& m = op.mesh();
    const std::size_t n1 = m.gamma1_nodes;
    const std::size_t nn = m.node_count();
    const std::size_t n = 2 * n1 + (nn - n1);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<cavity::Index>(n), static_cast<cavity::Index>(n));
    auto comp = [&](std::size_t node) { return m.panels[m.node_panel[node]].component; };
    auto mu = [&](std::size_t node) { return static_cast<cavity::Index>(node < n1 ? node : node + n1); };
    auto sigma = [&](std::size_t node) { return static_cast<cavity::Index>(node + n1); };
    const cavity::WaveContext ctx(op.wavenumber());
    for (std::size_t i = 0; i < nn; ++i) {
        const Component ci = comp(i);
        if (ci == Component::Gamma1) {
            a(mu(i), mu(i)) += 1.0;
            a(sigma(i), sigma(i)) += 1.0;
        } else {
            a(mu(i), mu(i)) += -0.5;
        }
        for (std::size_t j = 0; j < nn; ++j) {
            if (i == j) continue;
            const Component cj = comp(j);
            auto K = [&](KernelKind kind, KernelSpace space) {
                return cavity::kernel(ctx, kind, space, m.x[i], m.normal[i], m.x[j], m.normal[j]) * m.w[j];
            };
            if (ci == Component::Gamma1) {
                if (cj != Component::Gamma) continue;
                a(mu(i), mu(j)) -= K(KernelKind::D, KernelSpace::Free);
                a(sigma(i), mu(j)) += K(KernelKind::T, KernelSpace::Free);
            } else if (cj == Component::Gamma1) {
                if (ci != Component::Gamma) continue;
                a(mu(i), sigma(j)) += K(KernelKind::S, KernelSpace::Half);
                a(mu(i), mu(j)) += K(KernelKind::D, KernelSpace::Half);
            } else if (ci == Component::Gamma || cj == Component::Gamma) {
                a(mu(i), mu(j)) += K(KernelKind::D, KernelSpace::Free);
            }
        }
    }
    return a;
}

}  // namespace oracle
