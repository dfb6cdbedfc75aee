#include "cavity/assembly.hpp"

#include <algorithm>
#include <chrono>
#include <exception>

#include "cavity/fields.hpp"

namespace cavity {

UnknownLayout::Slot UnknownLayout::slot(const Mesh& mesh, std::size_t i) const {
    if (i < gamma1_nodes) return {Component::Gamma1, DensityKind::Mu, i};
    if (i < 2 * gamma1_nodes) return {Component::Gamma1, DensityKind::Sigma, i - gamma1_nodes};
    const std::size_t node = i - gamma1_nodes;
    return {mesh.panels[mesh.node_panel[node]].component, DensityKind::Mu, node};
}

std::size_t UnknownLayout::index(std::size_t node, DensityKind kind) const {
    if (node < gamma1_nodes) return kind == DensityKind::Sigma ? node + gamma1_nodes : node;
    return node + gamma1_nodes;
}

UnknownLayout layout(const Mesh& mesh) {
    UnknownLayout l;
    l.gamma1_nodes = mesh.gamma1_nodes;
    l.bgamma_nodes = mesh.node_count() - mesh.gamma1_nodes;
    return l;
}

namespace {

constexpr KernelTerm kGamma1FromGamma[] = {{KernelKind::D, KernelSpace::Free},
                                           {KernelKind::T, KernelSpace::Free}};
constexpr KernelTerm kGammaFromGamma1[] = {{KernelKind::S, KernelSpace::Half},
                                           {KernelKind::D, KernelSpace::Half}};
constexpr KernelTerm kWallFromWall[] = {{KernelKind::D, KernelSpace::Free}};

// Kernels that couple a target panel on `t` to a source panel on `s`. The half-space
// kernels vanish identically on the ground strips, as does D between two strips.
std::span<const KernelTerm> pair_terms(Component t, Component s) {
    if (t == Component::Gamma1) {
        return s == Component::Gamma ? std::span<const KernelTerm>(kGamma1FromGamma)
                                     : std::span<const KernelTerm>();
    }
    if (s == Component::Gamma1) {
        return t == Component::Gamma ? std::span<const KernelTerm>(kGammaFromGamma1)
                                     : std::span<const KernelTerm>();
    }
    const bool t_strip = t != Component::Gamma;
    const bool s_strip = s != Component::Gamma;
    if (t_strip && s_strip) return {};
    return kWallFromWall;
}

}  // namespace

SystemOperator::SystemOperator(const Mesh& mesh, const WaveContext& ctx, AssemblyOptions opts)
    : mesh_(&mesh), k_(ctx.k), ctx_(ctx), layout_(cavity::layout(mesh)) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = layout_.total();
    sqrt_w_.resize(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        sqrt_w_[static_cast<Index>(i)] = std::sqrt(mesh.w[layout_.slot(mesh, i).node]);
    }

    const std::size_t np = mesh.panel_count();
    std::vector<std::vector<std::pair<std::size_t, std::vector<Eigen::MatrixXcd>>>> local(np);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < np; ++t) {
        try {
            const Component ct = mesh.panels[t].component;
            for (const auto& [s, cls] : mesh.neighbours(t, opts.near_factor, true)) {
                const auto terms = pair_terms(ct, mesh.panels[s].component);
                if (terms.empty()) continue;
                local[t].emplace_back(s, panel_blocks(mesh, k_, t, s, cls, terms, opts.block_tol));
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    corrections_.resize(np);
    for (std::size_t t = 0; t < np; ++t) {
        std::sort(local[t].begin(), local[t].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [s, mats] : local[t]) {
            corrections_[t].push_back({s, blocks_.size()});
            for (auto& m : mats) blocks_.push_back(std::move(m));
            ++pair_count_;
        }
    }
    setup_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

cplx SystemOperator::weighted_kernel(std::size_t ti, std::size_t sj, KernelKind kind, KernelSpace space,
                                     int term) const {
    const Mesh& m = *mesh_;
    const std::size_t tp = m.node_panel[ti];
    const std::size_t sp = m.node_panel[sj];
    const auto& list = corrections_[tp];
    const auto it = std::lower_bound(list.begin(), list.end(), sp,
                                     [](const Correction& c, std::size_t s) { return c.source_panel < s; });
    if (it != list.end() && it->source_panel == sp) {
        return blocks_[it->first_block + term](static_cast<Index>(ti - m.panels[tp].first_node),
                                               static_cast<Index>(sj - m.panels[sp].first_node));
    }
    return kernel(ctx_, kind, space, m.x[ti], m.normal[ti], m.x[sj], m.normal[sj]) * m.w[sj];
}

cplx SystemOperator::unscaled_entry(std::size_t i, std::size_t j) const {
    const Mesh& m = *mesh_;
    const auto ri = layout_.slot(m, i);
    const auto cj = layout_.slot(m, j);
    cplx v = 0.0;
    if (i == j) v = (ri.component == Component::Gamma1) ? 1.0 : -0.5;

    if (ri.component == Component::Gamma1) {
        if (cj.component != Component::Gamma) return v;
        if (ri.kind == DensityKind::Mu) {
            return v - weighted_kernel(ri.node, cj.node, KernelKind::D, KernelSpace::Free, 0);
        }
        return v + weighted_kernel(ri.node, cj.node, KernelKind::T, KernelSpace::Free, 1);
    }
    if (cj.component == Component::Gamma1) {
        if (ri.component != Component::Gamma) return v;
        if (cj.kind == DensityKind::Sigma) {
            return v + weighted_kernel(ri.node, cj.node, KernelKind::S, KernelSpace::Half, 0);
        }
        return v + weighted_kernel(ri.node, cj.node, KernelKind::D, KernelSpace::Half, 1);
    }
    if (ri.component != Component::Gamma && cj.component != Component::Gamma) return v;
    return v + weighted_kernel(ri.node, cj.node, KernelKind::D, KernelSpace::Free, 0);
}

cplx SystemOperator::entry(std::size_t i, std::size_t j) const {
    if (i == j) return unscaled_entry(i, j);
    return sqrt_w_[static_cast<Index>(i)] * unscaled_entry(i, j) / sqrt_w_[static_cast<Index>(j)];
}

Eigen::MatrixXcd assemble_dense(const SystemOperator& op, std::size_t dense_cap) {
    const std::size_t n = op.size();
    if (n > dense_cap) {
        throw SolverError("dense assembly of " + std::to_string(n) + " unknowns exceeds the cap of " +
                          std::to_string(dense_cap));
    }
    Eigen::MatrixXcd a(static_cast<Index>(n), static_cast<Index>(n));
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) a(static_cast<Index>(i), static_cast<Index>(j)) = op.entry(i, j);
    }
    return a;
}

RightHandSide rhs_scattering(const SystemOperator& op, double theta, double reflection_sign) {
    if (!(theta > 0.0 && theta < kPi)) throw ConfigError("incidence angle must lie in (0, pi)");
    const Mesh& m = op.mesh();
    const auto& lay = op.layout();
    const PlaneWave wave{theta, reflection_sign};
    RightHandSide rhs;
    rhs.values = Eigen::VectorXcd::Zero(static_cast<Index>(op.size()));
    for (std::size_t node = lay.gamma1_nodes; node < m.node_count(); ++node) {
        const std::size_t i = lay.index(node, DensityKind::Mu);
        rhs.values[static_cast<Index>(i)] = -op.sqrt_weights()[static_cast<Index>(i)] * wave.total(op.wavenumber(), m.x[node]);
    }
    rhs.tag = "theta=" + std::to_string(theta);
    return rhs;
}

RightHandSide rhs_validation(const SceneGeometry& scene, const SystemOperator& op, Point2 x0) {
    const DomeSpec& dome = scene.dome();
    if (!(x0.y > 0.0) || !(norm(x0 - dome.center) > dome.radius)) {
        throw ConfigError("validation source must lie above the ground and outside the dome");
    }
    const Mesh& m = op.mesh();
    const auto& lay = op.layout();
    const double k = op.wavenumber();
    const PointSourcePair src{x0};
    const auto& sw = op.sqrt_weights();
    RightHandSide rhs;
    rhs.values.resize(static_cast<Index>(op.size()));
    for (std::size_t node = 0; node < m.node_count(); ++node) {
        const cplx u = src.value(k, m.x[node]);
        if (node < lay.gamma1_nodes) {
            const auto im = static_cast<Index>(lay.index(node, DensityKind::Mu));
            const auto is = static_cast<Index>(lay.index(node, DensityKind::Sigma));
            rhs.values[im] = -sw[im] * u;
            rhs.values[is] = sw[is] * src.normal_derivative(k, m.x[node], m.normal[node]);
        } else {
            const auto i = static_cast<Index>(lay.index(node, DensityKind::Mu));
            rhs.values[i] = sw[i] * u;
        }
    }
    rhs.tag = "x0=(" + std::to_string(x0.x) + "," + std::to_string(x0.y) + ")";
    return rhs;
}

}  // namespace cavity
