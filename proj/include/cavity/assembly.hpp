#pragma once

// Scaled Nystrom discretisation of the cavity system
//
//   mu_1 - D_Gamma mu                                      on Gamma1
//   sigma + T_Gamma mu                                     on Gamma1
//   -mu/2 + S^H_Gamma1 sigma + D^H_Gamma1 mu_1 + D_{B u Gamma} mu   on B u Gamma
//
// Unknowns are multiplied by sqrt(w) so that A = W^{1/2} M W^{-1/2}.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavity/geometry.hpp"
#include "cavity/mesh.hpp"
#include "cavity/specfun.hpp"

namespace cavity {

enum class DensityKind { Mu, Sigma };

/// [mu on Gamma1 | sigma on Gamma1 | mu on B u Gamma].
struct UnknownLayout {
    std::size_t gamma1_nodes = 0;
    std::size_t bgamma_nodes = 0;

    std::size_t total() const { return 2 * gamma1_nodes + bgamma_nodes; }

    struct Slot {
        Component component;
        DensityKind kind;
        std::size_t node;  // mesh node index
    };
    /// Unknown index -> mesh node and density. Needs the mesh for the component of B u Gamma nodes.
    Slot slot(const Mesh& mesh, std::size_t i) const;

    /// Mesh node -> unknown index of its mu (or, on Gamma1, sigma) density.
    std::size_t index(std::size_t node, DensityKind kind) const;
};

UnknownLayout layout(const Mesh& mesh);

struct AssemblyOptions {
    /// Pairs closer than this many source-panel lengths get corrected blocks.
    double near_factor = 1.0;
    /// Relative tolerance of the adaptive integration for corrected blocks.
    double block_tol = 1e-12;
};

/// Entry generator for the scaled system matrix. Corrected blocks for self,
/// adjacent and near panel pairs are computed once in the constructor; every
/// other entry is a plain kernel evaluation times the source weight.
class SystemOperator {
  public:
    SystemOperator(const Mesh& mesh, const WaveContext& ctx, AssemblyOptions opts = {});

    const Mesh& mesh() const { return *mesh_; }
    const UnknownLayout& layout() const { return layout_; }
    double wavenumber() const { return k_; }
    std::size_t size() const { return layout_.total(); }

    /// Scaled entry A(i, j).
    cplx entry(std::size_t i, std::size_t j) const;
    /// Unscaled Nystrom entry M(i, j); A(i, j) = sqrt_w(i) M(i, j) / sqrt_w(j).
    cplx unscaled_entry(std::size_t i, std::size_t j) const;

    /// sqrt of the quadrature weight of each unknown's node.
    const Eigen::VectorXd& sqrt_weights() const { return sqrt_w_; }

    std::size_t corrected_pairs() const { return pair_count_; }
    double setup_seconds() const { return setup_seconds_; }

  private:
    struct Correction {
        std::size_t source_panel;
        std::size_t first_block;  // index into blocks_
    };

    const Mesh* mesh_;
    double k_;
    WaveContext ctx_;
    UnknownLayout layout_;
    Eigen::VectorXd sqrt_w_;
    std::vector<std::vector<Correction>> corrections_;  // per target panel, sorted by source
    std::vector<Eigen::MatrixXcd> blocks_;
    std::size_t pair_count_ = 0;
    double setup_seconds_ = 0.0;

    // Kernel contribution of source node sj to target node ti for term `term`
    // of the pair's correction list, including the source weight.
    cplx weighted_kernel(std::size_t ti, std::size_t sj, KernelKind kind, KernelSpace space,
                         int term) const;
};

/// Materialises the scaled matrix. Throws SolverError when size() > dense_cap.
Eigen::MatrixXcd assemble_dense(const SystemOperator& op, std::size_t dense_cap = 6000);

struct RightHandSide {
    Eigen::VectorXcd values;  // scaled by sqrt(w)
    std::string tag;
};

/// Plane-wave data: zero on the Gamma1 rows, sqrt(w) (-(u_i + u_r)) on B u Gamma.
/// Requires 0 < theta < pi.
RightHandSide rhs_scattering(const SystemOperator& op, double theta, double reflection_sign = -1.0);

/// Point-source data (-u, du/dn on Gamma1; u on B u Gamma). The source must lie
/// strictly above the ground and outside the dome; throws ConfigError otherwise.
RightHandSide rhs_validation(const SceneGeometry& scene, const SystemOperator& op, Point2 x0);

}  // namespace cavity
