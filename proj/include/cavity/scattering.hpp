#pragma once

// End-to-end drivers: density solves, the layered representation of the
// scattered field, far-field pattern, backscatter RCS and the point-source check.

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cavity/assembly.hpp"
#include "cavity/fields.hpp"
#include "cavity/geometry.hpp"
#include "cavity/hodlr.hpp"
#include "cavity/mesh.hpp"

namespace cavity {

enum class SolverKind { Dense, Hodlr, Auto };

struct Discretization {
    MeshParams mesh;
    AssemblyOptions assembly;
    HodlrOptions hodlr;
    SolverKind solver = SolverKind::Hodlr;
    std::size_t dense_cap = 6000;
};

/// Physical (unscaled) densities.
struct DensitySolution {
    std::shared_ptr<const Mesh> mesh;
    double k = 1.0;
    Eigen::VectorXcd mu_gamma1;     // per Gamma1 node
    Eigen::VectorXcd sigma_gamma1;  // per Gamma1 node
    Eigen::VectorXcd mu_bgamma;     // per B u Gamma node, offset by the Gamma1 node count
};

struct SolveReport {
    std::size_t n_tot = 0;
    double t_factor = 0.0;  // corrected blocks + compression + factorization
    double t_solve = 0.0;   // one right-hand side
    double residual = 0.0;  // |A x - b| / |b| with the operator that was factorized
    std::optional<double> e_error;        // mean relative interior error
    std::optional<double> exterior_max;   // max exterior |u^s| / max interior |u|
};

/// Mesh, operator and factorization for one scene and wavenumber; solves any
/// number of right-hand sides against the single factorization.
class ScatteringSolver {
  public:
    ScatteringSolver(const SceneGeometry& scene, const WaveContext& ctx, const Discretization& disc);

    const Mesh& mesh() const { return *mesh_; }
    const SystemOperator& op() const { return *op_; }
    SolverKind kind() const { return kind_; }
    double factor_seconds() const { return t_factor_; }
    const HodlrMatrix* hodlr() const { return hodlr_ ? &*hodlr_ : nullptr; }

    /// Scaled solution of A x = b.
    Eigen::VectorXcd solve_scaled(const Eigen::VectorXcd& b) const;
    Eigen::MatrixXcd solve_scaled(const Eigen::MatrixXcd& b) const;
    /// Product with the factorized operator (dense or HODLR).
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

    DensitySolution unscale(const Eigen::VectorXcd& x) const;
    /// Solves and fills the report's timing and residual fields.
    DensitySolution solve(const RightHandSide& rhs, SolveReport* report = nullptr) const;

  private:
    std::shared_ptr<const Mesh> mesh_;
    std::unique_ptr<SystemOperator> op_;
    SolverKind kind_;
    Eigen::MatrixXcd dense_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> dense_lu_;
    std::optional<HodlrMatrix> hodlr_;
    std::unique_ptr<HodlrFactorization> factor_;
    double t_factor_ = 0.0;
};

std::pair<DensitySolution, SolveReport> solve_densities(const SceneGeometry& scene, const WaveContext& ctx,
                                                        const Discretization& disc, const RightHandSide& rhs);

/// u^s at x: S^H sigma + D^H mu over Gamma1 plus D mu over B, and D mu over
/// Gamma as well when x is in Omega1. Plain quadrature, so accuracy drops
/// within about a panel length of the boundary. Throws GeometryError for
/// points below the ground outside Omega1 and for points on the boundary.
cplx eval_scattered_field(const SceneGeometry& scene, const DensitySolution& sol, Point2 x);
/// Same, with the region already known (Omega1 or ExteriorUpper).
cplx eval_scattered_field(const DensitySolution& sol, Point2 x, RegionLabel region);

/// u_inf(theta) = lim sqrt(r) exp(-ikr) u^s(r (cos theta, sin theta)), 0 < theta < pi.
cplx far_field(const DensitySolution& sol, double theta_out);

/// 10 log10(rcs), floored at -300 dB.
double rcs_db(double rcs);

struct FarField {
    std::vector<double> angles;
    std::vector<cplx> pattern;  // u_inf in the backscatter direction pi - theta
    std::vector<double> rcs;    // (4/k) |u_inf|^2
    std::vector<double> db;
    double t_solve_total = 0.0;
};

/// All incidence angles solved as one block of right-hand sides against the
/// shared factorization; t_solve_total is the time of that block solve.
FarField backscatter_rcs(const ScatteringSolver& solver, const std::vector<double>& angles,
                         double reflection_sign = -1.0);

/// n equispaced angles strictly inside (0, pi): theta_i = (i + 1/2) pi / n.
std::vector<double> default_angles(std::size_t n = 360);

/// Quasi-random points of the given region, each at least max(2 h_min, h_j)
/// from every panel j, where h_j is its length and h_min the shortest panel.
/// Throws CavityError if too few points survive the filter.
std::vector<Point2> sample_points(const SceneGeometry& scene, const Mesh& mesh, RegionLabel region,
                                  std::size_t count);

/// True when q lies within `factor` panel lengths of some panel, where the
/// plain quadrature in eval_scattered_field loses accuracy.
bool near_boundary(const Mesh& mesh, Point2 q, double factor = 1.0);

/// Solves the point-source system for x0 and compares the representation with
/// the source field at interior points and with zero at exterior points.
SolveReport validate_point_source(const SceneGeometry& scene, const WaveContext& ctx,
                                  const Discretization& disc, Point2 x0 = {5.0, 12.0},
                                  std::size_t interior_points = 20, std::size_t exterior_points = 20);

}  // namespace cavity
