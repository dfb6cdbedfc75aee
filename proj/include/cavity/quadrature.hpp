#pragma once

// One-dimensional quadrature rules: Gauss-Legendre nodes, the adaptive
// vector-valued rule used to build singular and near-singular correction
// blocks, and an independent adaptive Gauss-Kronrod oracle for tests.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cavity/types.hpp"

namespace cavity {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr int kMaxGaussOrder = 64;

/// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 64. Nodes ascending.
/// Rules are computed once per order and cached.
const QuadratureRule& gauss_legendre(int n);

/// Barycentric weights of a node set, for Lagrange interpolation.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

/// Values of all Lagrange basis polynomials of `nodes` at u, written to `out`.
void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary, double u,
                    double* out);

/// Settings for adaptive_integrate.
struct AdaptiveOptions {
    double rel_tol = 1e-14;
    double abs_tol = 0.0;
    int order = 16;
    int max_depth = 60;
};

/// Vector-valued integrand: writes f(u) into the (preallocated) output.
using VectorIntegrand = std::function<void(double u, Eigen::Ref<Eigen::VectorXcd> out)>;

/// Integrates a vector-valued function over [a, b] by recursive bisection. On
/// each interval an order-n Gauss-Legendre estimate is accepted when it agrees
/// with an order n-6 estimate to the tolerance. If `singular_at_a` (or
/// `singular_at_b`) is set, the interval is first cut into pieces shrinking
/// geometrically (ratio 4) toward that end; the innermost piece uses the
/// substitution u = a + (b - a) v^4, which absorbs an integrable log singularity.
///
/// Throws QuadratureError when max_depth is exceeded.
Eigen::VectorXcd adaptive_integrate(const VectorIntegrand& f, int dim, double a, double b,
                                    bool singular_at_a, bool singular_at_b,
                                    const AdaptiveOptions& opts = {});

/// Reference integral by adaptive Gauss-Kronrod (15 points) subdivision. The
/// interval is split at `singular_point` when given. Converges when successive
/// estimates agree to `tol` (relative) or to `abs_tol`; throws QuadratureError
/// after depth 60. The absolute floor stops refinement of integrands that are
/// zero up to rounding, such as D on a straight panel.
cplx oracle_integrate(const std::function<cplx(double)>& f, double a, double b,
                      std::optional<double> singular_point = std::nullopt, double tol = 1e-12,
                      double abs_tol = 1e-18);

}  // namespace cavity
