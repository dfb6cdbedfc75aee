#pragma once

// Cylinder Bessel/Hankel functions of order 0 and 1 and the Helmholtz
// Green's-function kernels built from them.

#include <stdexcept>

#include "cavity/types.hpp"

namespace cavity {

struct BesselPair {
    double j = 0.0;
    double y = 0.0;
};

/// J_order(x) and Y_order(x) for order in {0, 1}. Requires x > 0 because Y is
/// part of the result; use cyl_bessel_j for x = 0.
///
/// Small arguments use the ascending series summed in extended precision,
/// moderate ones backward recurrence, large ones the Hankel asymptotic expansion.
BesselPair cyl_bessel_pair(int order, double x);

/// J_order(x) for order in {0, 1}, x >= 0.
double cyl_bessel_j(int order, double x);

/// Largest argument accepted by the Bessel routines.
inline constexpr double kBesselMaxArgument = 1e12;

/// Below this argument the ascending series is used.
inline constexpr double kBesselSeriesLimit = 8.0;

/// Argument where the evaluation switches to the asymptotic expansion. Between
/// the two limits J comes from backward recurrence and Y from its Neumann series.
inline constexpr double kBesselCrossover = 20.0;

/// H^{(1)}_0 and H^{(1)}_1 at the same argument.
struct Hankel01 {
    cplx h0;
    cplx h1;
};

/// Both first-kind Hankel functions of order 0 and 1; x > 0. This is the hot
/// path for kernel evaluation and does no argument validation beyond x > 0.
Hankel01 hankel01(double x);

/// H^{(1)}_order(x) for order in {0, 1, 2}. Order 2 comes from the upward
/// recurrence H_2 = (2/x) H_1 - H_0.
cplx hankel1(int order, double x);

/// Wavenumber holder. epsilon, mu and omega only enter through k.
struct WaveContext {
    double k = 1.0;

    explicit WaveContext(double k_) : k(k_) {
        if (!(k_ > 0.0) || !std::isfinite(k_)) {
            throw std::domain_error("wavenumber must be positive and finite");
        }
    }
};

enum class KernelKind { S, D, N, T };
enum class KernelSpace { Free, Half };

const char* to_string(KernelKind kind);

class NearSingularError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Free-space Green's function (i/4) H0(k|x - y|).
cplx greens_free(const WaveContext& ctx, Point2 x, Point2 y);

/// Layer-potential kernel for the pair (x, nx) <- (y, ny).
///
///   S = Phi, D = dPhi/dn(y), N = dPhi/dn(x), T = d^2 Phi / dn(x) dn(y).
///
/// The half-space variant subtracts the kernel at the image point y' with the
/// mirrored normal. T throws NearSingularError when |x - y| (or |x - y'| in the
/// half-space case) is below t_guard.
cplx kernel(const WaveContext& ctx, KernelKind kind, KernelSpace space, Point2 x, Vec2 nx, Point2 y,
            Vec2 ny, double t_guard = 0.0);

/// Free-space kernel from the separation d = x - y. Used by the quadrature code,
/// which computes d from accurate chord formulas instead of subtracting points.
/// No argument checks: d must be nonzero.
cplx kernel_from_separation(double k, KernelKind kind, Vec2 d, Vec2 nx, Vec2 ny);

}  // namespace cavity
