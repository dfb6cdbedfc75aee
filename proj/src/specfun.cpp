#include "cavity/specfun.hpp"

#include <cmath>
#include <limits>

namespace cavity {

namespace {

constexpr long double kEulerGammaL = 0.577215664901532860606512090082402431L;
constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr double kSqrtHalf = 0.70710678118654752440;

struct BesselAll {
    double j0, y0, j1, y1;
};

// Ascending series for J0, J1, Y0, Y1 (A&S 9.1.10-9.1.11), summed in long
// double. With z = x/2 and q = -z^2:
//   J0 = sum q^k/(k!)^2,            Y0 = (2/pi)(ln z + gamma) J0 - (2/pi) sum H_k q^k/(k!)^2
//   J1 = z sum q^k/(k!(k+1)!),      Y1 = -2/(pi x) + (2/pi)(ln z + gamma) J1
//                                        - (z/pi) sum (H_k + H_{k+1}) q^k/(k!(k+1)!)
BesselAll series_all(double x) {
    const long double z = static_cast<long double>(x) * 0.5L;
    const long double q = -z * z;

    long double t = 1.0L;  // q^k/(k!)^2
    long double u = 1.0L;  // q^k/(k!(k+1)!)
    long double harm = 0.0L;       // H_k
    long double harm_next = 1.0L;  // H_{k+1}
    long double sj0 = 1.0L, sy0 = 0.0L;
    long double sj1 = 1.0L, sy1 = harm + harm_next;

    constexpr long double kTol = 1e-22L;
    for (int k = 1; k < 200; ++k) {
        const long double kk = static_cast<long double>(k);
        t *= q / (kk * kk);
        u *= q / (kk * (kk + 1.0L));
        harm = harm_next;
        harm_next += 1.0L / (kk + 1.0L);
        sj0 += t;
        sy0 += harm * t;
        sj1 += u;
        sy1 += (harm + harm_next) * u;
        if (kk > z && std::fabs(t) * harm_next < kTol && std::fabs(u) * harm_next < kTol) {
            break;
        }
    }

    const long double log_term = std::log(z) + kEulerGammaL;
    const long double j0 = sj0;
    const long double j1 = z * sj1;
    const long double y0 = (2.0L / kPiL) * (log_term * j0 - sy0);
    const long double y1 =
        -2.0L / (kPiL * static_cast<long double>(x)) + (2.0L / kPiL) * log_term * j1 - (z / kPiL) * sy1;
    return {static_cast<double>(j0), static_cast<double>(y0), static_cast<double>(j1),
            static_cast<double>(y1)};
}

// Hankel asymptotic expansion (A&S 9.2.5-9.2.10):
//   H_nu(x) ~ sqrt(2/(pi x)) (P + iQ) exp(i(x - nu pi/2 - pi/4)),
// with P, Q the alternating even/odd partial sums of
//   a_k = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k x^k).
// The series is truncated at its smallest term.
struct PhaseAmplitude {
    double p, q;
};

PhaseAmplitude asymptotic_pq(double mu, double x) {
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 80; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (8.0 * k * x);
        if (std::fabs(next) >= prev) {
            break;
        }
        term = next;
        prev = std::fabs(term);
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            default: p += term; break;
        }
        if (prev < 1e-18) {
            break;
        }
    }
    return {p, q};
}

BesselAll asymptotic_all(double x) {
    const auto [p0, q0] = asymptotic_pq(0.0, x);
    const auto [p1, q1] = asymptotic_pq(4.0, x);
    const double s = std::sin(x);
    const double c = std::cos(x);
    const double amp = std::sqrt(2.0 / (kPi * x));
    // chi0 = x - pi/4, chi1 = x - 3pi/4
    const double c0 = (c + s) * kSqrtHalf;
    const double s0 = (s - c) * kSqrtHalf;
    const double c1 = (s - c) * kSqrtHalf;
    const double s1 = -(s + c) * kSqrtHalf;
    return {amp * (p0 * c0 - q0 * s0), amp * (p0 * s0 + q0 * c0), amp * (p1 * c1 - q1 * s1),
            amp * (p1 * s1 + q1 * c1)};
}

// Intermediate range: Miller backward recurrence for J_n normalised by
// J0 + 2 sum J_2k = 1, then the Neumann series
//   Y0 = (2/pi)(ln(x/2) + gamma) J0 - (4/pi) sum_{k>=1} (-1)^k J_2k / k
// and its negated derivative
//   Y1 = (2/pi)(ln(x/2) + gamma) J1 - (2/pi) J0/x + (2/pi) sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k.
BesselAll miller_neumann_all(double x) {
    const int start = 2 * ((static_cast<int>(x + 12.0 * std::cbrt(x)) + 24) / 2);
    const double two_over_x = 2.0 / x;
    double j_next = 0.0;   // J_{n+1}
    double j_curr = 1e-30; // J_n, unnormalised
    double norm_sum = 0.0;
    double su = 0.0;
    double sv = 0.0;
    double j_above = 0.0;  // J_{n+1} retained for the odd-index terms of sv
    double j1 = 0.0;
    for (int n = start; n >= 1; --n) {
        const double j_prev = n * two_over_x * j_curr - j_next;  // J_{n-1}
        j_next = j_curr;
        j_curr = j_prev;
        const int m = n - 1;  // j_curr now holds J_m
        if (m >= 2 && m % 2 == 0) {
            const int k = m / 2;
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            norm_sum += 2.0 * j_curr;
            su += sign * j_curr / k;
        }
        if (m % 2 == 1) {
            // m = 2k - 1; J_{2k+1} is two steps above.
            const int k = (m + 1) / 2;
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            sv += sign * (j_curr - j_above) / k;
            j_above = j_curr;
        }
        if (m == 1) {
            j1 = j_curr;
        }
    }
    const double j0_raw = j_curr;
    const double scale = 1.0 / (j0_raw + norm_sum);
    const double j0 = j0_raw * scale;
    j1 *= scale;
    su *= scale;
    sv *= scale;
    const double log_term = std::log(0.5 * x) + static_cast<double>(kEulerGammaL);
    const double y0 = (2.0 / kPi) * log_term * j0 - (4.0 / kPi) * su;
    const double y1 = (2.0 / kPi) * (log_term * j1 - j0 / x + sv);
    return {j0, y0, j1, y1};
}

BesselAll bessel_all(double x) {
    if (x < kBesselSeriesLimit) return series_all(x);
    if (x < kBesselCrossover) return miller_neumann_all(x);
    return asymptotic_all(x);
}

void check_order(int order) {
    if (order != 0 && order != 1) {
        throw std::domain_error("Bessel order must be 0 or 1");
    }
}

void check_upper(double x) {
    if (!std::isfinite(x) || x > kBesselMaxArgument) {
        throw std::overflow_error("Bessel argument beyond the asymptotic range");
    }
}

}  // namespace

BesselPair cyl_bessel_pair(int order, double x) {
    check_order(order);
    if (!(x > 0.0)) {
        throw std::domain_error("Y_n(x) requires x > 0");
    }
    check_upper(x);
    const BesselAll b = bessel_all(x);
    return order == 0 ? BesselPair{b.j0, b.y0} : BesselPair{b.j1, b.y1};
}

double cyl_bessel_j(int order, double x) {
    check_order(order);
    if (!(x >= 0.0)) {
        throw std::domain_error("J_n(x) requires x >= 0");
    }
    check_upper(x);
    if (x == 0.0) {
        return order == 0 ? 1.0 : 0.0;
    }
    const BesselAll b = bessel_all(x);
    return order == 0 ? b.j0 : b.j1;
}

Hankel01 hankel01(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("Hankel function requires x > 0");
    }
    const BesselAll b = bessel_all(x);
    return {cplx(b.j0, b.y0), cplx(b.j1, b.y1)};
}

cplx hankel1(int order, double x) {
    if (order < 0 || order > 2) {
        throw std::domain_error("Hankel order must be 0, 1 or 2");
    }
    if (!(x > 0.0)) {
        throw std::domain_error("Hankel function requires x > 0");
    }
    check_upper(x);
    const Hankel01 h = hankel01(x);
    if (order == 0) return h.h0;
    if (order == 1) return h.h1;
    return (2.0 / x) * h.h1 - h.h0;
}

const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::S: return "S";
        case KernelKind::D: return "D";
        case KernelKind::N: return "N";
        case KernelKind::T: return "T";
    }
    return "?";
}

cplx greens_free(const WaveContext& ctx, Point2 x, Point2 y) {
    const double r = norm(x - y);
    if (r == 0.0) {
        throw std::domain_error("Green's function evaluated at coincident points");
    }
    return cplx(0.0, 0.25) * hankel01(ctx.k * r).h0;
}

cplx kernel_from_separation(double k, KernelKind kind, Vec2 d, Vec2 nx, Vec2 ny) {
    const double r = norm(d);
    const double z = k * r;
    const Hankel01 h = hankel01(z);
    const cplx ik4(0.0, 0.25 * k);
    switch (kind) {
        case KernelKind::S:
            return cplx(0.0, 0.25) * h.h0;
        case KernelKind::D:
            return ik4 * h.h1 * (dot(d, ny) / r);
        case KernelKind::N:
            return -ik4 * h.h1 * (dot(d, nx) / r);
        case KernelKind::T: {
            const cplx h2 = (2.0 / z) * h.h1 - h.h0;
            return -ik4 * k * h2 * (dot(d, nx) * dot(d, ny) / (r * r)) + ik4 * h.h1 * (dot(nx, ny) / r);
        }
    }
    return {};
}

namespace {

cplx checked_free(const WaveContext& ctx, KernelKind kind, Vec2 d, Vec2 nx, Vec2 ny, double t_guard) {
    const double r = norm(d);
    if (r == 0.0) {
        throw std::domain_error("kernel evaluated at coincident points");
    }
    if (kind == KernelKind::T && r < t_guard) {
        throw NearSingularError("T kernel requested below the proximity threshold");
    }
    return kernel_from_separation(ctx.k, kind, d, nx, ny);
}

}  // namespace

cplx kernel(const WaveContext& ctx, KernelKind kind, KernelSpace space, Point2 x, Vec2 nx, Point2 y,
            Vec2 ny, double t_guard) {
    cplx value = checked_free(ctx, kind, x - y, nx, ny, t_guard);
    if (space == KernelSpace::Half) {
        value -= checked_free(ctx, kind, x - mirror(y), nx, mirror(ny), t_guard);
    }
    return value;
}

}  // namespace cavity
