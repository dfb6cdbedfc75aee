#include "cavity/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cavity {

namespace {

QuadratureRule compute_rule(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess, largest root first.
        long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double dp = 0.0L;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1.0L, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0L;
            const long double pn = (n == 1) ? x : p1;
            dp = n * (x * pn - p0) / (x * x - 1.0L);
            const long double dx = pn / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-20L) break;
        }
        if (n == 1) {
            x = 0.0L;
            dp = 1.0L;
        }
        const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = static_cast<double>(x);
        rule.nodes[i] = static_cast<double>(-x);
        rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    static const std::vector<QuadratureRule> table = [] {
        std::vector<QuadratureRule> t(kMaxGaussOrder + 1);
        for (int m = 1; m <= kMaxGaussOrder; ++m) t[m] = compute_rule(m);
        return t;
    }();
    if (n < 1 || n > kMaxGaussOrder) {
        throw std::invalid_argument("Gauss-Legendre order must be in [1, 64], got " + std::to_string(n));
    }
    return table[n];
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k != j) w[j] /= (nodes[j] - nodes[k]);
        }
    }
    return w;
}

void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bary, double u,
                    double* out) {
    const std::size_t n = nodes.size();
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = u - nodes[j];
        if (d == 0.0) {
            for (std::size_t k = 0; k < n; ++k) out[k] = (k == j) ? 1.0 : 0.0;
            return;
        }
        out[j] = bary[j] / d;
        denom += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
}

namespace {

struct AdaptiveState {
    const VectorIntegrand& f;
    const QuadratureRule& rule;
    const QuadratureRule& check;
    const AdaptiveOptions& opts;
    int dim;
    double scale = 0.0;  // running magnitude used for the relative tolerance
    Eigen::VectorXcd work;
    Eigen::VectorXd mag;
};

// Estimate on [lo, hi] with one rule. A singular endpoint is absorbed by
// u = lo + (hi - lo) v^4 (or its mirror).
// Also returns the largest component of the integral of |f|, the scale of
// the roundoff in the estimate.
double rule_estimate(AdaptiveState& st, const QuadratureRule& rule, double lo, double hi, bool sing_lo,
                     bool sing_hi, Eigen::VectorXcd& acc) {
    acc.setZero();
    st.mag.setZero();
    const double len = hi - lo;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double v = 0.5 * (rule.nodes[q] + 1.0);
        double u, jac;
        if (sing_lo || sing_hi) {
            const double v3 = v * v * v;
            u = sing_lo ? lo + len * v3 * v : hi - len * v3 * v;
            jac = 4.0 * len * v3;
        } else {
            u = lo + len * v;
            jac = len;
        }
        st.f(u, st.work);
        acc += (0.5 * rule.weights[q] * jac) * st.work;
        st.mag += (0.5 * rule.weights[q] * jac) * st.work.cwiseAbs();
    }
    return st.mag.maxCoeff();
}

// Accepts the main-rule estimate when it agrees with the lower-order check
// rule, otherwise bisects.
Eigen::VectorXcd recurse(AdaptiveState& st, double lo, double hi, bool sing_lo, bool sing_hi, int depth) {
    Eigen::VectorXcd fine(st.dim), coarse(st.dim);
    const double mag = rule_estimate(st, st.rule, lo, hi, sing_lo, sing_hi, fine);
    rule_estimate(st, st.check, lo, hi, sing_lo, sing_hi, coarse);
    st.scale = std::max(st.scale, fine.cwiseAbs().maxCoeff());
    const double diff = (fine - coarse).cwiseAbs().maxCoeff();
    // The last term stops refinement once the two rules differ only by the
    // integrand's own rounding error.
    const double noise = 50.0 * std::numeric_limits<double>::epsilon() * mag;
    if (diff <= std::max({st.opts.abs_tol, st.opts.rel_tol * st.scale, noise})) return fine;
    if (depth >= st.opts.max_depth) {
        throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    const double mid = 0.5 * (lo + hi);
    return recurse(st, lo, mid, sing_lo, false, depth + 1) + recurse(st, mid, hi, false, sing_hi, depth + 1);
}

// Pieces [a, a + h 4^-L], ..., [a + h/4, b]: every piece except the innermost
// sits at least its own width away from the singular end.
constexpr int kGradingLevels = 9;

Eigen::VectorXcd graded(AdaptiveState& st, double a, double b, bool toward_a) {
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(st.dim);
    const double h = b - a;
    double inner = 0.0;  // distance of the current piece's near edge from the singular end
    double outer = std::ldexp(h, -2 * kGradingLevels);
    for (int level = 0; level <= kGradingLevels; ++level) {
        const bool innermost = level == 0;
        const double lo = toward_a ? a + inner : b - outer;
        const double hi = toward_a ? a + outer : b - inner;
        const double lo_c = (toward_a && innermost) ? a : lo;
        const double hi_c = (!toward_a && innermost) ? b : hi;
        total += recurse(st, lo_c, hi_c, toward_a && innermost, !toward_a && innermost, 0);
        inner = outer;
        outer = (level + 1 == kGradingLevels) ? h : outer * 4.0;
    }
    return total;
}

}  // namespace

Eigen::VectorXcd adaptive_integrate(const VectorIntegrand& f, int dim, double a, double b,
                                    bool singular_at_a, bool singular_at_b, const AdaptiveOptions& opts) {
    if (singular_at_a && singular_at_b) {
        const double mid = 0.5 * (a + b);
        return adaptive_integrate(f, dim, a, mid, true, false, opts) +
               adaptive_integrate(f, dim, mid, b, false, true, opts);
    }
    const int check_order = std::max(2, opts.order - 6);
    AdaptiveState st{f, gauss_legendre(opts.order), gauss_legendre(check_order), opts, dim, 0.0,
                     Eigen::VectorXcd(dim), Eigen::VectorXd(dim)};
    if (b <= a) return Eigen::VectorXcd::Zero(dim);
    // Seed the tolerance scale with a whole-interval estimate.
    Eigen::VectorXcd seed(dim);
    rule_estimate(st, st.rule, a, b, singular_at_a, singular_at_b, seed);
    st.scale = seed.cwiseAbs().maxCoeff();
    if (singular_at_a || singular_at_b) return graded(st, a, b, singular_at_a);
    return recurse(st, a, b, false, false, 0);
}

namespace {

struct OracleState {
    const std::function<cplx(double)>& f;
    double tol;
    double abs_tol;
    double scale;
};

// Boost's own adaptive driver halves the absolute tolerance per level, which
// at 1e-12 refines everywhere down to roundoff. Here each interval is judged
// against a fixed tolerance relative to the running integral magnitude.
cplx oracle_recurse(OracleState& st, double lo, double hi, int depth) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    const cplx value = GK::integrate(st.f, lo, hi, 0, 0.0, &err);
    err *= 0.5 * (hi - lo);  // Boost reports the error on the reference interval
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        throw QuadratureError("oracle integrand is not finite on [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    st.scale = std::max(st.scale, std::abs(value));
    if (err <= std::max(st.tol * st.scale, st.abs_tol)) return value;
    if (depth >= 60) {
        throw QuadratureError("oracle quadrature did not converge within 60 levels");
    }
    const double mid = 0.5 * (lo + hi);
    return oracle_recurse(st, lo, mid, depth + 1) + oracle_recurse(st, mid, hi, depth + 1);
}

}  // namespace

cplx oracle_integrate(const std::function<cplx(double)>& f, double a, double b,
                      std::optional<double> singular_point, double tol, double abs_tol) {
    OracleState st{f, tol, abs_tol, 0.0};
    if (singular_point && *singular_point > a && *singular_point < b) {
        // Seed the scale from both sides before refining either.
        using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
        st.scale = std::abs(GK::integrate(f, a, *singular_point, 0, 0.0) +
                            GK::integrate(f, *singular_point, b, 0, 0.0));
        return oracle_recurse(st, a, *singular_point, 0) + oracle_recurse(st, *singular_point, b, 0);
    }
    return oracle_recurse(st, a, b, 0);
}

}  // namespace cavity
