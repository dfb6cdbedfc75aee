#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hankel.hpp>

#include "cavity/specfun.hpp"

using namespace cavity;

namespace {

// Tolerance for 12 significant digits, measured against the local envelope
// of the function so that values near a zero are not judged relatively.
double envelope(double ref, double x) { return std::max(std::abs(ref), std::min(1.0, std::sqrt(2.0 / (kPi * x)))); }

Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

TEST_CASE("Bessel values at x = 1") {
    // Reference digits from Boost's implementation.
    const auto p0 = cyl_bessel_pair(0, 1.0);
    const auto p1 = cyl_bessel_pair(1, 1.0);
    CHECK(std::abs(p0.j - 0.76519768655796655) < 1e-15);
    CHECK(std::abs(p0.y - 0.08825696421567696) < 1e-15);
    CHECK(std::abs(p1.j - 0.44005058574493352) < 1e-15);
    CHECK(std::abs(p1.y + 0.78121282130028872) < 1e-15);
    CHECK(cyl_bessel_j(0, 0.0) == 1.0);
    CHECK(cyl_bessel_j(1, 0.0) == 0.0);
}

TEST_CASE("Bessel domain errors") {
    CHECK_THROWS_AS(cyl_bessel_pair(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(cyl_bessel_pair(0, -1.0), std::domain_error);
    CHECK_THROWS_AS(cyl_bessel_pair(2, 1.0), std::domain_error);
    CHECK_THROWS_AS(cyl_bessel_j(0, -1.0), std::domain_error);
    CHECK_THROWS_AS(hankel1(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(hankel1(3, 1.0), std::domain_error);
    CHECK_THROWS_AS(cyl_bessel_pair(0, 1e13), std::overflow_error);
}

TEST_CASE("J and Y agree with Boost on [1e-6, 1e4]") {
    double worst = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double x = std::pow(10.0, -6.0 + 10.0 * i / 4000.0);
        for (int n = 0; n <= 1; ++n) {
            const auto p = cyl_bessel_pair(n, x);
            const double rj = boost::math::cyl_bessel_j(n, x);
            const double ry = boost::math::cyl_neumann(n, x);
            worst = std::max(worst, std::abs(p.j - rj) / envelope(rj, x));
            worst = std::max(worst, std::abs(p.y - ry) / envelope(ry, x));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("branches agree across the switch points") {
    for (double edge : {kBesselSeriesLimit, kBesselCrossover}) {
        for (int n = 0; n <= 1; ++n) {
            const auto below = cyl_bessel_pair(n, std::nextafter(edge, 0.0));
            const auto above = cyl_bessel_pair(n, std::nextafter(edge, 100.0));
            CHECK(std::abs(below.j - above.j) < 1e-13);
            CHECK(std::abs(below.y - above.y) < 1e-13);
        }
    }
}

TEST_CASE("Wronskian J1 Y0 - J0 Y1 = 2 / (pi x) on [0.1, 100]") {
    double worst = 0.0;
    for (int i = 0; i <= 5000; ++i) {
        const double x = 0.1 * std::pow(1000.0, i / 5000.0);
        const auto p0 = cyl_bessel_pair(0, x);
        const auto p1 = cyl_bessel_pair(1, x);
        const double w = p1.j * p0.y - p0.j * p1.y;
        const double exact = 2.0 / (kPi * x);
        worst = std::max(worst, std::abs(w - exact) / exact);
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("Hankel functions") {
    const cplx h = hankel1(0, 1.0);
    CHECK(std::abs(h - cplx(0.76519768655796655, 0.08825696421567696)) < 1e-15);
    const double x = 3.0;
    const cplx h2 = hankel1(2, x);
    CHECK(std::abs(h2 - (2.0 / x * hankel1(1, x) - hankel1(0, x))) < 1e-15);
    CHECK(std::abs(h2 - boost::math::cyl_hankel_1(2, x)) < 1e-13);
    for (double z : {1e-5, 0.3, 7.9, 8.1, 19.0, 21.0, 500.0}) {
        const Hankel01 both = hankel01(z);
        CHECK(both.h0 == hankel1(0, z));
        CHECK(both.h1 == hankel1(1, z));
    }
}

TEST_CASE("free-space Green's function") {
    const WaveContext ctx(1.0);
    const cplx g = greens_free(ctx, {0.0, 0.0}, {1.0, 0.0});
    CHECK(std::abs(g - cplx(0.0, 0.25) * cplx(0.76519768655796655, 0.08825696421567696)) < 1e-15);
    CHECK_THROWS_AS(greens_free(ctx, {0.3, 0.2}, {0.3, 0.2}), std::domain_error);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Point2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
        CHECK(greens_free(ctx, x, y) == greens_free(ctx, y, x));
    }
    CHECK_THROWS_AS(WaveContext(0.0), std::domain_error);
    CHECK_THROWS_AS(WaveContext(-2.0), std::domain_error);
}

TEST_CASE("D vanishes for collinear points with the normal across the line") {
    const WaveContext ctx(3.0);
    const Vec2 n{0.0, 1.0};
    CHECK(kernel(ctx, KernelKind::D, KernelSpace::Free, {0.1, 0.5}, n, {1.7, 0.5}, n) == cplx(0.0));
}

TEST_CASE("half-space kernels vanish on the ground line") {
    const WaveContext ctx(4.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0), up(0.05, 3.0), ang(0.0, 2.0 * kPi);
    for (int i = 0; i < 200; ++i) {
        const Point2 x{u(rng), 0.0};
        const Point2 y{u(rng), up(rng)};
        const Vec2 nx = unit(ang(rng)), ny = unit(ang(rng));
        CHECK(std::abs(kernel(ctx, KernelKind::S, KernelSpace::Half, x, nx, y, ny)) <= 1e-13);
        CHECK(std::abs(kernel(ctx, KernelKind::D, KernelSpace::Half, x, nx, y, ny)) <= 1e-13);
    }
}

TEST_CASE("reciprocity") {
    const WaveContext ctx(2.5);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0), ang(0.0, 2.0 * kPi);
    for (int i = 0; i < 50; ++i) {
        const Point2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
        const Vec2 nx = unit(ang(rng)), ny = unit(ang(rng));
        const cplx s1 = kernel(ctx, KernelKind::S, KernelSpace::Free, x, nx, y, ny);
        const cplx s2 = kernel(ctx, KernelKind::S, KernelSpace::Free, y, ny, x, nx);
        CHECK(std::abs(s1 - s2) <= 1e-15 * std::abs(s1));
        const cplx n1 = kernel(ctx, KernelKind::N, KernelSpace::Free, x, nx, y, ny);
        const cplx d2 = kernel(ctx, KernelKind::D, KernelSpace::Free, y, ny, x, nx);
        CHECK(std::abs(n1 - d2) <= 1e-14 * std::abs(n1));
    }
}

TEST_CASE("derivative kernels match finite differences at k = 7") {
    const WaveContext ctx(7.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ang(0.0, 2.0 * kPi);
    auto phi = [&](Point2 a, Point2 b) { return greens_free(ctx, a, b); };

    // Central differences at h and h/2, combined by Richardson extrapolation.
    auto d_y = [&](Point2 x, Point2 y, Vec2 ny, double h) {
        return (phi(x, y + h * ny) - phi(x, y - h * ny)) / (2.0 * h);
    };
    auto d_x = [&](Point2 x, Vec2 nx, Point2 y, double h) {
        return (phi(x + h * nx, y) - phi(x - h * nx, y)) / (2.0 * h);
    };
    auto d_xy = [&](Point2 x, Vec2 nx, Point2 y, Vec2 ny, double h) {
        return (phi(x + h * nx, y + h * ny) - phi(x + h * nx, y - h * ny) - phi(x - h * nx, y + h * ny) +
                phi(x - h * nx, y - h * ny)) /
               (4.0 * h * h);
    };
    auto rich = [](cplx coarse, cplx fine) { return (4.0 * fine - coarse) / 3.0; };

    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const Point2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
        if (norm(x - y) < 0.3) continue;
        const Vec2 nx = unit(ang(rng)), ny = unit(ang(rng));
        const double h = 1e-3;
        const cplx d = kernel(ctx, KernelKind::D, KernelSpace::Free, x, nx, y, ny);
        const cplx n = kernel(ctx, KernelKind::N, KernelSpace::Free, x, nx, y, ny);
        const cplx t = kernel(ctx, KernelKind::T, KernelSpace::Free, x, nx, y, ny);
        const cplx fd_d = rich(d_y(x, y, ny, h), d_y(x, y, ny, h / 2));
        const cplx fd_n = rich(d_x(x, nx, y, h), d_x(x, nx, y, h / 2));
        const cplx fd_t = rich(d_xy(x, nx, y, ny, h), d_xy(x, nx, y, ny, h / 2));
        CHECK(std::abs(d - fd_d) <= 1e-7 * std::max(1.0, std::abs(d)));
        CHECK(std::abs(n - fd_n) <= 1e-7 * std::max(1.0, std::abs(n)));
        CHECK(std::abs(t - fd_t) <= 1e-7 * std::max(1.0, std::abs(t)));

        // Plain central differences converge at second order.
        const double e1 = std::abs(d - d_y(x, y, ny, 2e-2));
        const double e2 = std::abs(d - d_y(x, y, ny, 1e-2));
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("half-space D equals the free kernel minus its mirrored image") {
    const WaveContext ctx(5.0);
    const Point2 x{0.3, -0.4}, y{1.1, 0.7};
    const Vec2 nx = unit(0.4), ny = unit(2.0);
    const cplx half = kernel(ctx, KernelKind::D, KernelSpace::Half, x, nx, y, ny);
    const cplx direct = kernel(ctx, KernelKind::D, KernelSpace::Free, x, nx, y, ny) -
                        kernel(ctx, KernelKind::D, KernelSpace::Free, x, nx, mirror(y), mirror(ny));
    CHECK(std::abs(half - direct) < 1e-15);
}

TEST_CASE("T refuses targets inside the proximity guard") {
    const WaveContext ctx(1.0);
    const Vec2 n{0.0, 1.0};
    CHECK_THROWS_AS(kernel(ctx, KernelKind::T, KernelSpace::Free, {0.0, 0.0}, n, {1e-13, 0.0}, n, 1e-12),
                    NearSingularError);
    CHECK_NOTHROW(kernel(ctx, KernelKind::T, KernelSpace::Free, {0.0, 0.0}, n, {1e-3, 0.0}, n, 1e-12));
    CHECK_THROWS_AS(kernel(ctx, KernelKind::S, KernelSpace::Free, {0.5, 0.5}, n, {0.5, 0.5}, n),
                    std::domain_error);
}
