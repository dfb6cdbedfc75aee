#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cavity/scattering.hpp"

using namespace cavity;

namespace {

Discretization pot_disc(SolverKind kind = SolverKind::Hodlr) {
    Discretization d;
    d.mesh.n_mid = 2;
    d.mesh.n_corner = 10;
    d.mesh.p = 10;
    d.solver = kind;
    return d;
}

// One factorization of the pot at k = 2, shared by the tests below.
const ScatteringSolver& pot_solver() {
    static const SceneGeometry pot = build_pot();
    static const ScatteringSolver solver(pot, WaveContext(2.0), pot_disc());
    return solver;
}

}  // namespace

TEST_CASE("point-source validation on the pot") {
    const SceneGeometry pot = build_pot();
    const SolveReport r = validate_point_source(pot, WaveContext(1.0), pot_disc());
    REQUIRE(r.e_error.has_value());
    CHECK(*r.e_error <= 1e-7);
    REQUIRE(r.exterior_max.has_value());
    CHECK(*r.exterior_max <= 1e-7);
    CHECK(r.residual <= 1e-8);
    CHECK(r.n_tot == 2 * 220 + 5 * 220);
    CHECK(r.t_factor > 0.0);
}

TEST_CASE("dense and HODLR solves agree") {
    const SceneGeometry pot = build_pot();
    const ScatteringSolver dense(pot, WaveContext(2.0), pot_disc(SolverKind::Dense));
    CHECK(dense.kind() == SolverKind::Dense);
    CHECK(dense.hodlr() == nullptr);
    const ScatteringSolver& fast = pot_solver();
    CHECK(fast.kind() == SolverKind::Hodlr);
    const RightHandSide rhs = rhs_scattering(dense.op(), 1.0);
    const Eigen::VectorXcd a = dense.solve_scaled(rhs.values);
    const Eigen::VectorXcd b = fast.solve_scaled(rhs.values);
    CHECK((a - b).norm() <= 1e-8 * a.norm());
    CHECK((fast.apply(b) - rhs.values).norm() <= 1e-10 * rhs.values.norm());
    // Small systems go to the dense path under Auto.
    const ScatteringSolver chosen(pot, WaveContext(2.0), pot_disc(SolverKind::Auto));
    CHECK(chosen.kind() == SolverKind::Hodlr);
    Discretization tiny = pot_disc(SolverKind::Auto);
    tiny.mesh.n_corner = 1;
    CHECK(ScatteringSolver(pot, WaveContext(2.0), tiny).kind() == SolverKind::Dense);
}

TEST_CASE("zero data gives a zero solution") {
    const ScatteringSolver& s = pot_solver();
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(static_cast<Index>(s.op().size()));
    CHECK(s.solve_scaled(zero).norm() == 0.0);
    CHECK_THROWS_AS(s.solve_scaled(Eigen::VectorXcd(Eigen::VectorXcd::Zero(5))), SolverError);
}

TEST_CASE("far field matches the field at a large radius") {
    const ScatteringSolver& s = pot_solver();
    const double k = 2.0;
    const DensitySolution sol = s.solve(rhs_scattering(s.op(), 0.8));
    for (double theta : {0.3, 1.2, 2.5}) {
        const double r = 2e5;
        const cplx us = eval_scattered_field(sol, {r * std::cos(theta), r * std::sin(theta)},
                                             RegionLabel::ExteriorUpper);
        const cplx approx = us * std::sqrt(r) * std::exp(cplx(0.0, -k * r));
        const cplx uinf = far_field(sol, theta);
        CHECK(std::abs(approx - uinf) <= 1e-4 * std::abs(uinf));
    }
    CHECK_THROWS_AS(far_field(sol, 0.0), ConfigError);
    CHECK_THROWS_AS(far_field(sol, 4.0), ConfigError);
}

TEST_CASE("mirror symmetry of the far field at normal incidence") {
    // The pot is symmetric about x1 = 1/2; moving the mirror line to the origin
    // multiplies the pattern by exp(-ik cos theta).
    const ScatteringSolver& s = pot_solver();
    const double k = 2.0;
    const DensitySolution sol = s.solve(rhs_scattering(s.op(), kPi / 2));
    for (double theta : {0.2, 0.9, 1.4}) {
        const cplx a = far_field(sol, theta);
        const cplx b = far_field(sol, kPi - theta);
        CHECK(std::abs(a - std::exp(cplx(0.0, -k * std::cos(theta))) * b) <= 1e-8 * std::abs(a));
    }
}

TEST_CASE("backscatter RCS") {
    const ScatteringSolver& s = pot_solver();
    const std::vector<double> angles{0.4, kPi - 0.4, 1.0, kPi - 1.0};
    const FarField ff = backscatter_rcs(s, angles);
    REQUIRE(ff.rcs.size() == 4);
    CHECK(ff.rcs[0] == doctest::Approx(ff.rcs[1]).epsilon(1e-8));
    CHECK(ff.rcs[2] == doctest::Approx(ff.rcs[3]).epsilon(1e-8));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ff.rcs[i] == doctest::Approx(4.0 / 2.0 * std::norm(ff.pattern[i])).epsilon(1e-14));
        CHECK(ff.db[i] == doctest::Approx(10.0 * std::log10(ff.rcs[i])).epsilon(1e-14));
    }
    // The batched result equals a single solve followed by the far field at pi - theta.
    const DensitySolution one = s.solve(rhs_scattering(s.op(), 1.0));
    CHECK(std::abs(far_field(one, kPi - 1.0) - ff.pattern[2]) <= 1e-12 * std::abs(ff.pattern[2]));
    CHECK(backscatter_rcs(s, {}).rcs.empty());
}

TEST_CASE("decibel floor") {
    CHECK(rcs_db(1.0) == 0.0);
    CHECK(rcs_db(100.0) == doctest::Approx(20.0));
    CHECK(rcs_db(0.0) == -300.0);
    CHECK(rcs_db(1e-40) == -300.0);
}

TEST_CASE("default angle grid") {
    const auto a = default_angles(360);
    REQUIRE(a.size() == 360);
    CHECK(a.front() == doctest::Approx(0.5 * kPi / 360));
    CHECK(a.back() == doctest::Approx(359.5 * kPi / 360));
    CHECK(default_angles(1).front() == doctest::Approx(kPi / 2));
}

TEST_CASE("sample points respect the keep-out distance") {
    const SceneGeometry pot = build_pot();
    const Mesh& m = pot_solver().mesh();
    double hmin = 1e300;
    for (const auto& p : m.panels) hmin = std::min(hmin, p.length);
    for (RegionLabel region : {RegionLabel::Omega1, RegionLabel::ExteriorUpper}) {
        const auto pts = sample_points(pot, m, region, 25);
        CHECK(pts.size() == 25);
        for (const Point2 q : pts) {
            CHECK(classify_point(pot, q) == region);
            for (std::size_t j = 0; j < m.panel_count(); ++j) {
                CHECK(m.distance_to_panel(q, j) >= std::max(2 * hmin, m.panels[j].length) * (1 - 1e-12));
            }
        }
    }
}

TEST_CASE("field evaluation regions") {
    const SceneGeometry pot = build_pot();
    const ScatteringSolver& s = pot_solver();
    const DensitySolution sol = s.solve(rhs_scattering(s.op(), 1.0));
    CHECK_THROWS_AS(eval_scattered_field(pot, sol, {5.0, -1.0}), GeometryError);
    CHECK_THROWS_AS(eval_scattered_field(pot, sol, {0.0, -0.25}), GeometryError);
    CHECK(std::isfinite(std::abs(eval_scattered_field(pot, sol, {0.5, -1.0}))));
    CHECK(near_boundary(s.mesh(), {0.0, -0.25}));
    CHECK(near_boundary(s.mesh(), {0.001, -0.25}));
    // Panels here are long (about 0.83 on the arc), so even the centre of the pot is near.
    CHECK(near_boundary(s.mesh(), {0.5, -1.0}));
    CHECK_FALSE(near_boundary(s.mesh(), {0.5, 8.0}));
}

TEST_CASE("total field vanishes on the cavity wall") {
    // Just inside the wall the interior representation plus the plane waves is small.
    const SceneGeometry pot = build_pot();
    const ScatteringSolver& s = pot_solver();
    const double theta = 1.0;
    const DensitySolution sol = s.solve(rhs_scattering(s.op(), theta));
    const PlaneWave wave{theta, -1.0};
    const Point2 bottom{0.5, -1.0 - std::sqrt(0.5) + 0.05};
    const cplx total = eval_scattered_field(pot, sol, bottom) + wave.total(2.0, bottom);
    // u vanishes linearly toward the wall; |grad u| is O(k).
    CHECK(std::abs(total) < 0.05 * 2.0 * 2.5);
}
