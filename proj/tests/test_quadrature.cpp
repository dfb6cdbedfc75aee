#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cavity/mesh.hpp"
#include "cavity/quadrature.hpp"
#include "oracle.hpp"

using namespace cavity;

TEST_CASE("Gauss-Legendre small rules") {
    const auto& g1 = gauss_legendre(1);
    REQUIRE(g1.nodes.size() == 1);
    CHECK(g1.nodes[0] == 0.0);
    CHECK(g1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
    const auto& g2 = gauss_legendre(2);
    CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g2.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_legendre(65), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre exactness and symmetry") {
    for (int n : {3, 10, 16, 33, 64}) {
        const auto& g = gauss_legendre(n);
        CHECK(std::is_sorted(g.nodes.begin(), g.nodes.end()));
        const double sum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(g.nodes[i] + g.nodes[n - 1 - i]) < 1e-15);
            CHECK(g.weights[i] > 0.0);
        }
    }
    // The 10-point rule is exact through degree 19.
    const auto& g = gauss_legendre(10);
    double s = 0.0;
    for (int i = 0; i < 10; ++i) s += g.weights[i] * std::pow(g.nodes[i], 18);
    CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
}

TEST_CASE("Lagrange basis reproduces polynomials") {
    const auto& g = gauss_legendre(8);
    const auto bary = barycentric_weights(g.nodes);
    std::vector<double> l(8);
    for (double u : {-0.93, -0.1, 0.0, 0.42, g.nodes[3]}) {
        lagrange_basis(g.nodes, bary, u, l.data());
        double one = 0.0, cubic = 0.0;
        for (int j = 0; j < 8; ++j) {
            one += l[j];
            cubic += l[j] * std::pow(g.nodes[j], 3);
        }
        CHECK(one == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cubic == doctest::Approx(u * u * u).epsilon(1e-13));
    }
}

TEST_CASE("oracle log integrals") {
    const cplx a = oracle_integrate([](double x) { return cplx(std::log(std::abs(x))); }, -1.0, 1.0, 0.0, 1e-13);
    CHECK(std::abs(a - cplx(-2.0)) < 1e-12);
    const cplx b = oracle_integrate([](double x) { return cplx(x * std::log(x)); }, 0.0, 1.0, 0.0, 1e-13);
    CHECK(std::abs(b - cplx(-0.25)) < 1e-12);
    CHECK_THROWS_AS(oracle_integrate([](double) { return cplx(std::nan("")); }, 0.0, 1.0), QuadratureError);
    // Rounding-level noise has no relative accuracy to converge to.
    const cplx z = oracle_integrate([](double x) { return cplx(1e-31 * std::sin(1e7 * x)); }, -1.0, 1.0);
    CHECK(std::abs(z) < 1e-30);
}

TEST_CASE("adaptive rule with a log endpoint") {
    auto f = [](double u, Eigen::Ref<Eigen::VectorXcd> out) {
        out(0) = std::log(u);
        out(1) = cplx(std::cos(3.0 * u), u * u * std::log(u));
    };
    const Eigen::VectorXcd v = adaptive_integrate(f, 2, 0.0, 1.0, true, false);
    CHECK(std::abs(v(0) - cplx(-1.0)) < 1e-13);
    CHECK(std::abs(v(1) - cplx(std::sin(3.0) / 3.0, -1.0 / 9.0)) < 1e-13);

    // Same integral, singular end on the right.
    auto g = [](double u, Eigen::Ref<Eigen::VectorXcd> out) { out(0) = std::log(-u); };
    const Eigen::VectorXcd w = adaptive_integrate(g, 1, -1.0, 0.0, false, true);
    CHECK(std::abs(w(0) - cplx(-1.0)) < 1e-13);

    AdaptiveOptions tight;
    tight.max_depth = 2;
    tight.rel_tol = 1e-15;
    auto rough = [](double u, Eigen::Ref<Eigen::VectorXcd> out) { out(0) = std::abs(u - 0.3137); };
    CHECK_THROWS_AS(adaptive_integrate(rough, 1, 0.0, 1.0, false, false, tight), QuadratureError);
}

TEST_CASE("panel breakpoints") {
    const auto four = panel_breaks(2, 1, true, true);
    CHECK(four == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto eight = panel_breaks(2, 3, true, true);
    REQUIRE(eight.size() == 9);
    CHECK(eight[1] == 0.0625);
    CHECK(eight[2] == 0.125);
    CHECK(eight[7] == 0.9375);
    // Dyadic cascade: each panel toward the corner halves, down to two equal innermost panels.
    const auto c = panel_breaks(4, 5, true, false);
    CHECK(c[1] - c[0] == doctest::Approx(c[2] - c[1]));
    for (int i = 2; i <= 5; ++i) CHECK(c[i + 1] - c[i] == doctest::Approx(2.0 * (c[i] - c[i - 1])));
    CHECK(c.size() == 4 + 5 + 1);
    CHECK(panel_breaks(3, 0, true, true) == std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0});
    // One panel with two corners is split in half first.
    CHECK(panel_breaks(1, 1, true, true).size() == 5);
    CHECK_THROWS_AS(panel_breaks(0, 2, true, true), ConfigError);
    CHECK_THROWS_AS(panel_breaks(2, -1, true, true), ConfigError);
}

TEST_CASE("automatic panel count") {
    // p = 10 gives panels of a fifth of a wavelength.
    CHECK(auto_panel_count(kPi, 2.0, 10) == 5);
    CHECK(auto_panel_count(1e-3, 1.0, 10) == 1);
    CHECK_THROWS_AS(auto_panel_count(1.0, 0.0, 10), ConfigError);
}

TEST_CASE("mesh invariants") {
    const SceneGeometry pot = build_pot();
    MeshParams mp;
    mp.n_mid = 3;
    mp.n_corner = 4;
    mp.p = 8;
    const Mesh m = generate_mesh(pot, mp);
    CHECK(m.panel_count() == 6 * (3 + 2 * 4));
    CHECK(m.node_count() == m.panel_count() * 8);
    CHECK(m.gamma1_nodes == (3 + 2 * 4) * 8);
    CHECK(m.segments.front().component == Component::Gamma1);
    CHECK(m.segments[1].component == Component::BLeft);
    CHECK(m.segments.back().component == Component::BRight);

    for (std::size_t s = 0; s < m.segments.size(); ++s) {
        const auto& ms = m.segments[s];
        double sum = 0.0;
        for (std::size_t j = ms.first_panel; j < ms.first_panel + ms.panel_count; ++j) {
            for (int q = 0; q < m.p; ++q) sum += m.w[m.panels[j].first_node + q];
        }
        CHECK(sum == doctest::Approx(ms.curve.length()).epsilon(1e-13));
    }
    for (std::size_t i = 0; i < m.node_count(); ++i) {
        CHECK(m.w[i] > 0.0);
        CHECK(std::abs(norm(m.normal[i]) - 1.0) < 1e-14);
    }
    // Outward normals: away from the centre on the pot's circle and on the dome.
    for (std::size_t i = 0; i < m.node_count(); ++i) {
        const std::size_t seg = m.panels[m.node_panel[i]].segment;
        if (seg == 0) CHECK(dot(m.normal[i], m.x[i] - Point2{0.5, 0.0}) == doctest::Approx(2.5));
        if (seg == 3) CHECK(dot(m.normal[i], m.x[i] - Point2{0.5, -1.0}) == doctest::Approx(std::sqrt(0.5)));
    }

    MeshParams bad = mp;
    bad.p = 3;
    CHECK_THROWS_AS(generate_mesh(pot, bad), ConfigError);
    bad = mp;
    bad.n_corner = 41;
    CHECK_THROWS_AS(generate_mesh(pot, bad), ConfigError);
    bad = mp;
    bad.n_mid = 0;
    CHECK_THROWS_AS(generate_mesh(pot, bad), ConfigError);
    bad.wavenumber = 10.0;
    CHECK_NOTHROW(generate_mesh(pot, bad));
}

TEST_CASE("pair classification") {
    const SceneGeometry pot = build_pot();
    MeshParams mp;
    mp.n_mid = 4;
    mp.n_corner = 3;
    const Mesh m = generate_mesh(pot, mp);
    const std::size_t a = m.segments[2].first_panel + 1;
    CHECK(m.classify_pair(a, a, 1.0, false) == PairClass::Self);
    CHECK(m.classify_pair(a, a + 1, 1.0, false) == PairClass::Adjacent);
    CHECK(m.classify_pair(a, a - 1, 1.0, false) == PairClass::Adjacent);
    // Panels on opposite walls of the pot are far apart.
    const std::size_t opposite = m.segments[4].first_panel + 1;
    CHECK(m.classify_pair(a, opposite, 1.0, false) == PairClass::Far);
    // The last panel of B_left and the first of Gamma meet at the aperture corner.
    const std::size_t bl_last = m.segments[1].first_panel + m.segments[1].panel_count - 1;
    CHECK(m.classify_pair(bl_last, m.segments[2].first_panel, 1.0, false) == PairClass::Adjacent);
    CHECK(m.junction(1, 2).has_value());
    CHECK_FALSE(m.junction(2, 4).has_value());
}

TEST_CASE("flat panels have a vanishing double layer") {
    const SceneGeometry pot = build_pot();
    MeshParams mp;
    mp.n_mid = 2;
    mp.n_corner = 2;
    const Mesh m = generate_mesh(pot, mp);
    const std::size_t j = m.segments[2].first_panel + 2;
    const Eigen::MatrixXcd d = singular_block(m, 3.0, j, {KernelKind::D, KernelSpace::Free});
    CHECK(d.cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(adjacent_block(m, 3.0, j, j + 3, {KernelKind::S, KernelSpace::Free}), std::invalid_argument);
}

TEST_CASE("corrected blocks agree with the Gauss-Kronrod oracle") {
    const double k = 10.0;
    const SceneGeometry pot = build_pot();
    MeshParams mp;
    mp.n_mid = 3;
    mp.n_corner = 2;
    const Mesh m = generate_mesh(pot, mp);
    const std::size_t arc = m.segments[3].first_panel + m.segments[3].panel_count / 2;
    const std::size_t dome = m.segments[0].panel_count / 2;

    auto check = [&](std::size_t t, std::size_t s, PairClass cls, KernelTerm term) {
        const oracle::BlockCheck r = oracle::check_block(m, k, t, s, cls, term);
        CHECK(r.err <= 1e-10 * std::max(1.0, r.scale));
    };
    SUBCASE("self") {
        check(arc, arc, PairClass::Self, {KernelKind::S, KernelSpace::Free});
        check(arc, arc, PairClass::Self, {KernelKind::D, KernelSpace::Free});
        check(dome, dome, PairClass::Self, {KernelKind::S, KernelSpace::Free});
        check(dome, dome, PairClass::Self, {KernelKind::D, KernelSpace::Free});
    }
    SUBCASE("adjacent, within and across segments") {
        check(arc, arc + 1, PairClass::Adjacent, {KernelKind::D, KernelSpace::Free});
        check(arc + 1, arc, PairClass::Adjacent, {KernelKind::D, KernelSpace::Free});
        const std::size_t wall_end = m.segments[2].first_panel + m.segments[2].panel_count - 1;
        check(wall_end, m.segments[3].first_panel, PairClass::Adjacent, {KernelKind::D, KernelSpace::Free});
        check(m.segments[3].first_panel, wall_end, PairClass::Adjacent, {KernelKind::D, KernelSpace::Free});
    }
    SUBCASE("near, free and half-space") {
        check(arc, arc + 2, PairClass::Near, {KernelKind::D, KernelSpace::Free});
        check(arc, dome, PairClass::Near, {KernelKind::S, KernelSpace::Half});
        check(arc, dome, PairClass::Near, {KernelKind::D, KernelSpace::Half});
    }
}
