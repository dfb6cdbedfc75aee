#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cavity/assembly.hpp"
#include "cavity/hodlr.hpp"

using namespace cavity;

namespace {

Eigen::MatrixXcd random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) a(i, j) = cplx(g(rng), g(rng));
    }
    return a;
}

EntryFn from_dense(const Eigen::MatrixXcd& a) {
    return [&a](std::size_t i, std::size_t j) { return a(static_cast<Index>(i), static_cast<Index>(j)); };
}

Index max_rank(const HodlrMatrix& h) {
    Index r = 0;
    for (const auto& lv : h.rank_report()) r = std::max(r, lv.max_rank);
    return r;
}

}  // namespace

TEST_CASE("identity has rank-zero off-diagonal blocks") {
    const EntryFn id = [](std::size_t i, std::size_t j) { return cplx(i == j ? 1.0 : 0.0); };
    const HodlrMatrix h = HodlrMatrix::build(id, 1024, {64, 1e-12});
    CHECK(h.depth() == 4);
    CHECK(max_rank(h) == 0);
    const HodlrFactorization f(h);
    const Eigen::VectorXcd b = random_matrix(1024, 1, 1).col(0);
    CHECK((f.solve(b) - b).norm() <= 1e-15 * b.norm());
}

TEST_CASE("rank-3 perturbation of the identity") {
    const Index n = 600;
    const Eigen::MatrixXcd u = random_matrix(n, 3, 2), v = random_matrix(n, 3, 3);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) * 10.0 + u * v.transpose();
    const HodlrMatrix h = HodlrMatrix::build(from_dense(a), n, {50, 1e-12});
    CHECK(max_rank(h) <= 3);
    CHECK((h.to_dense() - a).norm() <= 1e-13 * a.norm());
}

TEST_CASE("direct ACA of a smooth kernel block") {
    // 1 / (1 + |x - y|) on well-separated point sets has rapidly decaying singular values.
    const EntryFn f = [](std::size_t i, std::size_t j) {
        const double x = static_cast<double>(i) / 300.0;
        const double y = 3.0 + static_cast<double>(j) / 300.0;
        return cplx(1.0 / (1.0 + std::abs(x - y)), 0.0);
    };
    const LowRankBlock b = aca(f, 0, 300, 0, 250, 1e-10);
    Eigen::MatrixXcd exact(300, 250);
    for (Index i = 0; i < 300; ++i) {
        for (Index j = 0; j < 250; ++j) exact(i, j) = f(i, j);
    }
    CHECK(b.rank() < 15);
    CHECK_FALSE(b.dense_fallback);
    CHECK((b.dense() - exact).norm() <= 1e-9 * exact.norm());
}

TEST_CASE("random plus identity is solved to the compression tolerance") {
    // Full-rank off-diagonal blocks exercise the exact fallback path.
    const Index n = 512;
    const Eigen::MatrixXcd a = random_matrix(n, n, 4) / std::sqrt(static_cast<double>(n)) +
                               4.0 * Eigen::MatrixXcd::Identity(n, n);
    const HodlrMatrix h = HodlrMatrix::build(from_dense(a), n, {64, 1e-12});
    const HodlrFactorization f(h);
    const Eigen::VectorXcd b = random_matrix(n, 1, 5).col(0);
    const Eigen::VectorXcd x = f.solve(b);
    const Eigen::VectorXcd ref = a.partialPivLu().solve(b);
    CHECK((x - ref).norm() <= 1e-9 * ref.norm());
}

TEST_CASE("diagonal matrix") {
    const EntryFn d = [](std::size_t i, std::size_t j) { return cplx(i == j ? 1.0 + i : 0.0, 0.0); };
    const HodlrMatrix h = HodlrMatrix::build(d, 300, {32, 1e-10});
    const HodlrFactorization f(h);
    Eigen::VectorXcd b = Eigen::VectorXcd::Ones(300);
    const Eigen::VectorXcd x = f.solve(b);
    for (Index i = 0; i < 300; ++i) CHECK(std::abs(x[i] - 1.0 / (1.0 + i)) < 1e-15);
}

TEST_CASE("HODLR of the cavity operator") {
    const SceneGeometry pot = build_pot();
    MeshParams mp;
    mp.n_mid = 3;
    mp.n_corner = 4;
    const Mesh m = generate_mesh(pot, mp);
    const SystemOperator op(m, WaveContext(3.0));
    const Eigen::MatrixXcd a = assemble_dense(op);
    const auto n = op.size();
    const HodlrMatrix h =
        HodlrMatrix::build([&op](std::size_t i, std::size_t j) { return op.entry(i, j); }, n, {100, 1e-10});
    const HodlrFactorization f(h);

    for (unsigned s = 0; s < 5; ++s) {
        const Eigen::VectorXcd x = random_matrix(static_cast<Index>(n), 1, 10 + s).col(0);
        const Eigen::VectorXcd ax = a * x;
        CHECK((h.matvec(x) - ax).norm() <= 1e-9 * ax.norm());
        CHECK((f.apply_factors(x) - ax).norm() <= 1e-9 * ax.norm());
        const Eigen::VectorXcd y = f.solve(ax);
        CHECK((y - x).norm() <= 1e-8 * x.norm());
    }
    // Block solves agree with column-by-column solves.
    const Eigen::MatrixXcd b = random_matrix(static_cast<Index>(n), 3, 20);
    const Eigen::MatrixXcd xb = f.solve(b);
    for (Index c = 0; c < 3; ++c) {
        const Eigen::VectorXcd col = b.col(c);
        CHECK((xb.col(c) - f.solve(col)).norm() <= 1e-14 * xb.col(c).norm());
    }
    for (const auto& lv : h.rank_report()) {
        CHECK(lv.blocks == (std::size_t{2} << lv.level));
        CHECK(lv.mean_rank <= static_cast<double>(lv.max_rank));
    }
}

TEST_CASE("dimension and option errors") {
    const EntryFn id = [](std::size_t i, std::size_t j) { return cplx(i == j ? 1.0 : 0.0); };
    const HodlrMatrix h = HodlrMatrix::build(id, 100, {16, 1e-10});
    const HodlrFactorization f(h);
    CHECK_THROWS_AS(h.matvec(Eigen::VectorXcd::Ones(99)), SolverError);
    CHECK_THROWS_AS(f.solve(Eigen::VectorXcd(Eigen::VectorXcd::Ones(101))), SolverError);
    CHECK_THROWS_AS(f.solve(Eigen::MatrixXcd(Eigen::MatrixXcd::Ones(101, 2))), SolverError);
    CHECK_THROWS_AS(f.apply_factors(Eigen::VectorXcd::Ones(3)), SolverError);
    CHECK_THROWS_AS(HodlrMatrix::build(id, 0), ConfigError);
    CHECK_THROWS_AS(HodlrMatrix::build(id, 100, {16, 1e-15}), ConfigError);
    CHECK_THROWS_AS(HodlrMatrix::build(id, 100, {16, 0.1}), ConfigError);
    CHECK_THROWS_AS(HodlrMatrix::build(id, 100, {0, 1e-10}), ConfigError);

    const EntryFn zero = [](std::size_t, std::size_t) { return cplx(0.0); };
    const HodlrMatrix hz = HodlrMatrix::build(zero, 100, {16, 1e-10});
    CHECK_THROWS_AS(HodlrFactorization{hz}, SolverError);
}

TEST_CASE("small matrices stay a single leaf") {
    const Eigen::MatrixXcd a = random_matrix(50, 50, 30) + 5.0 * Eigen::MatrixXcd::Identity(50, 50);
    const HodlrMatrix h = HodlrMatrix::build(from_dense(a), 50, {200, 1e-10});
    CHECK(h.depth() == 0);
    CHECK(h.nodes().size() == 1);
    CHECK((h.to_dense() - a).norm() == 0.0);
}
