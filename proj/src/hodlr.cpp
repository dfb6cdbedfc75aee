#include "cavity/hodlr.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <string>

namespace cavity {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat evaluate_block(const EntryFn& entry, std::size_t r0, std::size_t m, std::size_t c0, std::size_t n) {
    Mat a(static_cast<Index>(m), static_cast<Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) a(static_cast<Index>(i), static_cast<Index>(j)) = entry(r0 + i, c0 + j);
    }
    return a;
}

LowRankBlock exact_block(const EntryFn& entry, std::size_t r0, std::size_t m, std::size_t c0, std::size_t n) {
    LowRankBlock b;
    b.dense_fallback = true;
    const Mat a = evaluate_block(entry, r0, m, c0, n);
    if (n <= m) {
        b.U = a;
        b.V = Mat::Identity(static_cast<Index>(n), static_cast<Index>(n));
    } else {
        b.U = Mat::Identity(static_cast<Index>(m), static_cast<Index>(m));
        b.V = a.transpose();
    }
    return b;
}

// U V^T -> thinner U V^T, dropping the singular tail below tol in relative Frobenius norm.
void recompress(LowRankBlock& b, double tol) {
    const Index r = b.U.cols();
    if (r == 0) return;
    Eigen::HouseholderQR<Mat> qu(b.U), qv(b.V);
    const Mat ru = qu.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    const Mat rv = qv.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Mat> svd(ru * rv.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double total = s.squaredNorm();
    Index keep = r;
    double tail = 0.0;
    while (keep > 0 && tail + s[keep - 1] * s[keep - 1] <= tol * tol * total) {
        tail += s[keep - 1] * s[keep - 1];
        --keep;
    }
    Mat u = Mat::Zero(b.U.rows(), keep);
    u.topRows(r) = svd.matrixU().leftCols(keep) * s.head(keep).asDiagonal();
    u.applyOnTheLeft(qu.householderQ());
    Mat v = Mat::Zero(b.V.rows(), keep);
    v.topRows(r) = svd.matrixV().leftCols(keep).conjugate();
    v.applyOnTheLeft(qv.householderQ());
    b.U = std::move(u);
    b.V = std::move(v);
}

}  // namespace

LowRankBlock aca(const EntryFn& entry, std::size_t r0, std::size_t m, std::size_t c0, std::size_t n,
                 double tol) {
    // The update-norm stopping test underestimates the remaining error by up
    // to an order of magnitude, so cross approximation runs to tol / 10 and
    // the SVD recompression brings the rank back down to what tol needs.
    const double target = tol;
    tol = 0.1 * tol;
    LowRankBlock out;
    const std::size_t cap = std::min(m, n) / 2;
    if (m == 0 || n == 0) {
        out.U.resize(static_cast<Index>(m), 0);
        out.V.resize(static_cast<Index>(n), 0);
        return out;
    }
    if (cap == 0) return exact_block(entry, r0, m, c0, n);

    std::vector<Vec> us, vs;
    std::vector<char> row_used(m, 0), col_used(n, 0);
    double frob2 = 0.0;
    Vec row(static_cast<Index>(n)), col(static_cast<Index>(m));

    auto residual_row = [&](std::size_t i, Vec& r) {
        for (std::size_t j = 0; j < n; ++j) r[static_cast<Index>(j)] = entry(r0 + i, c0 + j);
        for (std::size_t k = 0; k < us.size(); ++k) r -= us[k][static_cast<Index>(i)] * vs[k];
    };
    auto residual_col = [&](std::size_t j, Vec& c) {
        for (std::size_t i = 0; i < m; ++i) c[static_cast<Index>(i)] = entry(r0 + i, c0 + j);
        for (std::size_t k = 0; k < us.size(); ++k) c -= vs[k][static_cast<Index>(j)] * us[k];
    };
    auto argmax_unused = [](const Vec& v, const std::vector<char>& used) {
        Index best = -1;
        double mag = -1.0;
        for (Index i = 0; i < v.size(); ++i) {
            if (!used[static_cast<std::size_t>(i)] && std::abs(v[i]) > mag) {
                mag = std::abs(v[i]);
                best = i;
            }
        }
        return best;
    };
    // Evenly spaced probe rows and columns, evaluated once when the pivots
    // first settle and downdated with every new cross after that. A probe
    // whose residual alone exceeds the target means part of the block is
    // still unresolved, as happens for blocks with zero sub-blocks.
    const std::size_t np = std::min<std::size_t>(32, m), nq = std::min<std::size_t>(32, n);
    std::vector<std::size_t> probe_rows(np), probe_cols(nq);
    for (std::size_t s = 0; s < np; ++s) probe_rows[s] = (2 * s + 1) * m / (2 * np);
    for (std::size_t s = 0; s < nq; ++s) probe_cols[s] = (2 * s + 1) * n / (2 * nq);
    Mat pr, pc;  // residual probe rows (np x n) and columns (m x nq)
    bool probes_ready = false;
    auto downdate = [&](const Vec& u, const Vec& v) {
        if (!probes_ready) return;
        for (std::size_t s = 0; s < np; ++s) pr.row(static_cast<Index>(s)) -= u[static_cast<Index>(probe_rows[s])] * v.transpose();
        for (std::size_t s = 0; s < nq; ++s) pc.col(static_cast<Index>(s)) -= v[static_cast<Index>(probe_cols[s])] * u;
    };
    auto probe = [&]() -> Index {
        if (!probes_ready) {
            pr.resize(static_cast<Index>(np), static_cast<Index>(n));
            pc.resize(static_cast<Index>(m), static_cast<Index>(nq));
            Vec tmp_r(static_cast<Index>(n)), tmp_c(static_cast<Index>(m));
            for (std::size_t s = 0; s < np; ++s) {
                residual_row(probe_rows[s], tmp_r);
                pr.row(static_cast<Index>(s)) = tmp_r.transpose();
            }
            for (std::size_t s = 0; s < nq; ++s) {
                residual_col(probe_cols[s], tmp_c);
                pc.col(static_cast<Index>(s)) = tmp_c;
            }
            probes_ready = true;
        }
        const double limit = tol * std::sqrt(frob2);
        Index best = -1;
        double worst = limit;
        for (std::size_t s = 0; s < np; ++s) {
            const double r = pr.row(static_cast<Index>(s)).norm();
            if (!row_used[probe_rows[s]] && r > worst) {
                worst = r;
                best = static_cast<Index>(probe_rows[s]);
            }
        }
        for (std::size_t s = 0; s < nq; ++s) {
            const double c = pc.col(static_cast<Index>(s)).norm();
            if (!col_used[probe_cols[s]] && c > worst) {
                const Index i = argmax_unused(pc.col(static_cast<Index>(s)), row_used);
                if (i >= 0) {
                    worst = c;
                    best = i;
                }
            }
        }
        return best;
    };

    std::size_t i = 0;
    std::size_t scan = 0;  // sequential cursor while no pivot has been found
    while (true) {
        residual_row(i, row);
        row_used[i] = 1;
        const Index j = argmax_unused(row, col_used);
        const double pivot = j >= 0 ? std::abs(row[j]) : 0.0;
        if (pivot == 0.0 || (frob2 > 0.0 && row.norm() <= tol * std::sqrt(frob2))) {
            Index next = -1;
            if (frob2 == 0.0) {
                while (scan < m && row_used[scan]) ++scan;
                if (scan < m) next = static_cast<Index>(scan);
            } else {
                next = probe();
            }
            if (next < 0) break;
            i = static_cast<std::size_t>(next);
            continue;
        }
        residual_col(static_cast<std::size_t>(j), col);
        col /= row[j];
        col_used[static_cast<std::size_t>(j)] = 1;

        // ||S + u v^T||_F^2 = ||S||^2 + 2 Re sum_k (u_k^H u)(v_k^H v) + |u|^2 |v|^2
        cplx cross_terms = 0.0;
        for (std::size_t k = 0; k < us.size(); ++k) cross_terms += us[k].dot(col) * vs[k].dot(row);
        const double uv = col.norm() * row.norm();
        frob2 = std::max(0.0, frob2 + 2.0 * cross_terms.real() + uv * uv);
        us.push_back(col);
        vs.push_back(row);
        downdate(col, row);
        out.achieved_tol = frob2 > 0.0 ? uv / std::sqrt(frob2) : 0.0;

        if (us.size() > cap) return exact_block(entry, r0, m, c0, n);

        Index next = -1;
        if (uv <= tol * std::sqrt(frob2)) {
            next = probe();
            if (next < 0) break;
        } else {
            next = argmax_unused(col, row_used);
            if (next < 0) break;
        }
        i = static_cast<std::size_t>(next);
    }

    const Index r = static_cast<Index>(us.size());
    out.U.resize(static_cast<Index>(m), r);
    out.V.resize(static_cast<Index>(n), r);
    for (Index k = 0; k < r; ++k) {
        out.U.col(k) = us[static_cast<std::size_t>(k)];
        out.V.col(k) = vs[static_cast<std::size_t>(k)];
    }
    recompress(out, target);
    return out;
}

HodlrMatrix HodlrMatrix::build(const EntryFn& entry, std::size_t n, const HodlrOptions& opts) {
    if (n < 1) throw ConfigError("HODLR matrix needs at least one row");
    if (!(opts.tol >= 1e-14 && opts.tol <= 1e-2)) throw ConfigError("ACA tolerance must lie in [1e-14, 1e-2]");
    if (opts.leaf_size < 1) throw ConfigError("leaf size must be positive");
    const auto start = std::chrono::steady_clock::now();

    HodlrMatrix h;
    h.n_ = n;
    h.opts_ = opts;
    h.depth_ = n > opts.leaf_size
                   ? static_cast<int>(std::floor(std::log2(static_cast<double>(n) / opts.leaf_size)))
                   : 0;

    h.nodes_.push_back({0, n, 0, -1, -1, {}, {}, {}});
    for (std::size_t id = 0; id < h.nodes_.size(); ++id) {
        if (h.nodes_[id].level == h.depth_) continue;
        const std::size_t b = h.nodes_[id].begin, e = h.nodes_[id].end;
        const std::size_t mid = b + (e - b + 1) / 2;
        const int lvl = h.nodes_[id].level + 1;
        h.nodes_[id].left = static_cast<int>(h.nodes_.size());
        h.nodes_.push_back({b, mid, lvl, -1, -1, {}, {}, {}});
        h.nodes_[id].right = static_cast<int>(h.nodes_.size());
        h.nodes_.push_back({mid, e, lvl, -1, -1, {}, {}, {}});
    }

    std::exception_ptr failure;
    const std::size_t count = h.nodes_.size();
#pragma omp parallel for schedule(dynamic)
    for (std::size_t id = 0; id < count; ++id) {
        try {
            HodlrNode& nd = h.nodes_[id];
            if (nd.is_leaf()) {
                nd.dense = evaluate_block(entry, nd.begin, nd.size(), nd.begin, nd.size());
            } else {
                const HodlrNode& l = h.nodes_[static_cast<std::size_t>(nd.left)];
                const HodlrNode& r = h.nodes_[static_cast<std::size_t>(nd.right)];
                nd.upper = aca(entry, l.begin, l.size(), r.begin, r.size(), opts.tol);
                nd.lower = aca(entry, r.begin, r.size(), l.begin, l.size(), opts.tol);
            }
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    h.build_seconds_ = seconds_since(start);
    return h;
}

void HodlrMatrix::matvec_node(int id, const Eigen::Ref<const Vec>& x, Eigen::Ref<Vec> y) const {
    const HodlrNode& nd = nodes_[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) {
        y.noalias() += nd.dense * x;
        return;
    }
    const auto nl = static_cast<Index>(nodes_[static_cast<std::size_t>(nd.left)].size());
    const auto nr = static_cast<Index>(nodes_[static_cast<std::size_t>(nd.right)].size());
    matvec_node(nd.left, x.head(nl), y.head(nl));
    matvec_node(nd.right, x.tail(nr), y.tail(nr));
    y.head(nl).noalias() += nd.upper.U * (nd.upper.V.transpose() * x.tail(nr));
    y.tail(nr).noalias() += nd.lower.U * (nd.lower.V.transpose() * x.head(nl));
}

Vec HodlrMatrix::matvec(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != n_) throw SolverError("matvec: dimension mismatch");
    Vec y = Vec::Zero(x.size());
    matvec_node(0, x, y);
    return y;
}

Mat HodlrMatrix::to_dense() const {
    Mat a(static_cast<Index>(n_), static_cast<Index>(n_));
    for (const HodlrNode& nd : nodes_) {
        const auto b = static_cast<Index>(nd.begin);
        if (nd.is_leaf()) {
            a.block(b, b, nd.dense.rows(), nd.dense.cols()) = nd.dense;
            continue;
        }
        const HodlrNode& l = nodes_[static_cast<std::size_t>(nd.left)];
        const HodlrNode& r = nodes_[static_cast<std::size_t>(nd.right)];
        const auto nl = static_cast<Index>(l.size()), nr = static_cast<Index>(r.size());
        a.block(b, b + nl, nl, nr) = nd.upper.dense();
        a.block(b + nl, b, nr, nl) = nd.lower.dense();
    }
    return a;
}

std::vector<LevelRanks> HodlrMatrix::rank_report() const {
    std::vector<LevelRanks> out(static_cast<std::size_t>(depth_));
    for (int l = 0; l < depth_; ++l) out[static_cast<std::size_t>(l)].level = l;
    for (const HodlrNode& nd : nodes_) {
        if (nd.is_leaf()) continue;
        LevelRanks& lr = out[static_cast<std::size_t>(nd.level)];
        for (const LowRankBlock* b : {&nd.upper, &nd.lower}) {
            ++lr.blocks;
            lr.max_rank = std::max(lr.max_rank, b->rank());
            lr.mean_rank += static_cast<double>(b->rank());
            if (b->dense_fallback) ++lr.dense_fallbacks;
        }
    }
    for (LevelRanks& lr : out) {
        if (lr.blocks > 0) lr.mean_rank /= static_cast<double>(lr.blocks);
    }
    return out;
}

// ---------------------------------------------------------------- factorization

HodlrFactorization::HodlrFactorization(const HodlrMatrix& a) : a_(&a), f_(a.nodes().size()) {
    const auto start = std::chrono::steady_clock::now();
    const auto& nodes = a.nodes();
    std::vector<std::vector<int>> by_level(static_cast<std::size_t>(a.depth()) + 1);
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        by_level[static_cast<std::size_t>(nodes[id].level)].push_back(static_cast<int>(id));
    }

    for (int lvl = a.depth(); lvl >= 0; --lvl) {
        const auto& ids = by_level[static_cast<std::size_t>(lvl)];
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (std::size_t q = 0; q < ids.size(); ++q) {
            try {
                const int id = ids[q];
                const HodlrNode& nd = nodes[static_cast<std::size_t>(id)];
                NodeFactor& f = f_[static_cast<std::size_t>(id)];
                if (nd.is_leaf()) {
                    f.leaf_lu.compute(nd.dense);
                    if (!(f.leaf_lu.rcond() > 1e-14)) {
                        throw SolverError("singular leaf block at node " + std::to_string(id) + " [" +
                                          std::to_string(nd.begin) + ", " + std::to_string(nd.end) + ")");
                    }
                    continue;
                }
                f.ut_left = nd.upper.U;
                solve_node(nd.left, f.ut_left);
                f.ut_right = nd.lower.U;
                solve_node(nd.right, f.ut_right);
                const Index r1 = nd.upper.rank(), r2 = nd.lower.rank();
                Mat k = Mat::Identity(r1 + r2, r1 + r2);
                k.topRightCorner(r1, r2) = nd.upper.V.transpose() * f.ut_right;
                k.bottomLeftCorner(r2, r1) = nd.lower.V.transpose() * f.ut_left;
                f.k_lu.compute(k);
                if (r1 + r2 > 0 && !(f.k_lu.rcond() > 1e-14)) {
                    throw SolverError("singular coupling matrix at node " + std::to_string(id));
                }
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    seconds_ = seconds_since(start);
}

void HodlrFactorization::solve_node(int id, Eigen::Ref<Mat> x) const {
    const HodlrNode& nd = a_->nodes()[static_cast<std::size_t>(id)];
    const NodeFactor& f = f_[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) {
        x = f.leaf_lu.solve(x);
        return;
    }
    const Index nl = f.ut_left.rows(), nr = f.ut_right.rows();
    solve_node(nd.left, x.topRows(nl));
    solve_node(nd.right, x.bottomRows(nr));
    const Index r1 = nd.upper.rank(), r2 = nd.lower.rank();
    if (r1 + r2 == 0) return;
    Mat z(r1 + r2, x.cols());
    z.topRows(r1) = nd.upper.V.transpose() * x.bottomRows(nr);
    z.bottomRows(r2) = nd.lower.V.transpose() * x.topRows(nl);
    z = f.k_lu.solve(z);
    x.topRows(nl).noalias() -= f.ut_left * z.topRows(r1);
    x.bottomRows(nr).noalias() -= f.ut_right * z.bottomRows(r2);
}

Mat HodlrFactorization::solve(const Mat& b) const {
    if (static_cast<std::size_t>(b.rows()) != size()) throw SolverError("solve: dimension mismatch");
    Mat x = b;
    solve_node(0, x);
    return x;
}

Vec HodlrFactorization::solve(const Vec& b) const {
    if (static_cast<std::size_t>(b.size()) != size()) throw SolverError("solve: dimension mismatch");
    Mat x = b;
    solve_node(0, x);
    return x.col(0);
}

void HodlrFactorization::apply_update(int id, Eigen::Ref<Vec> x) const {
    const HodlrNode& nd = a_->nodes()[static_cast<std::size_t>(id)];
    const NodeFactor& f = f_[static_cast<std::size_t>(id)];
    const Index nl = f.ut_left.rows(), nr = f.ut_right.rows();
    const Vec top = nd.upper.V.transpose() * x.tail(nr);
    const Vec bottom = nd.lower.V.transpose() * x.head(nl);
    x.head(nl).noalias() += f.ut_left * top;
    x.tail(nr).noalias() += f.ut_right * bottom;
}

Vec HodlrFactorization::apply_factors(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != size()) throw SolverError("apply_factors: dimension mismatch");
    Vec y = x;
    const auto& nodes = a_->nodes();
    for (int lvl = 0; lvl <= a_->depth(); ++lvl) {
        for (std::size_t id = 0; id < nodes.size(); ++id) {
            const HodlrNode& nd = nodes[id];
            if (nd.level != lvl) continue;
            auto seg = y.segment(static_cast<Index>(nd.begin), static_cast<Index>(nd.size()));
            if (nd.is_leaf()) {
                seg = (nd.dense * seg).eval();
            } else {
                apply_update(static_cast<int>(id), seg);
            }
        }
    }
    return y;
}

}  // namespace cavity
