#pragma once

// HODLR matrices: recursive bisection with low-rank off-diagonal blocks,
// compressed by partially pivoted adaptive cross approximation, and a direct
// solver built from nested Sherman-Morrison-Woodbury updates.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cavity/types.hpp"

namespace cavity {

using EntryFn = std::function<cplx(std::size_t, std::size_t)>;

struct HodlrOptions {
    std::size_t leaf_size = 200;
    double tol = 1e-10;  // ACA and recompression tolerance, in [1e-14, 1e-2]
};

/// Block approximated as U V^T (plain transpose). A block whose ACA hit the
/// rank cap is stored exactly, as (A, I) or (I, A^T).
struct LowRankBlock {
    Eigen::MatrixXcd U;
    Eigen::MatrixXcd V;
    bool dense_fallback = false;
    /// Last ACA update norm relative to the approximant's Frobenius norm.
    double achieved_tol = 0.0;

    Index rank() const { return U.cols(); }
    Eigen::MatrixXcd dense() const { return U * V.transpose(); }
};

/// Partially pivoted ACA of the block rows [r0, r0 + m) x cols [c0, c0 + n),
/// starting from the block's first row, followed by QR/SVD recompression.
LowRankBlock aca(const EntryFn& entry, std::size_t r0, std::size_t m, std::size_t c0, std::size_t n,
                 double tol);

struct HodlrNode {
    std::size_t begin = 0, end = 0;  // index range
    int level = 0;
    int left = -1, right = -1;  // children, -1 for a leaf
    LowRankBlock upper;          // rows of left child x cols of right child
    LowRankBlock lower;          // rows of right child x cols of left child
    Eigen::MatrixXcd dense;      // leaves only

    bool is_leaf() const { return left < 0; }
    std::size_t size() const { return end - begin; }
};

struct LevelRanks {
    int level = 0;
    std::size_t blocks = 0;
    Index max_rank = 0;
    double mean_rank = 0.0;
    std::size_t dense_fallbacks = 0;
};

class HodlrMatrix {
  public:
    /// Depth floor(log2(n / leaf_size)); ranges split as evenly as possible.
    static HodlrMatrix build(const EntryFn& entry, std::size_t n, const HodlrOptions& opts = {});

    std::size_t size() const { return n_; }
    int depth() const { return depth_; }
    const std::vector<HodlrNode>& nodes() const { return nodes_; }
    const HodlrOptions& options() const { return opts_; }
    double build_seconds() const { return build_seconds_; }

    Eigen::VectorXcd matvec(const Eigen::VectorXcd& x) const;
    Eigen::MatrixXcd to_dense() const;
    std::vector<LevelRanks> rank_report() const;

  private:
    std::size_t n_ = 0;
    int depth_ = 0;
    HodlrOptions opts_;
    std::vector<HodlrNode> nodes_;  // nodes_[0] is the root; children after parents
    double build_seconds_ = 0.0;

    void matvec_node(int id, const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) const;
};

/// A = A_kappa ... A_1 A_0: the leaf blocks times, for each level, a block
/// diagonal of identity-plus-low-rank factors I + Ut Vh^T.
class HodlrFactorization {
  public:
    explicit HodlrFactorization(const HodlrMatrix& a);

    std::size_t size() const { return a_->size(); }
    double seconds() const { return seconds_; }

    /// Solves A X = B column by column. Throws SolverError on a size mismatch.
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& b) const;
    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;

    /// Multiplies by the factor chain, which reproduces A x to the compression tolerance.
    Eigen::VectorXcd apply_factors(const Eigen::VectorXcd& x) const;

  private:
    struct NodeFactor {
        Eigen::PartialPivLU<Eigen::MatrixXcd> leaf_lu;
        Eigen::MatrixXcd ut_left;   // A_left^{-1} upper.U
        Eigen::MatrixXcd ut_right;  // A_right^{-1} lower.U
        Eigen::PartialPivLU<Eigen::MatrixXcd> k_lu;  // I + Vh^T Ut
    };

    const HodlrMatrix* a_;
    std::vector<NodeFactor> f_;
    double seconds_ = 0.0;

    void solve_node(int id, Eigen::Ref<Eigen::MatrixXcd> x) const;
    void apply_update(int id, Eigen::Ref<Eigen::VectorXcd> x) const;
};

}  // namespace cavity
