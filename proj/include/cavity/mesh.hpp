#pragma once

// Panel discretisation of a scene and the corrected quadrature blocks for
// singular, adjacent and nearly singular panel interactions.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cavity/geometry.hpp"
#include "cavity/specfun.hpp"

namespace cavity {

struct MeshParams {
    /// Equal-parameter panels per smooth segment. 0 selects a count per segment
    /// from the wavelength so that panels are at most (p/50) wavelengths long.
    int n_mid = 10;
    int n_corner = 10;
    int p = 10;
    /// Wavenumber used when n_mid == 0.
    double wavenumber = 0.0;
};

struct MeshSegment {
    CurveSegment curve;
    Component component;
    std::size_t first_panel = 0;
    std::size_t panel_count = 0;
};

struct Panel {
    std::size_t segment = 0;
    Component component = Component::Gamma;
    double t0 = 0.0, t1 = 0.0;
    std::size_t first_node = 0;
    double length = 0.0;
    Point2 center{};   // centre of the bounding circle
    double radius = 0.0;  // bounding-circle radius
};

enum class PairClass { Self, Adjacent, Near, Far };

const char* to_string(PairClass c);

/// Shared endpoint of two segments, as parameter ends (0 or 1) on each.
struct Junction {
    double end_a = 0.0;
    double end_b = 0.0;
};

class Mesh {
  public:
    MeshParams params;
    int p = 0;
    std::vector<MeshSegment> segments;  // Gamma1 first, then B_left, Gamma..., B_right
    std::vector<Panel> panels;

    // Per-node data, nodes numbered panel by panel.
    std::vector<Point2> x;
    std::vector<Vec2> normal;
    std::vector<double> t;      // curve parameter
    std::vector<double> speed;  // |gamma'(t)|
    std::vector<double> w;      // arclength quadrature weight
    std::vector<std::size_t> node_panel;

    std::size_t gamma1_nodes = 0;  // nodes [0, gamma1_nodes) lie on Gamma1
    double diameter = 0.0;

    // Reference rule on [-1, 1] and its barycentric weights.
    std::vector<double> ref_nodes, ref_weights, bary;

    std::size_t node_count() const { return x.size(); }
    std::size_t panel_count() const { return panels.size(); }

    /// Shared endpoint of two distinct segments, if any.
    std::optional<Junction> junction(std::size_t seg_a, std::size_t seg_b) const;

    /// x(target node) - gamma_seg(ty), computed from chords when the two lie on
    /// the same segment or on segments meeting at a common endpoint.
    Vec2 separation(std::size_t node, std::size_t seg, double ty) const;

    /// Distance from point q to panel j, minimised over a fine sampling of the panel.
    double distance_to_panel(Point2 q, std::size_t j) const;

    /// Self / adjacent (shared endpoint) / near / far. A pair is near when some
    /// target node lies within near_factor source-panel lengths of the source
    /// panel, or of its mirror image when `image` is set.
    PairClass classify_pair(std::size_t target, std::size_t source, double near_factor,
                            bool image) const;

    /// Panels paired with `target` in a class other than Far.
    std::vector<std::pair<std::size_t, PairClass>> neighbours(std::size_t target, double near_factor,
                                                              bool image_for_gamma1) const;

    friend Mesh generate_mesh(const SceneGeometry& scene, const MeshParams& params);

  private:
    std::vector<std::vector<std::optional<Junction>>> junctions_;
};

/// Throws ConfigError on out-of-range parameters.
Mesh generate_mesh(const SceneGeometry& scene, const MeshParams& params);

/// Parameter breakpoints of one segment: n_mid equal pieces, each end flagged
/// as a corner replaced by a dyadic cascade L/2^nc, ..., L/4, L/2.
std::vector<double> panel_breaks(int n_mid, int n_corner, bool corner_start, bool corner_end);

/// Number of panels a segment of the given length gets when n_mid is automatic.
int auto_panel_count(double length, double wavenumber, int p);

/// One kernel in a corrected block: the free-space or half-space variant of S, D, N or T.
struct KernelTerm {
    KernelKind kind;
    KernelSpace space;
};

/// Corrected quadrature for a target/source panel pair: for each term,
///   M[m][j] = integral over the source panel of K(x_m, y(t)) l_j(t) |y'(t)| dt,
/// with l_j the Lagrange basis on the source nodes. Applied to the nodal values
/// of a smooth density this integrates the kernel against its interpolant.
/// Self pairs are split at the target node, with the singular endpoint handled
/// by a polynomial change of variables; adjacent pairs grade toward the
/// shared endpoint.
std::vector<Eigen::MatrixXcd> panel_blocks(const Mesh& mesh, double k, std::size_t target,
                                           std::size_t source, PairClass cls,
                                           std::span<const KernelTerm> terms, double rel_tol = 1e-12);

/// Self-interaction block of one panel for a single kernel.
Eigen::MatrixXcd singular_block(const Mesh& mesh, double k, std::size_t panel, KernelTerm term);

/// Interaction block between two panels sharing an endpoint.
Eigen::MatrixXcd adjacent_block(const Mesh& mesh, double k, std::size_t target, std::size_t source,
                                KernelTerm term);

}  // namespace cavity
