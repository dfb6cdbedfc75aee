#pragma once

// Piecewise-smooth scene description: the cavity wall, the two ground strips,
// the artificial dome and its image, plus validation and point classification.

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cavity/types.hpp"

namespace cavity {

/// Radial profile r(theta) = r0 + sum a sin(f theta) + sum b sin(f1 theta) sin(f2 theta)
/// drawn as (cx + r cos theta, cy + y_scale r sin theta).
struct TrigRadialShape {
    Point2 center{0.5, 0.0};
    double y_scale = 1.0;
    double r0 = 1.0;
    std::vector<std::array<double, 2>> sines;          // {amplitude, frequency}
    std::vector<std::array<double, 3>> sine_products;  // {amplitude, f1, f2}

    double radius(double theta) const;
    double radius_deriv(double theta) const;
    /// r(m + h) - r(m - h), accurate for small h. The half gap is passed
    /// directly since recomputing it from two nearby angles loses its digits.
    double radius_diff(double m, double h) const;
};

/// One smooth piece of the boundary, parametrised over t in [0, 1].
class CurveSegment {
  public:
    enum class Kind { Line, Arc, TrigRadial };

    static CurveSegment line(Point2 a, Point2 b);
    /// Circular arc through angles theta0 -> theta1 (counter-clockwise when theta1 > theta0).
    static CurveSegment arc(Point2 center, double radius, double theta0, double theta1);
    static CurveSegment trig_radial(std::shared_ptr<const TrigRadialShape> shape, double theta0,
                                    double theta1);

    Kind kind() const { return kind_; }
    bool mirrored() const { return mirrored_; }

    Point2 point(double t) const;
    Vec2 derivative(double t) const;
    double speed(double t) const { return norm(derivative(t)); }
    /// point(t) - point(s), evaluated without cancellation for nearby t, s.
    Vec2 chord(double t, double s) const;
    /// Unit normal rot_cw(tangent)/|tangent|, i.e. outward for a counter-clockwise
    /// loop. A mirrored copy returns the mirror image of the original normal.
    Vec2 normal(double t) const;

    Point2 start() const { return point(0.0); }
    Point2 end() const { return point(1.0); }

    /// Arclength by composite Gauss-Legendre.
    double length() const;
    /// Arclength of the parameter interval [a, b].
    double length(double a, double b) const;

    /// Mirror image across x2 = 0. Normals of the copy are the mirrored normals.
    CurveSegment reflected() const;

    bool corner_start = false;
    bool corner_end = false;

  private:
    Kind kind_ = Kind::Line;
    bool mirrored_ = false;
    Point2 a_{}, b_{};       // line endpoints, or arc/radial centre in a_
    double radius_ = 0.0;
    double theta0_ = 0.0, theta1_ = 0.0;
    std::shared_ptr<const TrigRadialShape> shape_;

    Point2 raw_point(double t) const;
    Vec2 raw_derivative(double t) const;
    Vec2 raw_chord(double t, double s) const;
};

CurveSegment reflect(const CurveSegment& seg);

/// Upper half circle from (cx + R, cy) to (cx - R, cy), counter-clockwise.
/// Throws GeometryError if the radius is not positive or the centre is off the ground line.
CurveSegment build_dome(Point2 center, double radius);

struct DomeSpec {
    Point2 center{0.5, 0.0};
    double radius = 2.5;
};

enum class Component { Gamma1, BLeft, Gamma, BRight };

const char* to_string(Component c);

enum class RegionLabel { Omega1, ExteriorUpper, BelowGround, OnBoundary };

const char* to_string(RegionLabel r);

struct Violation {
    std::string code;
    std::string message;
};

/// Immutable scene. The closed loop runs B_left -> Gamma -> B_right -> Gamma1,
/// counter-clockwise around Omega1.
class SceneGeometry {
  public:
    /// Builds the strips from the cavity ends to the dome ends. No validation
    /// happens here; call validate_scene.
    SceneGeometry(std::string name, std::vector<CurveSegment> gamma, DomeSpec dome);

    const std::string& name() const { return name_; }
    const std::vector<CurveSegment>& gamma() const { return gamma_; }
    const std::vector<CurveSegment>& b() const { return b_; }
    const CurveSegment& gamma1() const { return gamma1_; }
    CurveSegment gamma2() const { return gamma1_.reflected(); }
    std::pair<double, double> aperture() const { return aperture_; }
    const DomeSpec& dome() const { return dome_; }

    /// Segments in loop order, tagged by component.
    std::vector<std::pair<Component, const CurveSegment*>> loop() const;

    /// Bounding-box diagonal of the loop.
    double diameter() const { return diameter_; }
    /// Bounding box {xmin, ymin, xmax, ymax} of the cavity wall.
    std::array<double, 4> gamma_bbox() const { return gamma_bbox_; }

    /// For tests: drop a ground strip to produce an open loop.
    void remove_strip(std::size_t index);

    struct Sampled {
        std::size_t segment;  // index into loop()
        std::vector<double> t;
        std::vector<Point2> x;
    };
    const std::vector<Sampled>& samples() const { return samples_; }
    /// All samples joined into one closed polygon (last vertex joins the first).
    const std::vector<Point2>& polygon() const { return polygon_; }

  private:
    std::string name_;
    std::vector<CurveSegment> gamma_;
    std::vector<CurveSegment> b_;
    std::vector<Component> b_tags_;
    CurveSegment gamma1_;
    DomeSpec dome_;
    std::pair<double, double> aperture_{0.0, 0.0};
    double diameter_ = 0.0;
    std::array<double, 4> gamma_bbox_{};
    std::vector<Sampled> samples_;
    std::vector<Point2> polygon_;

    void build_samples();
};

SceneGeometry build_pot(DomeSpec dome = {});
SceneGeometry build_engine(DomeSpec dome = {});
SceneGeometry build_rough(DomeSpec dome = {});
/// Preset by name: "pot", "engine" or "rough". Throws ConfigError otherwise.
SceneGeometry build_preset(const std::string& name, DomeSpec dome = {});

/// The 17 engine vertices, in boundary order.
const std::vector<Point2>& engine_vertices();

/// The rough-bottom radial profile.
std::shared_ptr<const TrigRadialShape> rough_profile();

/// Checks every scene invariant; an empty list means the scene is valid.
std::vector<Violation> validate_scene(const SceneGeometry& scene);

/// Distance from p to the loop, with the nearest segment (loop index) and parameter.
struct ClosestPoint {
    double distance = 0.0;
    std::size_t segment = 0;
    double t = 0.0;
};
ClosestPoint closest_point(const SceneGeometry& scene, Point2 p);

/// Region containing p. Points within `tol` of the loop are OnBoundary.
RegionLabel classify_point(const SceneGeometry& scene, Point2 p, double tol = 1e-10);

}  // namespace cavity
