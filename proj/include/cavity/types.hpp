#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cavity {

using cplx = std::complex<double>;
using Index = std::int64_t;

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

using Point2 = Vec2;

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Mirror image across the ground line x2 = 0.
constexpr Vec2 mirror(Vec2 p) { return {p.x, -p.y}; }

/// Rotate a tangent clockwise by 90 degrees. For a counter-clockwise loop this
/// is the outward normal direction.
constexpr Vec2 rot_cw(Vec2 t) { return {t.y, -t.x}; }

// Error hierarchy. The CLI maps these onto process exit codes.
class CavityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public CavityError {
  public:
    using CavityError::CavityError;
};

class GeometryError : public CavityError {
  public:
    using CavityError::CavityError;
};

class QuadratureError : public CavityError {
  public:
    using CavityError::CavityError;
};

class SolverError : public CavityError {
  public:
    using CavityError::CavityError;
};

}  // namespace cavity
