#pragma once

// Closed-form fields used as data: the incident/reflected plane wave pair and
// the point source with its ground-plane image.

#include "cavity/types.hpp"

namespace cavity {

/// u_i = exp(ik(cos t x1 - sin t x2)), u_r = s exp(ik(cos t x1 + sin t x2)).
/// With s = -1 the sum vanishes on the ground line.
struct PlaneWave {
    double theta = kPi / 2;
    double reflection_sign = -1.0;

    cplx incident(double k, Point2 x) const;
    cplx reflected(double k, Point2 x) const;
    cplx total(double k, Point2 x) const { return incident(k, x) + reflected(k, x); }
};

/// u(x) = (i/4) H0(k|x - x0|) + (i/4) H0(k|x - x0'|), x0' the mirror of x0.
struct PointSourcePair {
    Point2 source{5.0, 12.0};

    cplx value(double k, Point2 x) const;
    cplx normal_derivative(double k, Point2 x, Vec2 n) const;
};

}  // namespace cavity
