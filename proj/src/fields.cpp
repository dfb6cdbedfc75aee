#include "cavity/fields.hpp"

#include "cavity/specfun.hpp"

namespace cavity {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx PlaneWave::incident(double k, Point2 x) const {
    return std::exp(kI * k * (std::cos(theta) * x.x - std::sin(theta) * x.y));
}

cplx PlaneWave::reflected(double k, Point2 x) const {
    return reflection_sign * std::exp(kI * k * (std::cos(theta) * x.x + std::sin(theta) * x.y));
}

cplx PointSourcePair::value(double k, Point2 x) const {
    const double r1 = norm(x - source);
    const double r2 = norm(x - mirror(source));
    return 0.25 * kI * (hankel1(0, k * r1) + hankel1(0, k * r2));
}

cplx PointSourcePair::normal_derivative(double k, Point2 x, Vec2 n) const {
    cplx out = 0.0;
    for (const Point2 s : {source, mirror(source)}) {
        const Vec2 d = x - s;
        const double r = norm(d);
        // d/dr H0 = -k H1
        out += -0.25 * kI * k * hankel1(1, k * r) * dot(d, n) / r;
    }
    return out;
}

}  // namespace cavity
