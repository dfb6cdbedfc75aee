#include "cavity/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cavity/quadrature.hpp"

namespace cavity {

// ---------------------------------------------------------------- TrigRadialShape

double TrigRadialShape::radius(double theta) const {
    double r = r0;
    for (const auto& s : sines) r += s[0] * std::sin(s[1] * theta);
    for (const auto& s : sine_products) r += s[0] * std::sin(s[1] * theta) * std::sin(s[2] * theta);
    return r;
}

double TrigRadialShape::radius_deriv(double theta) const {
    double d = 0.0;
    for (const auto& s : sines) d += s[0] * s[1] * std::cos(s[1] * theta);
    for (const auto& s : sine_products) {
        d += s[0] * (s[1] * std::cos(s[1] * theta) * std::sin(s[2] * theta) +
                     s[2] * std::sin(s[1] * theta) * std::cos(s[2] * theta));
    }
    return d;
}

namespace {

// sin(f a) - sin(f b) = 2 cos(f m) sin(f h), m = (a + b)/2, h = (a - b)/2
double sin_diff(double f, double m, double h) { return 2.0 * std::cos(f * m) * std::sin(f * h); }

}  // namespace

double TrigRadialShape::radius_diff(double m, double h) const {
    const double a = m + h, b = m - h;
    double d = 0.0;
    for (const auto& s : sines) d += s[0] * sin_diff(s[1], m, h);
    for (const auto& s : sine_products) {
        const double d1 = sin_diff(s[1], m, h);
        const double d2 = sin_diff(s[2], m, h);
        d += s[0] * (d1 * std::sin(s[2] * a) + std::sin(s[1] * b) * d2);
    }
    return d;
}

// ---------------------------------------------------------------- CurveSegment

CurveSegment CurveSegment::line(Point2 a, Point2 b) {
    CurveSegment s;
    s.kind_ = Kind::Line;
    s.a_ = a;
    s.b_ = b;
    return s;
}

CurveSegment CurveSegment::arc(Point2 center, double radius, double theta0, double theta1) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw GeometryError("arc radius must be positive");
    }
    CurveSegment s;
    s.kind_ = Kind::Arc;
    s.a_ = center;
    s.radius_ = radius;
    s.theta0_ = theta0;
    s.theta1_ = theta1;
    return s;
}

CurveSegment CurveSegment::trig_radial(std::shared_ptr<const TrigRadialShape> shape, double theta0,
                                       double theta1) {
    if (!shape) throw GeometryError("trig-radial segment without a profile");
    CurveSegment s;
    s.kind_ = Kind::TrigRadial;
    s.a_ = shape->center;
    s.theta0_ = theta0;
    s.theta1_ = theta1;
    s.shape_ = std::move(shape);
    return s;
}

Point2 CurveSegment::raw_point(double t) const {
    switch (kind_) {
        case Kind::Line:
            return a_ + t * (b_ - a_);
        case Kind::Arc: {
            const double th = theta0_ + t * (theta1_ - theta0_);
            return a_ + radius_ * Vec2{std::cos(th), std::sin(th)};
        }
        case Kind::TrigRadial: {
            const double th = theta0_ + t * (theta1_ - theta0_);
            const double r = shape_->radius(th);
            return a_ + Vec2{r * std::cos(th), shape_->y_scale * r * std::sin(th)};
        }
    }
    return {};
}

Vec2 CurveSegment::raw_derivative(double t) const {
    switch (kind_) {
        case Kind::Line:
            return b_ - a_;
        case Kind::Arc: {
            const double dth = theta1_ - theta0_;
            const double th = theta0_ + t * dth;
            return radius_ * dth * Vec2{-std::sin(th), std::cos(th)};
        }
        case Kind::TrigRadial: {
            const double dth = theta1_ - theta0_;
            const double th = theta0_ + t * dth;
            const double r = shape_->radius(th);
            const double dr = shape_->radius_deriv(th);
            const double c = std::cos(th), s = std::sin(th);
            return dth * Vec2{dr * c - r * s, shape_->y_scale * (dr * s + r * c)};
        }
    }
    return {};
}

Vec2 CurveSegment::raw_chord(double t, double s) const {
    switch (kind_) {
        case Kind::Line:
            return (t - s) * (b_ - a_);
        case Kind::Arc:
        case Kind::TrigRadial: {
            const double dth = theta1_ - theta0_;
            const double at = theta0_ + t * dth;
            const double as = theta0_ + s * dth;
            const double m = 0.5 * (at + as);
            const double half = 0.5 * (t - s) * dth;
            const double sh = std::sin(half);
            const double dcos = -2.0 * std::sin(m) * sh;
            const double dsin = 2.0 * std::cos(m) * sh;
            if (kind_ == Kind::Arc) return radius_ * Vec2{dcos, dsin};
            const double rs = shape_->radius(as);
            const double dr = shape_->radius_diff(m, half);
            return {dr * std::cos(at) + rs * dcos,
                    shape_->y_scale * (dr * std::sin(at) + rs * dsin)};
        }
    }
    return {};
}

Point2 CurveSegment::point(double t) const {
    const Point2 p = raw_point(t);
    return mirrored_ ? mirror(p) : p;
}

Vec2 CurveSegment::derivative(double t) const {
    const Vec2 d = raw_derivative(t);
    return mirrored_ ? mirror(d) : d;
}

Vec2 CurveSegment::chord(double t, double s) const {
    const Vec2 d = raw_chord(t, s);
    return mirrored_ ? mirror(d) : d;
}

Vec2 CurveSegment::normal(double t) const {
    const Vec2 d = raw_derivative(t);
    const Vec2 n = rot_cw(d) / norm(d);
    return mirrored_ ? mirror(n) : n;
}

double CurveSegment::length(double a, double b) const {
    const auto& rule = gauss_legendre(16);
    const int pieces = std::max(1, static_cast<int>(std::ceil(64.0 * std::fabs(b - a))));
    const double h = (b - a) / pieces;
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + i * h;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            total += 0.5 * h * rule.weights[q] * speed(lo + 0.5 * h * (rule.nodes[q] + 1.0));
        }
    }
    return total;
}

double CurveSegment::length() const { return length(0.0, 1.0); }

CurveSegment CurveSegment::reflected() const {
    CurveSegment s = *this;
    s.mirrored_ = !mirrored_;
    return s;
}

CurveSegment reflect(const CurveSegment& seg) { return seg.reflected(); }

CurveSegment build_dome(Point2 center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw GeometryError("dome radius must be positive");
    }
    if (center.y != 0.0) {
        throw GeometryError("dome centre must lie on the ground line");
    }
    CurveSegment dome = CurveSegment::arc(center, radius, 0.0, kPi);
    dome.corner_start = true;
    dome.corner_end = true;
    return dome;
}

const char* to_string(Component c) {
    switch (c) {
        case Component::Gamma1: return "gamma1";
        case Component::BLeft: return "b_left";
        case Component::Gamma: return "gamma";
        case Component::BRight: return "b_right";
    }
    return "?";
}

const char* to_string(RegionLabel r) {
    switch (r) {
        case RegionLabel::Omega1: return "omega1";
        case RegionLabel::ExteriorUpper: return "exterior";
        case RegionLabel::BelowGround: return "below_ground";
        case RegionLabel::OnBoundary: return "boundary";
    }
    return "?";
}

// ---------------------------------------------------------------- SceneGeometry

SceneGeometry::SceneGeometry(std::string name, std::vector<CurveSegment> gamma, DomeSpec dome)
    : name_(std::move(name)), gamma_(std::move(gamma)), gamma1_(build_dome(dome.center, dome.radius)),
      dome_(dome) {
    if (gamma_.empty()) throw GeometryError("cavity wall has no segments");
    gamma_.front().corner_start = true;
    gamma_.back().corner_end = true;
    const Point2 left = gamma_.front().start();
    const Point2 right = gamma_.back().end();
    aperture_ = {left.x, right.x};

    CurveSegment bl = CurveSegment::line(gamma1_.end(), left);
    CurveSegment br = CurveSegment::line(right, gamma1_.start());
    bl.corner_start = bl.corner_end = true;
    br.corner_start = br.corner_end = true;
    b_ = {bl, br};
    b_tags_ = {Component::BLeft, Component::BRight};
    build_samples();
}

std::vector<std::pair<Component, const CurveSegment*>> SceneGeometry::loop() const {
    std::vector<std::pair<Component, const CurveSegment*>> out;
    for (std::size_t i = 0; i < b_.size(); ++i) {
        if (b_tags_[i] == Component::BLeft) out.emplace_back(Component::BLeft, &b_[i]);
    }
    for (const auto& g : gamma_) out.emplace_back(Component::Gamma, &g);
    for (std::size_t i = 0; i < b_.size(); ++i) {
        if (b_tags_[i] == Component::BRight) out.emplace_back(Component::BRight, &b_[i]);
    }
    out.emplace_back(Component::Gamma1, &gamma1_);
    return out;
}

void SceneGeometry::remove_strip(std::size_t index) {
    if (index >= b_.size()) throw GeometryError("no such ground strip");
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(index));
    b_tags_.erase(b_tags_.begin() + static_cast<std::ptrdiff_t>(index));
    build_samples();
}

void SceneGeometry::build_samples() {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    const auto lp = loop();
    std::vector<double> lengths;
    for (const auto& [c, seg] : lp) {
        lengths.push_back(seg->length());
        for (int i = 0; i <= 64; ++i) {
            const Point2 p = seg->point(i / 64.0);
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    diameter_ = std::hypot(xmax - xmin, ymax - ymin);

    double gx0 = std::numeric_limits<double>::infinity(), gx1 = -gx0, gy0 = gx0, gy1 = -gx0;
    for (const auto& g : gamma_) {
        for (int i = 0; i <= 256; ++i) {
            const Point2 p = g.point(i / 256.0);
            gx0 = std::min(gx0, p.x);
            gx1 = std::max(gx1, p.x);
            gy0 = std::min(gy0, p.y);
            gy1 = std::max(gy1, p.y);
        }
    }
    gamma_bbox_ = {gx0, gy0, gx1, gy1};

    const double h = diameter_ / 4000.0;
    samples_.clear();
    for (std::size_t s = 0; s < lp.size(); ++s) {
        const int n = std::clamp(static_cast<int>(std::ceil(lengths[s] / h)), 64, 40000);
        Sampled smp;
        smp.segment = s;
        smp.t.resize(n + 1);
        smp.x.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            smp.t[i] = static_cast<double>(i) / n;
            smp.x[i] = lp[s].second->point(smp.t[i]);
        }
        samples_.push_back(std::move(smp));
    }
    polygon_.clear();
    for (const auto& smp : samples_) polygon_.insert(polygon_.end(), smp.x.begin(), smp.x.end() - 1);
}

// ---------------------------------------------------------------- presets

const std::vector<Point2>& engine_vertices() {
    static const std::vector<Point2> v = {
        {0.0, 0.0},    {0.0, -2.0},  {0.45, -2.0}, {0.45, -1.6}, {0.1, -1.6},  {0.1, -1.0},
        {0.45, -1.0},  {0.45, -0.4}, {0.5, 0.2},   {0.55, -0.4}, {0.55, -1.0}, {0.9, -1.0},
        {0.9, -1.6},   {0.55, -1.6}, {0.55, -2.0}, {1.0, -2.0},  {1.0, 0.0}};
    return v;
}

std::shared_ptr<const TrigRadialShape> rough_profile() {
    static const auto shape = [] {
        auto s = std::make_shared<TrigRadialShape>();
        s->center = {0.5, 0.0};
        s->y_scale = 1.25;
        s->r0 = 1.0;
        s->sines = {{0.1, 2.0}, {0.1, 11.0}, {0.05, 47.0}};
        s->sine_products = {{0.08, 19.0, 29.0}};
        return std::shared_ptr<const TrigRadialShape>(s);
    }();
    return shape;
}

SceneGeometry build_pot(DomeSpec dome) {
    const Point2 c{0.5, -1.0};
    const double r = std::sqrt(0.5);
    // The walls x = 0 and x = 1 meet the circle at y = -0.5.
    std::vector<CurveSegment> g;
    g.push_back(CurveSegment::line({0.0, 0.0}, {0.0, -0.5}));
    g.push_back(CurveSegment::arc(c, r, 0.75 * kPi, 2.25 * kPi));
    g.push_back(CurveSegment::line({1.0, -0.5}, {1.0, 0.0}));
    for (auto& s : g) s.corner_start = s.corner_end = true;
    return SceneGeometry("pot", std::move(g), dome);
}

SceneGeometry build_engine(DomeSpec dome) {
    const auto& v = engine_vertices();
    std::vector<CurveSegment> g;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        g.push_back(CurveSegment::line(v[i], v[i + 1]));
        g.back().corner_start = g.back().corner_end = true;
    }
    return SceneGeometry("engine", std::move(g), dome);
}

SceneGeometry build_rough(DomeSpec dome) {
    const auto shape = rough_profile();
    std::vector<CurveSegment> g;
    for (int i = 0; i < 3; ++i) {
        g.push_back(CurveSegment::trig_radial(shape, kPi + i * kPi / 3.0, kPi + (i + 1) * kPi / 3.0));
    }
    return SceneGeometry("rough", std::move(g), dome);
}

SceneGeometry build_preset(const std::string& name, DomeSpec dome) {
    if (name == "pot") return build_pot(dome);
    if (name == "engine") return build_engine(dome);
    if (name == "rough") return build_rough(dome);
    throw ConfigError("unknown geometry preset '" + name + "'");
}

// ---------------------------------------------------------------- validation

namespace {

double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

bool on_segment(Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

// Winding number of a closed polygon (last vertex joins the first) around p.
int winding_number(const std::vector<Point2>& poly, Point2 p) {
    int wn = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        if (a.y <= p.y) {
            if (b.y > p.y && orient(a, b, p) > 0) ++wn;
        } else if (b.y <= p.y && orient(a, b, p) < 0) {
            --wn;
        }
    }
    return wn;
}

struct Edge {
    Point2 a, b;
    std::size_t chain;  // which polyline the edge belongs to
    std::size_t index;  // position within the concatenated loop
};

// Pairs of edges whose bounding boxes share a grid cell.
template <class Fn>
void for_candidate_pairs(const std::vector<Edge>& edges, double cell, Fn&& fn) {
    std::map<std::pair<long, long>, std::vector<std::size_t>> grid;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& E = edges[e];
        const long x0 = static_cast<long>(std::floor(std::min(E.a.x, E.b.x) / cell));
        const long x1 = static_cast<long>(std::floor(std::max(E.a.x, E.b.x) / cell));
        const long y0 = static_cast<long>(std::floor(std::min(E.a.y, E.b.y) / cell));
        const long y1 = static_cast<long>(std::floor(std::max(E.a.y, E.b.y) / cell));
        for (long ix = x0; ix <= x1; ++ix) {
            for (long iy = y0; iy <= y1; ++iy) grid[{ix, iy}].push_back(e);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [key, list] : grid) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            for (std::size_t j = i + 1; j < list.size(); ++j) seen.emplace_back(list[i], list[j]);
        }
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (const auto& [i, j] : seen) {
        if (fn(i, j)) return;
    }
}

std::vector<Point2> polyline(const CurveSegment& seg, int n) {
    std::vector<Point2> pts(n + 1);
    for (int i = 0; i <= n; ++i) pts[i] = seg.point(static_cast<double>(i) / n);
    return pts;
}

std::string fmt_point(Point2 p) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

}  // namespace

std::vector<Violation> validate_scene(const SceneGeometry& scene) {
    std::vector<Violation> out;
    const double diam = scene.diameter();
    const double tol = 1e-12 * std::max(1.0, diam);
    const auto lp = scene.loop();
    const CurveSegment& dome = scene.gamma1();

    if (scene.b().size() != 2) {
        out.push_back({"b_count", "expected exactly two ground strips, found " +
                                      std::to_string(scene.b().size())});
    }
    if (std::fabs(dome.start().y) > tol || std::fabs(dome.end().y) > tol) {
        out.push_back({"dome_endpoints", "dome endpoints must lie on the ground line"});
    }
    for (const auto& b : scene.b()) {
        if (std::fabs(b.start().y) > tol || std::fabs(b.end().y) > tol) {
            out.push_back({"b_off_ground", "ground strip leaves the line x2 = 0"});
        }
        if (!(b.end().x - b.start().x > tol)) {
            out.push_back({"b_orientation", "ground strip from " + fmt_point(b.start()) + " to " +
                                                fmt_point(b.end()) + " has non-positive length"});
        }
    }
    for (std::size_t s = 0; s < lp.size(); ++s) {
        const Point2 e = lp[s].second->end();
        const Point2 next = lp[(s + 1) % lp.size()].second->start();
        if (norm(e - next) > tol) {
            out.push_back({"closure", "loop is open between " + fmt_point(e) + " and " + fmt_point(next)});
        }
    }
    for (const auto& [c, seg] : lp) {
        const double len = seg->length();
        if (!(len > 0.0) || !std::isfinite(len)) {
            out.push_back({"degenerate_segment", std::string("zero-length segment on ") + to_string(c)});
            continue;
        }
        for (int i = 0; i <= 512; ++i) {
            if (seg->speed(i / 512.0) <= 1e-10 * len) {
                out.push_back({"degenerate_derivative",
                               std::string("vanishing derivative on ") + to_string(c)});
                break;
            }
        }
    }

    // Self-intersection of the sampled loop.
    {
        std::vector<Edge> edges;
        const auto& smp = scene.samples();
        for (std::size_t s = 0; s < smp.size(); ++s) {
            for (std::size_t i = 0; i + 1 < smp[s].x.size(); ++i) {
                edges.push_back({smp[s].x[i], smp[s].x[i + 1], s, edges.size()});
            }
        }
        const std::size_t ne = edges.size();
        for_candidate_pairs(edges, diam / 200.0, [&](std::size_t i, std::size_t j) {
            const std::size_t gap = j - i;
            if (gap == 1 || gap == ne - 1) return false;
            if (segments_intersect(edges[i].a, edges[i].b, edges[j].a, edges[j].b)) {
                out.push_back({"self_intersection", "boundary loop crosses itself near " +
                                                        fmt_point(edges[i].a)});
                return true;
            }
            return false;
        });
    }

    // The image dome must stay clear of the cavity closure (Gamma plus the aperture).
    {
        std::vector<Point2> cavity;
        const auto& smp = scene.samples();
        for (std::size_t s = 0; s < lp.size(); ++s) {
            if (lp[s].first != Component::Gamma) continue;
            cavity.insert(cavity.end(), smp[s].x.begin(), smp[s].x.end() - 1);
        }
        cavity.push_back(scene.gamma().back().end());
        const auto box = scene.gamma_bbox();
        const auto img = polyline(scene.gamma2(), 4096);
        bool hit = false;
        for (std::size_t i = 1; i + 1 < img.size() && !hit; ++i) {
            const Point2 q = img[i];
            if (q.x < box[0] || q.x > box[2] || q.y < box[1] || q.y > box[3]) continue;
            if (winding_number(cavity, q) != 0) hit = true;
        }
        if (!hit) {
            std::vector<Edge> edges;
            for (std::size_t i = 0; i < cavity.size(); ++i) {
                edges.push_back({cavity[i], cavity[(i + 1) % cavity.size()], 0, i});
            }
            for (std::size_t i = 1; i + 2 < img.size(); ++i) {
                edges.push_back({img[i], img[i + 1], 1, i});
            }
            for_candidate_pairs(edges, diam / 200.0, [&](std::size_t i, std::size_t j) {
                if (edges[i].chain == edges[j].chain) return false;
                if (segments_intersect(edges[i].a, edges[i].b, edges[j].a, edges[j].b)) {
                    hit = true;
                    return true;
                }
                return false;
            });
        }
        if (hit) {
            out.push_back({"gamma2_intersects_cavity",
                           "reflected dome enters the cavity; enlarge the dome radius"});
        }
    }
    return out;
}

// ---------------------------------------------------------------- classification

ClosestPoint closest_point(const SceneGeometry& scene, Point2 p) {
    const auto lp = scene.loop();
    const auto& smp = scene.samples();
    ClosestPoint best{std::numeric_limits<double>::infinity(), 0, 0.0};
    std::size_t best_i = 0;
    for (std::size_t s = 0; s < smp.size(); ++s) {
        for (std::size_t i = 0; i < smp[s].x.size(); ++i) {
            const Vec2 d = smp[s].x[i] - p;
            const double r2 = dot(d, d);
            if (r2 < best.distance) {
                best.distance = r2;
                best.segment = s;
                best_i = i;
            }
        }
    }
    const auto& S = smp[best.segment];
    const CurveSegment& seg = *lp[best.segment].second;
    double lo = S.t[best_i == 0 ? 0 : best_i - 1];
    double hi = S.t[std::min(best_i + 1, S.t.size() - 1)];
    auto f = [&](double t) {
        const Vec2 d = seg.point(t) - p;
        return dot(d, d);
    };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 90 && hi - lo > 1e-16; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    double t = 0.5 * (lo + hi);
    double d2 = f(t);
    for (double te : {0.0, 1.0}) {
        if (f(te) < d2) {
            d2 = f(te);
            t = te;
        }
    }
    if (best.distance < d2) {
        // Sampled point beats the refinement (can happen at endpoints).
        d2 = best.distance;
        t = S.t[best_i];
    }
    best.distance = std::sqrt(d2);
    best.t = t;
    return best;
}

RegionLabel classify_point(const SceneGeometry& scene, Point2 p, double tol) {
    const double diam = scene.diameter();
    const ClosestPoint cp = closest_point(scene, p);
    if (cp.distance <= tol * std::max(1.0, diam)) return RegionLabel::OnBoundary;

    bool inside = false;
    const auto lp = scene.loop();
    const auto& S = scene.samples()[cp.segment];
    const CurveSegment& seg = *lp[cp.segment].second;
    const double spacing = seg.length() / static_cast<double>(S.x.size() - 1);
    if (cp.distance < 4.0 * spacing && cp.t > 1e-9 && cp.t < 1.0 - 1e-9) {
        // Close to a smooth point: the side is given by the normal there.
        inside = dot(p - seg.point(cp.t), seg.normal(cp.t)) < 0.0;
    } else {
        inside = winding_number(scene.polygon(), p) != 0;
    }
    if (inside) return RegionLabel::Omega1;
    return p.y < 0.0 ? RegionLabel::BelowGround : RegionLabel::ExteriorUpper;
}

}  // namespace cavity
