#include "sdot/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sdot {

double norm(Point2 a) { return std::hypot(a.u, a.v); }
double dist(Point2 a, Point2 b) { return norm(a - b); }
bool is_finite(Point2 a) { return std::isfinite(a.u) && std::isfinite(a.v); }

double length_scale(std::span<const Point2> pts) {
    if (pts.empty()) return 1.0;
    double lo_u = pts[0].u, hi_u = pts[0].u, lo_v = pts[0].v, hi_v = pts[0].v;
    for (Point2 p : pts) {
        lo_u = std::min(lo_u, p.u);
        hi_u = std::max(hi_u, p.u);
        lo_v = std::min(lo_v, p.v);
        hi_v = std::max(hi_v, p.v);
    }
    return std::max(1e-300, std::hypot(hi_u - lo_u, hi_v - lo_v));
}

double length_scale(const ConvexPolygon& poly) {
    return length_scale(std::span<const Point2>(poly.vertices));
}

double geom_eps(const ConvexPolygon& poly) { return kEpsGeomRel * length_scale(poly); }

ConvexPolygon make_rectangle(double u0, double v0, double u1, double v1) {
    ConvexPolygon r;
    r.vertices = {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
    return r;
}

ConvexPolygon unit_square() { return make_rectangle(0.0, 0.0, 1.0, 1.0); }

namespace {

// Drop consecutive duplicates and slivers; normalize near-zero area to the
// canonical empty polygon.
ConvexPolygon normalize_polygon(std::vector<Point2> pts) {
    double scale = length_scale(std::span<const Point2>(pts));
    double eps = kEpsGeomRel * scale;
    std::vector<Point2> out;
    out.reserve(pts.size());
    for (Point2 p : pts) {
        if (out.empty() || dist(out.back(), p) > eps) out.push_back(p);
    }
    while (out.size() >= 2 && dist(out.front(), out.back()) <= eps) out.pop_back();
    ConvexPolygon poly;
    poly.vertices = std::move(out);
    if (poly.vertices.size() < 3 || area(poly) < eps * eps) {
        poly.vertices.clear();
    }
    return poly;
}

}  // namespace

ConvexPolygon convex_hull(std::span<const Point2> points) {
    if (points.empty()) throw std::invalid_argument("no points");
    for (Point2 p : points) {
        if (!is_finite(p)) throw std::invalid_argument("no points: non-finite input");
    }
    std::vector<Point2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
        return a.u < b.u || (a.u == b.u && a.v < b.v);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point2 a, Point2 b) { return a.u == b.u && a.v == b.v; }),
              pts.end());

    double eps = kEpsGeomRel * length_scale(std::span<const Point2>(pts));
    auto turn = [](Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); };

    std::vector<Point2> hull(2 * pts.size() + 1);
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {  // lower chain
        while (k >= 2 && turn(hull[k - 2], hull[k - 1], pts[i]) <= eps * eps) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {  // upper chain
        while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= eps * eps) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);

    ConvexPolygon out = normalize_polygon(std::move(hull));
    if (out.empty()) out.degenerate = true;
    return out;
}

ConvexPolygon clip(const ConvexPolygon& poly, const HalfPlane& hp) {
    if (poly.empty()) return poly;
    double nn = norm(hp.normal);
    if (!(nn > 0.0) || !std::isfinite(nn) || !std::isfinite(hp.offset))
        throw std::invalid_argument("invalid half-plane");

    // vertices within eps of the cut line count as on it; this keeps the
    // operation idempotent and avoids phantom crossings between two on-line
    // vertices with opposite rounding signs
    double tol = kEpsGeomRel * length_scale(poly) * nn;
    std::vector<Point2> out;
    out.reserve(poly.size() + 1);
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = poly.vertices[i];
        Point2 b = poly.vertices[(i + 1) % n];
        double da = dot(hp.normal, a) - hp.offset;
        double db = dot(hp.normal, b) - hp.offset;
        if (da <= tol) out.push_back(a);
        if ((da < -tol && db > tol) || (da > tol && db < -tol)) {
            double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return normalize_polygon(std::move(out));
}

double area(const ConvexPolygon& poly) {
    double twice = 0.0;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = poly.vertices[i];
        Point2 b = poly.vertices[(i + 1) % n];
        twice += cross(a, b);
    }
    return std::max(0.0, 0.5 * twice);
}

double diameter(const ConvexPolygon& poly) {
    double d = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j)
            d = std::max(d, dist(poly.vertices[i], poly.vertices[j]));
    return d;
}

Point2 bbox_center(const ConvexPolygon& poly) {
    if (poly.empty()) return {0.0, 0.0};
    double lo_u = poly.vertices[0].u, hi_u = lo_u;
    double lo_v = poly.vertices[0].v, hi_v = lo_v;
    for (Point2 p : poly.vertices) {
        lo_u = std::min(lo_u, p.u);
        hi_u = std::max(hi_u, p.u);
        lo_v = std::min(lo_v, p.v);
        hi_v = std::max(hi_v, p.v);
    }
    return {0.5 * (lo_u + hi_u), 0.5 * (lo_v + hi_v)};
}

double signed_distance(const ConvexPolygon& poly, Point2 p) {
    if (poly.empty()) return std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = poly.vertices[i];
        Point2 b = poly.vertices[(i + 1) % n];
        Point2 e = b - a;
        double len = norm(e);
        if (len <= 0.0) continue;
        // outward normal of a CCW edge
        Point2 nrm{e.v / len, -e.u / len};
        worst = std::max(worst, dot(nrm, p - a));
    }
    return worst;
}

bool contains(const ConvexPolygon& poly, Point2 p, double eps) {
    return !poly.empty() && signed_distance(poly, p) <= eps;
}

namespace {

// Degree-4 symmetric triangle rule (6 points, positive weights).
struct TriRulePoint {
    double b0, b1, b2, w;
};

constexpr std::array<TriRulePoint, 6> kTriDeg4 = {{
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

double tri_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

template <typename F>
void triangle_quadrature(Point2 a, Point2 b, Point2 c, int refine, const F& accumulate) {
    if (refine > 0) {
        Point2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        triangle_quadrature(a, ab, ca, refine - 1, accumulate);
        triangle_quadrature(ab, b, bc, refine - 1, accumulate);
        triangle_quadrature(ca, bc, c, refine - 1, accumulate);
        triangle_quadrature(ab, bc, ca, refine - 1, accumulate);
        return;
    }
    double ta = tri_area(a, b, c);
    for (const TriRulePoint& q : kTriDeg4) {
        Point2 p = q.b0 * a + q.b1 * b + q.b2 * c;
        accumulate(p, q.w * ta);
    }
}

template <typename F>
void polygon_quadrature(const ConvexPolygon& poly, Point2 apex, int refine,
                        const F& accumulate) {
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        Point2 b = poly.vertices[i];
        Point2 c = poly.vertices[i + 1];
        if (dist(apex, b) == 0.0 || dist(apex, c) == 0.0) continue;
        triangle_quadrature(apex, b, c, refine, accumulate);
    }
}

}  // namespace

MassCentroid mass_and_centroid(const ConvexPolygon& poly, const Density& g) {
    MassCentroid mc;
    if (poly.empty()) return mc;
    double mass = 0.0, mu = 0.0, mv = 0.0;
    Point2 apex = poly.vertices[0];
    polygon_quadrature(poly, apex, 0, [&](Point2 p, double w) {
        double gv = g(p);
        if (!std::isfinite(gv)) throw std::runtime_error("bad density");
        mass += w * gv;
        mu += w * gv * p.u;
        mv += w * gv * p.v;
    });
    mc.mass = mass;
    if (mass > 0.0) mc.centroid = Point2{mu / mass, mv / mass};
    return mc;
}

double integrate(const ConvexPolygon& poly, const std::function<double(Point2)>& f,
                 int refine) {
    if (poly.empty()) return 0.0;
    return integrate_from(poly, poly.vertices[0], f, refine);
}

double integrate_from(const ConvexPolygon& poly, Point2 apex,
                      const std::function<double(Point2)>& f, int refine) {
    if (poly.empty()) return 0.0;
    double sum = 0.0;
    polygon_quadrature(poly, apex, refine, [&](Point2 p, double w) { sum += w * f(p); });
    if (apex.u != poly.vertices[0].u || apex.v != poly.vertices[0].v) {
        // apex outside vertex 0: close the fan with the wrap-around triangle
        triangle_quadrature(apex, poly.vertices.back(), poly.vertices.front(), refine,
                            [&](Point2 p, double w) { sum += w * f(p); });
    }
    return sum;
}

double integrate_segment(Point2 a, Point2 b, const std::function<double(Point2)>& f) {
    static constexpr double kNode = 0.774596669241483377;  // sqrt(3/5)
    static constexpr double kW0 = 8.0 / 9.0, kW1 = 5.0 / 9.0;
    double half = 0.5 * dist(a, b);
    Point2 mid = 0.5 * (a + b);
    Point2 dir = 0.5 * (b - a);
    return half * (kW0 * f(mid) + kW1 * f(mid + kNode * dir) + kW1 * f(mid - kNode * dir));
}

}  // namespace sdot
