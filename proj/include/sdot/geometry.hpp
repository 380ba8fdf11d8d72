#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sdot {

// Planar point. Coordinates are named u,v so that source points x_i and
// target points y_j can both live in the same type without confusion.
struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.u + b.u, a.v + b.v}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.u - b.u, a.v - b.v}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.u, s * a.v}; }
inline double dot(Point2 a, Point2 b) { return a.u * b.u + a.v * b.v; }
inline double cross(Point2 a, Point2 b) { return a.u * b.v - a.v * b.u; }
double norm(Point2 a);
double dist(Point2 a, Point2 b);
inline double norm2(Point2 a) { return dot(a, a); }
bool is_finite(Point2 a);

// Closed half-plane {p : normal . p <= offset}. The normal need not be unit.
struct HalfPlane {
    Point2 normal;
    double offset = 0.0;
};

// Convex region with CCW vertex list. An empty vertex list is the canonical
// empty polygon; `degenerate` marks hulls of collinear input.
struct ConvexPolygon {
    std::vector<Point2> vertices;
    bool degenerate = false;

    bool empty() const { return vertices.empty(); }
    std::size_t size() const { return vertices.size(); }
};

using Density = std::function<double(Point2)>;

// Vertex dedup / orientation tolerance: 1e-12 x length scale of the input.
inline constexpr double kEpsGeomRel = 1e-12;

double length_scale(std::span<const Point2> pts);
double length_scale(const ConvexPolygon& poly);
double geom_eps(const ConvexPolygon& poly);

ConvexPolygon make_rectangle(double u0, double v0, double u1, double v1);
ConvexPolygon unit_square();

// Andrew monotone chain. Collinear interior points are dropped; fully
// collinear input yields the empty polygon with the degenerate flag set.
ConvexPolygon convex_hull(std::span<const Point2> points);

ConvexPolygon clip(const ConvexPolygon& poly, const HalfPlane& hp);

double area(const ConvexPolygon& poly);
double diameter(const ConvexPolygon& poly);
Point2 bbox_center(const ConvexPolygon& poly);
bool contains(const ConvexPolygon& poly, Point2 p, double eps);
// Max over the polygon's half-planes of the signed distance of p to them
// (<= 0 inside, > 0 outside).
double signed_distance(const ConvexPolygon& poly, Point2 p);

struct MassCentroid {
    double mass = 0.0;
    std::optional<Point2> centroid;
};

// Integral of g over the polygon plus the g-weighted centroid, by fan
// triangulation with a degree-4 symmetric triangle rule (exact for g
// constant or affine per triangle).
MassCentroid mass_and_centroid(const ConvexPolygon& poly, const Density& g);

// Same fan/degree-4 rule for a scalar integrand; `refine` subdivides each
// fan triangle 4-way that many times (for integrands with mild kinks).
double integrate(const ConvexPolygon& poly, const std::function<double(Point2)>& f,
                 int refine = 0);
// Fan apex override: useful when the integrand has a kink at a known
// interior point (e.g. |x - x_i| over the cell of x_i).
double integrate_from(const ConvexPolygon& poly, Point2 apex,
                      const std::function<double(Point2)>& f, int refine = 0);

// 3-point Gauss-Legendre on the segment [a, b].
double integrate_segment(Point2 a, Point2 b, const std::function<double(Point2)>& f);

}  // namespace sdot
