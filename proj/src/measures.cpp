#include "sdot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "sdot/power_cells.hpp"

namespace sdot {

TargetDomain make_target(const ConvexPolygon& boundary, Density g, double delta_raw) {
    if (boundary.size() < 3) throw std::invalid_argument("target boundary degenerate");
    if (!(delta_raw > 0.0))
        throw std::invalid_argument("target density needs a positive lower bound");
    MassCentroid mc = mass_and_centroid(boundary, g);
    if (!(mc.mass > 0.0)) throw std::runtime_error("bad density");
    double scale = 1.0 / mc.mass;
    TargetDomain t;
    t.boundary = boundary;
    t.density = [g = std::move(g), scale](Point2 p) { return scale * g(p); };
    t.delta = delta_raw * scale;
    t.total_mass = mass_and_centroid(boundary, t.density).mass;
    return t;
}

TargetDomain uniform_target(const ConvexPolygon& boundary) {
    return make_target(boundary, [](Point2) { return 1.0; }, 1.0);
}

SourceMeasure uniform_source(const ConvexPolygon& support) {
    double a = area(support);
    if (!(a > 0.0)) throw std::invalid_argument("source support degenerate");
    return {support, [inv = 1.0 / a](Point2) { return inv; }};
}

namespace {

double min_separation(const std::vector<Point2>& pts) {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            s = std::min(s, dist(pts[i], pts[j]));
    return pts.size() > 1 ? s : std::numeric_limits<double>::infinity();
}

double boundary_distance(const ConvexPolygon& domain, const std::vector<Point2>& pts) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t n = domain.size();
    for (Point2 p : pts) {
        for (std::size_t e = 0; e < n; ++e) {
            Point2 a = domain.vertices[e];
            Point2 b = domain.vertices[(e + 1) % n];
            Point2 ab = b - a;
            double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
            best = std::min(best, dist(p, a + t * ab));
        }
    }
    return best;
}

void finish_cloud(SourceCloud& cloud, const ConvexPolygon& domain) {
    cloud.mesh_norm = 0.0;
    for (const ConvexPolygon& c : cloud.cells)
        cloud.mesh_norm = std::max(cloud.mesh_norm, diameter(c));
    cloud.separation = min_separation(cloud.points);
    cloud.boundary_distance = boundary_distance(domain, cloud.points);
}

}  // namespace

SourceCloud grid_cloud(const ConvexPolygon& rect, int k) {
    if (k < 1) throw std::invalid_argument("grid_cloud: k must be >= 1");
    if (rect.size() != 4) throw std::invalid_argument("grid_cloud: X must be a rectangle");
    double lo_u = rect.vertices[0].u, hi_u = lo_u, lo_v = rect.vertices[0].v, hi_v = lo_v;
    for (Point2 p : rect.vertices) {
        lo_u = std::min(lo_u, p.u);
        hi_u = std::max(hi_u, p.u);
        lo_v = std::min(lo_v, p.v);
        hi_v = std::max(hi_v, p.v);
    }
    double eps = geom_eps(rect);
    for (Point2 p : rect.vertices) {
        bool on_u = std::abs(p.u - lo_u) <= eps || std::abs(p.u - hi_u) <= eps;
        bool on_v = std::abs(p.v - lo_v) <= eps || std::abs(p.v - hi_v) <= eps;
        if (!on_u || !on_v)
            throw std::invalid_argument("grid_cloud: X must be an axis-aligned rectangle");
    }
    double du = (hi_u - lo_u) / k;
    double dv = (hi_v - lo_v) / k;
    SourceCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(k) * k);
    cloud.cells.reserve(static_cast<std::size_t>(k) * k);
    for (int iv = 0; iv < k; ++iv) {
        for (int iu = 0; iu < k; ++iu) {
            double u0 = lo_u + iu * du, v0 = lo_v + iv * dv;
            cloud.points.push_back({u0 + 0.5 * du, v0 + 0.5 * dv});
            cloud.cells.push_back(make_rectangle(u0, v0, u0 + du, v0 + dv));
        }
    }
    finish_cloud(cloud, rect);
    return cloud;
}

SourceCloud cloud_from_points(const ConvexPolygon& domain, std::vector<Point2> points) {
    if (points.empty()) throw std::invalid_argument("cloud_from_points: no points");
    std::vector<double> phi(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) phi[i] = 0.5 * norm2(points[i]);
    std::vector<LabeledPolygon> cells = power_cells(points, phi, domain);
    SourceCloud cloud;
    cloud.points = std::move(points);
    cloud.cells.reserve(cells.size());
    for (const LabeledPolygon& c : cells) cloud.cells.push_back(c.polygon());
    finish_cloud(cloud, domain);
    return cloud;
}

SourceCloud random_cloud(const ConvexPolygon& domain, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_cloud: n must be >= 1");
    if (domain.size() < 3) throw std::invalid_argument("random_cloud: degenerate domain");
    double lo_u = domain.vertices[0].u, hi_u = lo_u;
    double lo_v = domain.vertices[0].v, hi_v = lo_v;
    for (Point2 p : domain.vertices) {
        lo_u = std::min(lo_u, p.u);
        hi_u = std::max(hi_u, p.u);
        lo_v = std::min(lo_v, p.v);
        hi_v = std::max(hi_v, p.v);
    }
    std::mt19937_64 rng(seed);
    auto next_unit = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    while (pts.size() < static_cast<std::size_t>(n)) {
        Point2 p{lo_u + (hi_u - lo_u) * next_unit(), lo_v + (hi_v - lo_v) * next_unit()};
        if (contains(domain, p, 0.0)) pts.push_back(p);
    }
    return cloud_from_points(domain, std::move(pts));
}

namespace {

DiscreteMeasure normalize_masses(std::vector<Point2> points, std::vector<double> masses,
                                 const char* zero_message) {
    double floor = -1e-10;
    double total = 0.0;
    for (double& m : masses) {
        if (m < floor) throw std::runtime_error("bad density");
        m = std::max(m, 0.0);
        total += m;
    }
    if (!(total > 0.0)) throw std::runtime_error(zero_message);
    for (double& m : masses) m /= total;
    return {std::move(points), std::move(masses)};
}

}  // namespace

DiscreteMeasure discretize(const SourceMeasure& mu, const SourceCloud& cloud) {
    std::vector<double> masses(cloud.points.size());
    for (std::size_t i = 0; i < cloud.cells.size(); ++i)
        masses[i] = mass_and_centroid(cloud.cells[i], mu.density).mass;
    return normalize_masses(cloud.points, std::move(masses), "bad density");
}

DiscreteMeasure discretize_weighted(const SourceMeasure& mu, const SourceCloud& cloud) {
    std::vector<double> masses(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        double fv = mu.density(cloud.points[i]);
        if (!std::isfinite(fv)) throw std::runtime_error("bad density");
        masses[i] = fv * area(cloud.cells[i]);
    }
    return normalize_masses(cloud.points, std::move(masses), "degenerate discretization");
}

double w1_upper_bound(const SourceMeasure& mu, const SourceCloud& cloud) {
    double total = 0.0;
    for (std::size_t i = 0; i < cloud.cells.size(); ++i) {
        Point2 xi = cloud.points[i];
        total += integrate_from(
            cloud.cells[i], xi,
            [&](Point2 p) { return dist(p, xi) * mu.density(p); }, 1);
    }
    return total;
}

void write_cloud_csv(const std::string& path, const std::vector<Point2>& points,
                     const std::vector<double>* masses) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << (masses ? "x,y,mass\n" : "x,y\n");
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << points[i].u << ',' << points[i].v;
        if (masses) out << ',' << (*masses)[i];
        out << '\n';
    }
}

CloudFile read_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty cloud file " + path);
    bool has_mass = line.find("mass") != std::string::npos;
    CloudFile cf;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        Point2 p;
        if (!std::getline(row, tok, ',')) break;
        p.u = std::stod(tok);
        if (!std::getline(row, tok, ',')) throw std::runtime_error("bad row in " + path);
        p.v = std::stod(tok);
        cf.points.push_back(p);
        if (has_mass) {
            if (!std::getline(row, tok, ',')) throw std::runtime_error("bad row in " + path);
            cf.masses.push_back(std::stod(tok));
        }
    }
    return cf;
}

}  // namespace sdot
