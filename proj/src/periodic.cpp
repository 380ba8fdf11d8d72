#include "sdot/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace sdot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double t) { return t - std::floor(t); }
double wrap_nearest(double t) { return t - std::round(t); }

}  // namespace

double TorusProblem::density(Point2 p) const {
    return (1.0 + beta * std::cos(kTwoPi * p.u)) * (1.0 + beta * std::cos(kTwoPi * p.v));
}

double TorusProblem::u_exact(Point2 p) const {
    return -beta * (std::cos(kTwoPi * p.u) + std::cos(kTwoPi * p.v)) / (kTwoPi * kTwoPi);
}

Point2 TorusProblem::map(Point2 p) const {
    return {p.u + beta * std::sin(kTwoPi * p.u) / kTwoPi,
            p.v + beta * std::sin(kTwoPi * p.v) / kTwoPi};
}

TorusProblem make_torus_problem(double beta) {
    if (!(std::abs(beta) < 1.0))
        throw std::invalid_argument("torus problem needs |beta| < 1");
    TorusProblem problem{beta};
    double mass = integrate(unit_square(), [&](Point2 p) { return problem.density(p); }, 4);
    if (std::abs(mass - 1.0) > 1e-7)
        throw std::logic_error("torus problem: density does not have unit mass");
    return problem;
}

PeriodicDiagram periodic_diagram(const TorusCloud& cloud,
                                 const QuasiPeriodicPotential& u, const Density& g) {
    int n = cloud.size();
    if (n < 1 || static_cast<int>(u.u.size()) != n)
        throw std::invalid_argument("periodic_diagram: size mismatch");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Point2 d = cloud.points[static_cast<std::size_t>(i)] -
                       cloud.points[static_cast<std::size_t>(j)];
            if (std::hypot(wrap_nearest(d.u), wrap_nearest(d.v)) < 1e-12)
                throw std::invalid_argument("coincident sites");
        }
    }

    // 3x3 replication; phi(x + t) = u(x) + |x + t|^2 / 2
    std::vector<Point2> sites;
    std::vector<double> phi;
    sites.reserve(static_cast<std::size_t>(9) * n);
    phi.reserve(static_cast<std::size_t>(9) * n);
    for (int tv = -1; tv <= 1; ++tv) {
        for (int tu = -1; tu <= 1; ++tu) {
            for (int i = 0; i < n; ++i) {
                Point2 p = cloud.points[static_cast<std::size_t>(i)] +
                           Point2{static_cast<double>(tu), static_cast<double>(tv)};
                sites.push_back(p);
                phi.push_back(u.u[static_cast<std::size_t>(i)] + 0.5 * norm2(p));
            }
        }
    }
    auto base_of = [n](int copy) { return copy % n; };

    ConvexPolygon block = make_rectangle(-1.0, -1.0, 2.0, 2.0);
    ConvexPolygon square = unit_square();
    std::vector<LabeledPolygon> cells = power_cells(sites, phi, block);

    // replication soundness: a copy outside the 3x3 block sits at distance
    // >= 1 from the fundamental square, so it cannot cut a piece with
    // |y - site|^2 + 2 osc(u) <= 1 at every piece vertex y
    double osc = 0.0;
    {
        double lo = u.u[0], hi = u.u[0];
        for (double v : u.u) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        osc = hi - lo;
    }

    PeriodicDiagram d;
    d.masses.assign(static_cast<std::size_t>(n), 0.0);

    // square-clip labels stay negative but distinct from the block's
    constexpr int kSquareLabel = -100;
    std::map<std::pair<int, int>, PeriodicDiagram::Edge> edge_map;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].empty()) continue;
        LabeledPolygon piece = cells[c];
        for (std::size_t e = 0; e < square.size(); ++e) {
            Point2 a = square.vertices[e];
            Point2 b = square.vertices[(e + 1) % square.size()];
            Point2 nrm{(b - a).v, -(b - a).u};  // outward for CCW
            piece = clip_labeled(piece, HalfPlane{nrm, dot(nrm, a)},
                                 kSquareLabel - static_cast<int>(e));
            if (piece.empty()) break;
        }
        if (piece.empty()) continue;

        for (Point2 y : piece.pts) {
            if (norm2(y - sites[c]) + 2.0 * osc > 1.0)
                throw std::runtime_error("insufficient replication");
        }

        PeriodicDiagram::Piece out;
        out.base = base_of(static_cast<int>(c));
        out.site = sites[c];
        out.phi = phi[c];
        out.region = piece.polygon();
        MassCentroid mc = mass_and_centroid(out.region, g);
        out.mass = mc.mass;
        out.centroid = mc.centroid.value_or(Point2{0.0, 0.0});
        d.masses[static_cast<std::size_t>(out.base)] += out.mass;

        // in-square bisector segments feed the Jacobian
        std::size_t m = piece.pts.size();
        for (std::size_t e = 0; e < m; ++e) {
            int j = piece.labels[e];
            if (j < 0) continue;
            int bi = out.base, bj = base_of(j);
            if (bi == bj) continue;  // edges against own translates do not move
            int ci = static_cast<int>(c);
            std::pair<int, int> key{std::min(ci, j), std::max(ci, j)};
            if (edge_map.find(key) != edge_map.end()) continue;
            PeriodicDiagram::Edge edge;
            edge.i = bi;
            edge.j = bj;
            edge.site_i = sites[c];
            edge.site_j = sites[static_cast<std::size_t>(j)];
            edge.a = piece.pts[e];
            edge.b = piece.pts[(e + 1) % m];
            edge_map.emplace(key, edge);
        }
        d.pieces.push_back(std::move(out));
    }

    double total = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("periodic diagram does not tile the torus");
    for (auto& [key, edge] : edge_map) d.edges.push_back(edge);

    // dual facets: junctions of the unclipped (block) complex, one facet per
    // junction as the hull of the incident replicated sites
    double tile = 0.0;
    for (const Junction& jn : extract_junctions(cells, 3e-9)) {
        if (jn.on_region_boundary || jn.cells.size() < 3) continue;
        std::vector<Point2> corners;
        corners.reserve(jn.cells.size());
        for (int c : jn.cells) corners.push_back(sites[static_cast<std::size_t>(c)]);
        ConvexPolygon facet = convex_hull(corners);
        for (std::size_t e = 0; e < square.size() && !facet.empty(); ++e) {
            Point2 a = square.vertices[e];
            Point2 b = square.vertices[(e + 1) % square.size()];
            Point2 nrm{(b - a).v, -(b - a).u};
            facet = clip(facet, HalfPlane{nrm, dot(nrm, a)});
        }
        if (facet.empty()) continue;
        tile += area(facet);
        d.facets.push_back(std::move(facet));
        d.facet_targets.push_back(jn.position);
    }
    if (std::abs(tile - 1.0) > 1e-9)
        throw std::runtime_error("periodic dual complex does not tile the torus");
    return d;
}

double periodic_mesh_norm(const std::vector<Point2>& points) {
    TorusCloud cloud;
    cloud.points = points;
    cloud.masses.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    QuasiPeriodicPotential zero;
    zero.u.assign(points.size(), 0.0);
    PeriodicDiagram d = periodic_diagram(cloud, zero, [](Point2) { return 1.0; });
    // assemble each torus cell in its base frame (wrapped pieces moved back
    // by the copy offset), then take the max pairwise vertex distance
    std::vector<std::vector<Point2>> verts(points.size());
    for (const PeriodicDiagram::Piece& piece : d.pieces) {
        Point2 shift = piece.site - points[static_cast<std::size_t>(piece.base)];
        for (Point2 p : piece.region.vertices)
            verts[static_cast<std::size_t>(piece.base)].push_back(p - shift);
    }
    double h = 0.0;
    for (const std::vector<Point2>& cell : verts) {
        for (std::size_t a = 0; a < cell.size(); ++a)
            for (std::size_t b = a + 1; b < cell.size(); ++b)
                h = std::max(h, dist(cell[a], cell[b]));
    }
    return h;
}

TorusCloud torus_grid_cloud(int k, const Density& f) {
    if (k < 1) throw std::invalid_argument("torus_grid_cloud: k must be >= 1");
    TorusCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(k) * k);
    cloud.masses.reserve(static_cast<std::size_t>(k) * k);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            double u0 = static_cast<double>(i) / k, v0 = static_cast<double>(j) / k;
            cloud.points.push_back({u0 + 0.5 / k, v0 + 0.5 / k});
            double mass =
                mass_and_centroid(make_rectangle(u0, v0, u0 + 1.0 / k, v0 + 1.0 / k), f)
                    .mass;
            if (mass < -1e-12) throw std::runtime_error("bad density");
            cloud.masses.push_back(std::max(mass, 0.0));
            total += cloud.masses.back();
        }
    }
    if (!(total > 0.0)) throw std::runtime_error("bad density");
    for (double& m : cloud.masses) m /= total;
    cloud.mesh_norm = std::sqrt(2.0) / k;
    return cloud;
}

namespace {

class PeriodicSystem final : public MassSystem {
  public:
    PeriodicSystem(const TorusCloud& cloud, Density g)
        : cloud_(cloud), g_(std::move(g)) {}

    int size() const override { return cloud_.size(); }

    void set_potential(const std::vector<double>& phi) override {
        QuasiPeriodicPotential u{phi};
        diagram_ = periodic_diagram(cloud_, u, g_);
    }

    const std::vector<double>& masses() const override { return diagram_.masses; }

    double energy_base() const override {
        double e = 0.0;
        for (const PeriodicDiagram::Piece& piece : diagram_.pieces)
            e += piece.mass * (dot(piece.site, piece.centroid) - piece.phi);
        return e;
    }

    MassJacobian jacobian() const override {
        MassJacobian h;
        h.n = cloud_.size();
        h.diagonal.assign(static_cast<std::size_t>(h.n), 0.0);
        std::map<std::pair<int, int>, double> acc;
        for (const PeriodicDiagram::Edge& e : diagram_.edges) {
            double ds = integrate_segment(e.a, e.b, g_);
            double gap = dist(e.site_i, e.site_j);
            acc[{std::min(e.i, e.j), std::max(e.i, e.j)}] += ds / gap;
        }
        for (const auto& [key, value] : acc) {
            h.edge_i.push_back(key.first);
            h.edge_j.push_back(key.second);
            h.edge_value.push_back(value);
            h.diagonal[static_cast<std::size_t>(key.first)] -= value;
            h.diagonal[static_cast<std::size_t>(key.second)] -= value;
        }
        return h;
    }

    const PeriodicDiagram& diagram() const { return diagram_; }

  private:
    const TorusCloud& cloud_;
    Density g_;
    PeriodicDiagram diagram_;
};

}  // namespace

std::pair<QuasiPeriodicPotential, SolveReport> periodic_solve(
    const TorusCloud& cloud, const std::vector<double>& f, const Density& g,
    const SolveSettings& settings) {
    for (double fi : f) {
        if (!(fi > 0.0)) throw std::invalid_argument("all target masses must be positive");
    }
    double total = mass_and_centroid(unit_square(), g).mass;
    Density normalized = [g, total](Point2 p) { return g(p) / total; };
    PeriodicSystem system(cloud, normalized);
    std::vector<double> zero(static_cast<std::size_t>(cloud.size()), 0.0);
    auto [u, report] = damped_newton_core(system, f, zero, settings);
    return {QuasiPeriodicPotential{std::move(u)}, std::move(report)};
}

TransportMapPWC periodic_transport_map(const PeriodicDiagram& diagram) {
    TransportMapPWC map;
    map.facets = diagram.facets;
    map.targets = diagram.facet_targets;
    return map;
}

double torus_h1_error(const TransportMapPWC& map, const TorusProblem& problem) {
    double err2 = 0.0;
    for (std::size_t j = 0; j < map.facets.size(); ++j) {
        Point2 y = map.targets[j];
        err2 += integrate(map.facets[j], [&](Point2 x) {
            Point2 t = problem.map({wrap_unit(x.u), wrap_unit(x.v)});
            Point2 diff{wrap_nearest(y.u - t.u), wrap_nearest(y.v - t.v)};
            return norm2(diff);
        });
    }
    return std::sqrt(std::max(0.0, err2));
}

}  // namespace sdot
