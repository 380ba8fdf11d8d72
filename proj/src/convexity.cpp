#include "sdot/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace sdot {

namespace {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 sub(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 cross3(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm3(Vec3 a) { return std::sqrt(dot3(a, a)); }

struct HullFace {
    int a = 0, b = 0, c = 0;
    Vec3 n;           // outward
    double off = 0.0; // dot(n, vertex)
    bool alive = false;
};

HullFace make_face(const std::vector<Vec3>& pts, int a, int b, int c) {
    HullFace f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.n = cross3(sub(pts[static_cast<std::size_t>(b)], pts[static_cast<std::size_t>(a)]),
                 sub(pts[static_cast<std::size_t>(c)], pts[static_cast<std::size_t>(a)]));
    f.off = dot3(f.n, pts[static_cast<std::size_t>(a)]);
    f.alive = true;
    return f;
}

// Incremental convex hull in R^3. Points within eps of a face plane count as
// visible so that exactly-cocircular lifted configurations still land on the
// hull as vertices.
class IncrementalHull {
  public:
    IncrementalHull(const std::vector<Vec3>& pts, double eps) : pts_(pts), eps_(eps) {}

    // false when all points are coplanar
    bool build() {
        int i0 = 0;
        for (int i = 1; i < n(); ++i) {
            const Vec3& p = pts_[static_cast<std::size_t>(i)];
            const Vec3& q = pts_[static_cast<std::size_t>(i0)];
            if (p.x < q.x || (p.x == q.x && (p.y < q.y || (p.y == q.y && p.z < q.z)))) i0 = i;
        }
        int i1 = -1;
        double best = eps_;
        for (int i = 0; i < n(); ++i) {
            double d = norm3(sub(pts_[static_cast<std::size_t>(i)],
                                 pts_[static_cast<std::size_t>(i0)]));
            if (d > best) {
                best = d;
                i1 = i;
            }
        }
        if (i1 < 0) throw std::runtime_error("hull construction failed: coincident points");
        int i2 = -1;
        best = eps_ * best;
        Vec3 e = sub(pts_[static_cast<std::size_t>(i1)], pts_[static_cast<std::size_t>(i0)]);
        for (int i = 0; i < n(); ++i) {
            double d = norm3(cross3(e, sub(pts_[static_cast<std::size_t>(i)],
                                           pts_[static_cast<std::size_t>(i0)])));
            if (d > best) {
                best = d;
                i2 = i;
            }
        }
        if (i2 < 0) throw std::runtime_error("hull construction failed: collinear points");
        HullFace base = make_face(pts_, i0, i1, i2);
        int i3 = -1;
        double nb = norm3(base.n);
        best = eps_ * nb;
        for (int i = 0; i < n(); ++i) {
            double d = std::abs(dot3(base.n, pts_[static_cast<std::size_t>(i)]) - base.off);
            if (d > best) {
                best = d;
                i3 = i;
            }
        }
        if (i3 < 0) return false;  // coplanar input

        faces_.clear();
        add_tetra(i0, i1, i2, i3);
        for (int i = 0; i < n(); ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            insert(i);
        }
        validate();
        return true;
    }

    const std::vector<HullFace>& faces() const { return faces_; }

  private:
    int n() const { return static_cast<int>(pts_.size()); }

    void add_tetra(int a, int b, int c, int d) {
        Vec3 centroid{0, 0, 0};
        for (int i : {a, b, c, d}) {
            centroid.x += 0.25 * pts_[static_cast<std::size_t>(i)].x;
            centroid.y += 0.25 * pts_[static_cast<std::size_t>(i)].y;
            centroid.z += 0.25 * pts_[static_cast<std::size_t>(i)].z;
        }
        int tris[4][3] = {{a, b, c}, {a, b, d}, {a, c, d}, {b, c, d}};
        for (auto& t : tris) {
            HullFace f = make_face(pts_, t[0], t[1], t[2]);
            if (dot3(f.n, centroid) > f.off) f = make_face(pts_, t[0], t[2], t[1]);
            faces_.push_back(f);
        }
    }

    void insert(int p) {
        const Vec3& q = pts_[static_cast<std::size_t>(p)];
        std::vector<int> visible;
        for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
            const HullFace& f = faces_[fi];
            if (!f.alive) continue;
            double nn = norm3(f.n);
            if (dot3(f.n, q) - f.off > -eps_ * nn) visible.push_back(static_cast<int>(fi));
        }
        if (visible.empty()) return;  // interior point

        // horizon: directed edges of visible faces whose twin is hidden
        std::map<std::pair<int, int>, int> directed;
        for (int fi : visible) {
            const HullFace& f = faces_[static_cast<std::size_t>(fi)];
            directed[{f.a, f.b}] = fi;
            directed[{f.b, f.c}] = fi;
            directed[{f.c, f.a}] = fi;
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& [edge, fi] : directed) {
            if (directed.find({edge.second, edge.first}) == directed.end())
                horizon.push_back(edge);
        }
        if (horizon.empty()) return;  // p inside the visible patch's hull (duplicate-ish)
        for (int fi : visible) faces_[static_cast<std::size_t>(fi)].alive = false;
        for (auto [u, v] : horizon) faces_.push_back(make_face(pts_, u, v, p));
    }

    void validate() const {
        // closed 2-manifold: every directed edge paired with its reverse
        std::map<std::pair<int, int>, int> count;
        for (const HullFace& f : faces_) {
            if (!f.alive) continue;
            ++count[{f.a, f.b}];
            ++count[{f.b, f.c}];
            ++count[{f.c, f.a}];
        }
        for (const auto& [edge, c] : count) {
            auto rev = count.find({edge.second, edge.first});
            if (c != 1 || rev == count.end() || rev->second != 1)
                throw std::runtime_error("hull construction failed: non-manifold surface");
        }
    }

    const std::vector<Vec3>& pts_;
    double eps_;
    std::vector<HullFace> faces_;
};

struct LowerFace {
    int a, b, c;
    Point2 gradient;
    double intercept;
    double projected_area;
};

// Chains the outer boundary of a group of triangles into a CCW polygon.
ConvexPolygon group_boundary(const std::vector<const LowerFace*>& group,
                             const std::vector<Vec3>& pts) {
    std::map<std::pair<int, int>, int> directed;
    for (const LowerFace* f : group) {
        // projected lower faces wind clockwise; reverse to get CCW in the plane
        directed[{f->b, f->a}] = 1;
        directed[{f->c, f->b}] = 1;
        directed[{f->a, f->c}] = 1;
    }
    std::map<int, int> next;
    int start = -1;
    for (const auto& [edge, tag] : directed) {
        (void)tag;
        if (directed.find({edge.second, edge.first}) == directed.end()) {
            next[edge.first] = edge.second;
            if (start < 0 || edge.first < start) start = edge.first;
        }
    }
    ConvexPolygon poly;
    if (start < 0) return poly;
    int v = start;
    do {
        const Vec3& p = pts[static_cast<std::size_t>(v)];
        poly.vertices.push_back({p.x, p.y});
        auto it = next.find(v);
        if (it == next.end()) throw std::runtime_error("hull facet boundary is broken");
        v = it->second;
    } while (v != start && poly.vertices.size() <= next.size());
    if (v != start) throw std::runtime_error("hull facet boundary is broken");
    return poly;
}

}  // namespace

double PiecewiseAffineConvex::value(Point2 p) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const AffinePiece& piece : pieces)
        best = std::max(best, dot(piece.gradient, p) + piece.intercept);
    return best;
}

double legendre_discrete(const SourceCloud& cloud, const PotentialVector& phi, Point2 y) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        best = std::max(best, dot(cloud.points[i], y) - phi.values[i]);
    return best;
}

PiecewiseAffineConvex extend_pwa(const SourceCloud& cloud, const PotentialVector& phi) {
    std::size_t n = cloud.points.size();
    if (phi.values.size() != n) throw std::invalid_argument("phi size mismatch");
    ConvexPolygon domain = convex_hull(cloud.points);
    if (domain.empty()) throw std::invalid_argument("degenerate domain");

    std::vector<Vec3> lifted(n);
    double scale = length_scale(std::span<const Point2>(cloud.points));
    for (std::size_t i = 0; i < n; ++i) {
        lifted[i] = {cloud.points[i].u, cloud.points[i].v, phi.values[i]};
        scale = std::max(scale, std::abs(phi.values[i]));
    }
    double eps = kEpsGeomRel * scale;

    PiecewiseAffineConvex pwa;
    pwa.domain = domain;

    IncrementalHull hull(lifted, eps);
    if (!hull.build()) {
        // all lifted points on one plane: a single affine piece over X_h
        std::size_t i0 = 0, i1 = 1;
        while (i1 < n && dist(cloud.points[i0], cloud.points[i1]) <= eps) ++i1;
        std::size_t i2 = i1 + 1;
        Point2 e = cloud.points[i1] - cloud.points[i0];
        while (i2 < n &&
               std::abs(cross(e, cloud.points[i2] - cloud.points[i0])) <= eps * scale)
            ++i2;
        if (i1 >= n || i2 >= n) throw std::invalid_argument("degenerate domain");
        Vec3 nrm = cross3(sub(lifted[i1], lifted[i0]), sub(lifted[i2], lifted[i0]));
        if (std::abs(nrm.z) <= eps) throw std::invalid_argument("degenerate domain");
        Point2 grad{-nrm.x / nrm.z, -nrm.y / nrm.z};
        double intercept = dot3(nrm, lifted[i0]) / nrm.z;
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        pwa.pieces.push_back({grad, intercept});
        pwa.facets.push_back({domain, 0, std::move(all)});
        return pwa;
    }

    std::vector<LowerFace> lower;
    for (const HullFace& f : hull.faces()) {
        if (!f.alive) continue;
        double nn = norm3(f.n);
        if (!(f.n.z < -1e-8 * nn)) continue;
        LowerFace lf;
        lf.a = f.a;
        lf.b = f.b;
        lf.c = f.c;
        lf.gradient = {-f.n.x / f.n.z, -f.n.y / f.n.z};
        lf.intercept = f.off / f.n.z;
        lf.projected_area = 0.5 * std::abs(f.n.z);
        lower.push_back(lf);
    }
    if (lower.empty()) throw std::runtime_error("hull construction failed: no lower faces");

    // merge adjacent faces with equal gradients (cocircular ties); keyed to
    // the site scale, not the gradient scale, which thin boundary triangles
    // can blow up arbitrarily
    double merge_tol = 1e-9 * scale;
    std::vector<int> parent(lower.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x)
            x = parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    std::map<std::pair<int, int>, int> edge_owner;
    for (std::size_t fi = 0; fi < lower.size(); ++fi) {
        const LowerFace& f = lower[fi];
        int vs[3] = {f.a, f.b, f.c};
        for (int k = 0; k < 3; ++k) {
            int u = vs[k], v = vs[(k + 1) % 3];
            auto key = std::minmax(u, v);
            auto [it, fresh] = edge_owner.try_emplace({key.first, key.second},
                                                      static_cast<int>(fi));
            if (!fresh) {
                const LowerFace& g = lower[static_cast<std::size_t>(it->second)];
                if (dist(f.gradient, g.gradient) <= merge_tol)
                    parent[static_cast<std::size_t>(find(static_cast<int>(fi)))] =
                        find(it->second);
            }
        }
    }
    std::map<int, std::vector<const LowerFace*>> groups;
    for (std::size_t fi = 0; fi < lower.size(); ++fi)
        groups[find(static_cast<int>(fi))].push_back(&lower[fi]);

    for (const auto& [root, group] : groups) {
        (void)root;
        const LowerFace* rep = *std::max_element(
            group.begin(), group.end(), [](const LowerFace* x, const LowerFace* y) {
                return x->projected_area < y->projected_area;
            });
        ConvexPolygon region = group_boundary(group, lifted);
        if (region.size() < 3) continue;
        std::vector<int> sites;
        for (const LowerFace* f : group) {
            sites.push_back(f->a);
            sites.push_back(f->b);
            sites.push_back(f->c);
        }
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        pwa.pieces.push_back({rep->gradient, rep->intercept});
        pwa.facets.push_back({std::move(region), static_cast<int>(pwa.pieces.size()) - 1,
                              std::move(sites)});
    }
    return pwa;
}

TransportMapPWC transport_map(const PiecewiseAffineConvex& pwa,
                              const LaguerreDiagram& diagram) {
    TransportMapPWC map;
    double tol = 1e-9 * (1.0 + length_scale(diagram.boundary));
    double pair_tol = 1e-7 * (1.0 + length_scale(diagram.boundary));
    map.facets.reserve(pwa.facets.size());
    map.targets.reserve(pwa.facets.size());
    for (const PwaFacet& facet : pwa.facets) {
        Point2 y = pwa.pieces[static_cast<std::size_t>(facet.piece)].gradient;
        if (signed_distance(diagram.boundary, y) > tol)
            throw std::runtime_error("duality violation");
        // each target must realize a dual vertex of the clipped diagram
        double nearest = std::numeric_limits<double>::infinity();
        for (const DiagramVertex& v : diagram.dual_vertices)
            nearest = std::min(nearest, dist(y, v.position));
        for (const DiagramVertex& v : diagram.boundary_vertices)
            nearest = std::min(nearest, dist(y, v.position));
        if (nearest > pair_tol) throw std::runtime_error("duality violation");
        map.facets.push_back(facet.region);
        map.targets.push_back(y);
    }
    return map;
}

TransportMapPWC transport_map(const SourceCloud& cloud, const PotentialVector& phi,
                              const LaguerreDiagram& diagram) {
    return transport_map(extend_pwa(cloud, phi), diagram);
}

BijectionReport verify_facet_vertex_bijection(const PiecewiseAffineConvex& pwa,
                                              const LaguerreDiagram& diagram,
                                              const SourceCloud& cloud,
                                              const PotentialVector& phi) {
    BijectionReport report;
    report.facet_count = static_cast<int>(pwa.facets.size());
    report.interior_vertex_count = static_cast<int>(diagram.dual_vertices.size());
    report.boundary_vertex_count = static_cast<int>(diagram.boundary_vertices.size());
    for (const DiagramVertex& v : diagram.dual_vertices)
        report.tie_count += v.cells.size() > 3;

    double pair_tol = 1e-7 * (1.0 + length_scale(diagram.boundary));
    std::vector<bool> vertex_used(diagram.dual_vertices.size(), false);
    for (std::size_t fi = 0; fi < pwa.facets.size(); ++fi) {
        const PwaFacet& facet = pwa.facets[fi];
        Point2 g = pwa.pieces[static_cast<std::size_t>(facet.piece)].gradient;
        int best = -1;
        double best_d = pair_tol;
        for (std::size_t vi = 0; vi < diagram.dual_vertices.size(); ++vi) {
            double d = dist(g, diagram.dual_vertices[vi].position);
            if (d <= best_d && !vertex_used[vi]) {
                best = static_cast<int>(vi);
                best_d = d;
            }
        }
        if (best >= 0) {
            vertex_used[static_cast<std::size_t>(best)] = true;
            report.pairs.emplace_back(static_cast<int>(fi), best);
            report.max_interior_gradient_distance =
                std::max(report.max_interior_gradient_distance,
                         signed_distance(diagram.boundary, g));
            continue;
        }
        // off the clipped complex: the vertex must still exist on the
        // unclipped one, i.e. the facet's corners attain the Legendre max at g
        double top = legendre_discrete(cloud, phi, g);
        double audit_tol = 1e-8 * (1.0 + std::abs(top) + norm(g));
        bool audit_ok = facet.sites.size() >= 3;
        for (int s : facet.sites) {
            double val = dot(cloud.points[static_cast<std::size_t>(s)], g) -
                         phi.values[static_cast<std::size_t>(s)];
            audit_ok = audit_ok && std::abs(val - top) <= audit_tol;
        }
        if (audit_ok && signed_distance(diagram.boundary, g) > -pair_tol) {
            report.exterior_facets.push_back(static_cast<int>(fi));
        } else {
            report.unmatched_facets.push_back(static_cast<int>(fi));
        }
    }
    for (std::size_t vi = 0; vi < vertex_used.size(); ++vi)
        if (!vertex_used[vi]) report.unmatched_vertices.push_back(static_cast<int>(vi));
    return report;
}

std::vector<AffinePiece> dual_complex_pieces(const SourceCloud& cloud,
                                             const PotentialVector& phi,
                                             const LaguerreDiagram& diagram) {
    std::vector<AffinePiece> pieces;
    auto add = [&](Point2 y) {
        pieces.push_back({y, -legendre_discrete(cloud, phi, y)});
    };
    for (const DiagramVertex& v : diagram.dual_vertices) add(v.position);
    for (const DiagramVertex& v : diagram.boundary_vertices) add(v.position);
    return pieces;
}

DiscreteMeasure ma_measure_pwa(const std::vector<AffinePiece>& pieces) {
    if (pieces.empty()) return {};

    // dedup: identical gradients keep the dominating (larger) intercept
    std::vector<AffinePiece> active = pieces;
    std::sort(active.begin(), active.end(), [](const AffinePiece& a, const AffinePiece& b) {
        return a.gradient.u < b.gradient.u ||
               (a.gradient.u == b.gradient.u &&
                (a.gradient.v < b.gradient.v ||
                 (a.gradient.v == b.gradient.v && a.intercept > b.intercept)));
    });
    double gscale = 1.0;
    for (const AffinePiece& p : active)
        gscale = std::max({gscale, std::abs(p.gradient.u), std::abs(p.gradient.v)});
    double dedup = 1e-13 * gscale;
    std::vector<AffinePiece> kept;
    for (const AffinePiece& p : active) {
        if (!kept.empty() && dist(kept.back().gradient, p.gradient) <= dedup) continue;
        kept.push_back(p);
    }
    if (kept.size() == 1) return {};  // a single affine function has zero MA measure

    std::vector<Point2> sites(kept.size());
    std::vector<double> offsets(kept.size());
    double bscale = 0.0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        sites[i] = kept[i].gradient;
        offsets[i] = -kept[i].intercept;
        bscale = std::max(bscale, std::abs(kept[i].intercept));
    }

    double width = 8.0 * (1.0 + gscale + bscale);
    for (int attempt = 0; attempt < 8; ++attempt, width *= 4.0) {
        ConvexPolygon box = make_rectangle(-width, -width, width, width);
        std::vector<LabeledPolygon> cells = power_cells(sites, offsets, box);

        std::vector<Point2> active_gradients;
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (!cells[i].empty()) active_gradients.push_back(sites[i]);
        if (active_gradients.size() < 3) return {};
        ConvexPolygon image = convex_hull(active_gradients);
        double image_area = area(image);

        DiscreteMeasure atoms;
        double total = 0.0;
        for (const Junction& jn : extract_junctions(cells, 1e-9 * (1.0 + gscale))) {
            if (jn.on_region_boundary || jn.cells.size() < 3) continue;
            std::vector<Point2> grads;
            grads.reserve(jn.cells.size());
            for (int ci : jn.cells) grads.push_back(sites[static_cast<std::size_t>(ci)]);
            double mass = area(convex_hull(grads));
            atoms.points.push_back(jn.position);
            atoms.masses.push_back(mass);
            total += mass;
        }
        // all 0-cells found exactly when the atom masses rebuild the area of
        // the gradient image; otherwise the box cut some off
        if (std::abs(total - image_area) <= 1e-9 * (1.0 + image_area)) return atoms;
    }
    throw std::runtime_error("ma_measure_pwa: complex does not close");
}

double support_function(const ConvexPolygon& y, Point2 x) {
    if (y.empty()) throw std::invalid_argument("empty domain");
    double best = -std::numeric_limits<double>::infinity();
    for (Point2 p : y.vertices) best = std::max(best, dot(x, p));
    return best;
}

void write_map_csv(const TransportMapPWC& map, const std::string& prefix) {
    std::ofstream facets(prefix + "_facets.csv");
    if (!facets) throw std::runtime_error("cannot open " + prefix + "_facets.csv");
    facets.precision(17);
    facets << "facet_id,vertex_index,x,y\n";
    for (std::size_t i = 0; i < map.facets.size(); ++i) {
        for (std::size_t k = 0; k < map.facets[i].size(); ++k) {
            facets << i << ',' << k << ',' << map.facets[i].vertices[k].u << ','
                   << map.facets[i].vertices[k].v << '\n';
        }
    }
    std::ofstream targets(prefix + "_targets.csv");
    if (!targets) throw std::runtime_error("cannot open " + prefix + "_targets.csv");
    targets.precision(17);
    targets << "facet_id,target_x,target_y\n";
    for (std::size_t i = 0; i < map.targets.size(); ++i) {
        targets << i << ',' << map.targets[i].u << ',' << map.targets[i].v << '\n';
    }
}

}  // namespace sdot
