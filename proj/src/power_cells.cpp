#include "sdot/power_cells.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdot {

ConvexPolygon LabeledPolygon::polygon() const {
    ConvexPolygon p;
    p.vertices = pts;
    return p;
}

LabeledPolygon labeled_region(const ConvexPolygon& region) {
    LabeledPolygon lp;
    lp.pts = region.vertices;
    lp.labels.resize(lp.pts.size());
    for (std::size_t e = 0; e < lp.pts.size(); ++e) lp.labels[e] = -static_cast<int>(e) - 1;
    return lp;
}

LabeledPolygon clip_labeled(const LabeledPolygon& poly, const HalfPlane& hp, int label) {
    if (poly.empty()) return poly;
    LabeledPolygon out;
    std::size_t n = poly.pts.size();
    out.pts.reserve(n + 1);
    out.labels.reserve(n + 1);
    // same on-line tolerance band as geometry clip
    double tol =
        kEpsGeomRel * length_scale(std::span<const Point2>(poly.pts)) * norm(hp.normal);
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = poly.pts[i];
        Point2 b = poly.pts[(i + 1) % n];
        double da = dot(hp.normal, a) - hp.offset;
        double db = dot(hp.normal, b) - hp.offset;
        if (da <= tol) {
            out.pts.push_back(a);
            out.labels.push_back(da >= -tol && db > tol ? label : poly.labels[i]);
        }
        if ((da < -tol && db > tol) || (da > tol && db < -tol)) {
            double t = da / (da - db);
            out.pts.push_back(a + t * (b - a));
            // leaving the feasible side: the new edge lies on the cut line
            out.labels.push_back(da < 0.0 ? label : poly.labels[i]);
        }
    }
    // dedup near-coincident vertices, keeping the label of the edge that leaves
    // the retained vertex
    double eps = kEpsGeomRel * length_scale(std::span<const Point2>(out.pts));
    LabeledPolygon res;
    res.pts.reserve(out.pts.size());
    res.labels.reserve(out.pts.size());
    std::size_t m = out.pts.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (!res.pts.empty() && dist(res.pts.back(), out.pts[i]) <= eps) {
            res.labels.back() = out.labels[i];
            continue;
        }
        res.pts.push_back(out.pts[i]);
        res.labels.push_back(out.labels[i]);
    }
    while (res.pts.size() >= 2 && dist(res.pts.front(), res.pts.back()) <= eps) {
        res.pts.pop_back();
        res.labels.pop_back();
    }
    if (res.pts.size() < 3 || area(res.polygon()) < eps * eps) {
        res.pts.clear();
        res.labels.clear();
    }
    return res;
}

namespace {

struct BucketGrid {
    double u0 = 0.0, v0 = 0.0, step = 1.0;
    int nu = 1, nv = 1;
    std::vector<std::vector<int>> buckets;

    int index_of(Point2 p) const {
        int bu = std::clamp(static_cast<int>((p.u - u0) / step), 0, nu - 1);
        int bv = std::clamp(static_cast<int>((p.v - v0) / step), 0, nv - 1);
        return bv * nu + bu;
    }
};

BucketGrid make_grid(std::span<const Point2> sites, const ConvexPolygon& region) {
    BucketGrid g;
    double lo_u = sites[0].u, hi_u = sites[0].u, lo_v = sites[0].v, hi_v = sites[0].v;
    auto absorb = [&](Point2 p) {
        lo_u = std::min(lo_u, p.u);
        hi_u = std::max(hi_u, p.u);
        lo_v = std::min(lo_v, p.v);
        hi_v = std::max(hi_v, p.v);
    };
    for (Point2 p : sites) absorb(p);
    for (Point2 p : region.vertices) absorb(p);
    double extent = std::max({hi_u - lo_u, hi_v - lo_v, 1e-12});
    int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(sites.size()))));
    g.u0 = lo_u;
    g.v0 = lo_v;
    g.step = extent / n;
    g.nu = static_cast<int>((hi_u - lo_u) / g.step) + 1;
    g.nv = static_cast<int>((hi_v - lo_v) / g.step) + 1;
    g.buckets.assign(static_cast<std::size_t>(g.nu) * g.nv, {});
    for (std::size_t i = 0; i < sites.size(); ++i)
        g.buckets[g.index_of(sites[i])].push_back(static_cast<int>(i));
    return g;
}

struct CellBuilder {
    std::span<const Point2> sites;
    std::span<const double> phi;
    const ConvexPolygon& region;
    const BucketGrid* grid = nullptr;  // null for small site counts
    double dup_eps = 0.0;
    double osc = 0.0;  // oscillation of phi_k - |x_k|^2/2 over all sites

    double max_dist(const LabeledPolygon& poly, Point2 x) const {
        double r = 0.0;
        for (Point2 p : poly.pts) r = std::max(r, dist(p, x));
        return r;
    }

    // Applies the bisector of site j to the cell of site i. Returns false when
    // the cell became empty.
    bool apply(LabeledPolygon& poly, double& radius, std::size_t i, int j) const {
        if (static_cast<std::size_t>(j) == i) return true;
        Point2 xi = sites[i];
        Point2 delta = sites[j] - xi;
        double dn = norm(delta);
        double off = phi[j] - phi[i];
        if (dn <= dup_eps) {
            if (off <= 0.0) {  // duplicate with lower (or equal) phi dominates
                poly.pts.clear();
                poly.labels.clear();
                return false;
            }
            return true;
        }
        double signed_d = (off - dot(delta, xi)) / dn;
        if (signed_d >= radius) return true;  // line cannot reach the cell
        LabeledPolygon cut = clip_labeled(poly, HalfPlane{delta, off}, j);
        if (cut.pts.size() != poly.pts.size() ||
            !std::equal(cut.pts.begin(), cut.pts.end(), poly.pts.begin(),
                        [](Point2 a, Point2 b) { return a.u == b.u && a.v == b.v; })) {
            poly = std::move(cut);
            if (poly.empty()) return false;
            radius = max_dist(poly, xi);
        }
        return true;
    }

    LabeledPolygon build(std::size_t i) const {
        LabeledPolygon poly = labeled_region(region);
        if (poly.empty()) return poly;
        double radius = max_dist(poly, sites[i]);
        if (grid == nullptr) {
            for (std::size_t j = 0; j < sites.size(); ++j) {
                if (!apply(poly, radius, i, static_cast<int>(j))) return poly;
            }
            return poly;
        }
        const BucketGrid& g = *grid;
        int bi = g.index_of(sites[i]);
        int cu = bi % g.nu, cv = bi / g.nu;
        int max_ring = std::max({cu, g.nu - 1 - cu, cv, g.nv - 1 - cv});
        for (int r = 0; r <= max_ring; ++r) {
            double ring_min = (r - 1) * g.step;
            if (r >= 2 && ring_min > radius + std::sqrt(radius * radius + 2.0 * osc))
                break;  // every unvisited site is too far to cut the cell
            for (int dv = -r; dv <= r; ++dv) {
                int bv = cv + dv;
                if (bv < 0 || bv >= g.nv) continue;
                for (int du = -r; du <= r; ++du) {
                    if (std::max(std::abs(du), std::abs(dv)) != r) continue;
                    int bu = cu + du;
                    if (bu < 0 || bu >= g.nu) continue;
                    for (int j : g.buckets[static_cast<std::size_t>(bv) * g.nu + bu]) {
                        if (!apply(poly, radius, i, j)) return poly;
                    }
                }
            }
        }
        return poly;
    }
};

CellBuilder make_builder(std::span<const Point2> sites, std::span<const double> phi,
                         const ConvexPolygon& region, const BucketGrid* grid) {
    CellBuilder b{sites, phi, region, grid};
    b.dup_eps = 1e-14 * length_scale(sites);
    double lo = phi[0] - 0.5 * norm2(sites[0]);
    double hi = lo;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        double u = phi[k] - 0.5 * norm2(sites[k]);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    b.osc = hi - lo;
    return b;
}

}  // namespace

std::vector<LabeledPolygon> power_cells(std::span<const Point2> sites,
                                        std::span<const double> phi,
                                        const ConvexPolygon& region) {
    if (sites.empty() || sites.size() != phi.size())
        throw std::invalid_argument("power_cells: bad site/phi sizes");
    std::vector<LabeledPolygon> cells(sites.size());
    if (sites.size() <= 16) {
        CellBuilder b = make_builder(sites, phi, region, nullptr);
        for (std::size_t i = 0; i < sites.size(); ++i) cells[i] = b.build(i);
        return cells;
    }
    BucketGrid grid = make_grid(sites, region);
    CellBuilder b = make_builder(sites, phi, region, &grid);
    for (std::size_t i = 0; i < sites.size(); ++i) cells[i] = b.build(i);
    return cells;
}

std::vector<Junction> extract_junctions(const std::vector<LabeledPolygon>& cells,
                                        double tol) {
    struct Corner {
        Point2 pos;
        int cell;
        int la, lb;
    };
    std::vector<Corner> corners;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const LabeledPolygon& c = cells[i];
        std::size_t n = c.pts.size();
        for (std::size_t k = 0; k < n; ++k) {
            int la = c.labels[(k + n - 1) % n];
            int lb = c.labels[k];
            corners.push_back({c.pts[k], static_cast<int>(i), la, lb});
        }
    }
    std::vector<std::size_t> order(corners.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Point2& pa = corners[a].pos;
        const Point2& pb = corners[b].pos;
        return pa.u < pb.u || (pa.u == pb.u && pa.v < pb.v);
    });

    // union-find over corners within tol of each other (sweep on u)
    std::vector<int> parent(corners.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t a = 0; a < order.size(); ++a) {
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            if (corners[order[b]].pos.u - corners[order[a]].pos.u > tol) break;
            if (dist(corners[order[a]].pos, corners[order[b]].pos) <= tol)
                parent[find(static_cast<int>(order[a]))] = find(static_cast<int>(order[b]));
        }
    }

    std::vector<Junction> out;
    std::vector<int> root_junction(corners.size(), -1);
    for (std::size_t a : order) {
        int r = find(static_cast<int>(a));
        if (root_junction[r] < 0) {
            root_junction[r] = static_cast<int>(out.size());
            out.push_back({corners[a].pos, {}, false});
        }
        Junction& jn = out[static_cast<std::size_t>(root_junction[r])];
        const Corner& c = corners[a];
        jn.cells.push_back(c.cell);
        if (c.la >= 0) jn.cells.push_back(c.la);
        if (c.lb >= 0) jn.cells.push_back(c.lb);
        if (c.la < 0 || c.lb < 0) jn.on_region_boundary = true;
    }
    for (Junction& jn : out) {
        std::sort(jn.cells.begin(), jn.cells.end());
        jn.cells.erase(std::unique(jn.cells.begin(), jn.cells.end()), jn.cells.end());
    }
    return out;
}

std::vector<CellEdge> extract_edges(const std::vector<LabeledPolygon>& cells,
                                    double min_length) {
    std::vector<CellEdge> edges;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const LabeledPolygon& c = cells[i];
        std::size_t n = c.pts.size();
        for (std::size_t e = 0; e < n; ++e) {
            int j = c.labels[e];
            if (j < 0 || static_cast<std::size_t>(j) == i) continue;
            Point2 a = c.pts[e];
            Point2 b = c.pts[(e + 1) % n];
            double len = dist(a, b);
            if (len <= min_length) continue;
            int lo = std::min<int>(static_cast<int>(i), j);
            int hi = std::max<int>(static_cast<int>(i), j);
            edges.push_back({lo, hi, a, b, len});
        }
    }
    // each pair normally shows up once per incident cell; keep one record
    std::sort(edges.begin(), edges.end(), [](const CellEdge& x, const CellEdge& y) {
        return x.i < y.i || (x.i == y.i && x.j < y.j);
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const CellEdge& x, const CellEdge& y) {
                                return x.i == y.i && x.j == y.j;
                            }),
                edges.end());
    return edges;
}

}  // namespace sdot
