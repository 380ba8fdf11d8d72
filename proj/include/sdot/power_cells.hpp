#pragma once

#include <span>
#include <vector>

#include "sdot/geometry.hpp"

namespace sdot {

// Convex cell with edge provenance: labels[e] describes the edge from
// pts[e] to pts[(e+1) % n]; values >= 0 name the site whose bisector the
// edge lies on, values < 0 encode an edge of the clip region as -(e+1).
struct LabeledPolygon {
    std::vector<Point2> pts;
    std::vector<int> labels;

    bool empty() const { return pts.empty(); }
    ConvexPolygon polygon() const;
};

LabeledPolygon labeled_region(const ConvexPolygon& region);
LabeledPolygon clip_labeled(const LabeledPolygon& poly, const HalfPlane& hp, int label);

// Cells of the power diagram of (sites, phi) clipped to region:
//   cell i = region ∩ { y : (x_j - x_i)·y <= phi_j - phi_i  for all j != i },
// i.e. the locus where max_k (x_k·y - phi_k) is attained by k = i.
// Exact duplicates collapse onto the copy with the lower phi.
std::vector<LabeledPolygon> power_cells(std::span<const Point2> sites,
                                        std::span<const double> phi,
                                        const ConvexPolygon& region);

// A 0-cell of the diagram complex: coincident cell-polygon corners merged
// into one junction with the union of incident cell indices.
struct Junction {
    Point2 position;
    std::vector<int> cells;
    bool on_region_boundary = false;
};

std::vector<Junction> extract_junctions(const std::vector<LabeledPolygon>& cells,
                                        double tol);

struct CellEdge {
    int i = 0, j = 0;  // i < j
    Point2 a, b;
    double length = 0.0;
};

// Shared bisector segments between cells, recorded once per unordered pair.
std::vector<CellEdge> extract_edges(const std::vector<LabeledPolygon>& cells,
                                    double min_length);

}  // namespace sdot
