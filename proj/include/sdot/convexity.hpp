#pragma once

#include <string>
#include <vector>

#include "sdot/laguerre.hpp"

namespace sdot {

// One affine piece z = gradient.x + intercept of a max-of-affine function.
struct AffinePiece {
    Point2 gradient;
    double intercept = 0.0;
};

struct PwaFacet {
    ConvexPolygon region;    // F_j*, a cell of the induced subdivision of the domain
    int piece = 0;           // index into pieces
    std::vector<int> sites;  // cloud indices of the facet's corners
};

// Convex piecewise-affine function on a polygonal domain, stored as the
// facet complex of the lower convex hull of lifted sites.
struct PiecewiseAffineConvex {
    std::vector<AffinePiece> pieces;
    ConvexPolygon domain;  // X_h
    std::vector<PwaFacet> facets;

    double value(Point2 p) const;  // max over pieces; equals the PWA on the domain
};

// Discrete Legendre transform psi_h(y) = max_i (x_i.y - phi_i); ties resolve
// to the lowest index without affecting the value.
double legendre_discrete(const SourceCloud& cloud, const PotentialVector& phi, Point2 y);

// Lower convex hull of the lifted sites (x_i, phi_i) in R^3. Coplanar hull
// faces are merged, so facets are polygons, not forced triangles.
PiecewiseAffineConvex extend_pwa(const SourceCloud& cloud, const PotentialVector& phi);

// Piecewise-constant transport map: facet F_j* maps to its gradient y_j.
struct TransportMapPWC {
    std::vector<ConvexPolygon> facets;
    std::vector<Point2> targets;
};

TransportMapPWC transport_map(const SourceCloud& cloud, const PotentialVector& phi,
                              const LaguerreDiagram& diagram);
TransportMapPWC transport_map(const PiecewiseAffineConvex& pwa,
                              const LaguerreDiagram& diagram);

struct BijectionReport {
    // facet index -> interior dual vertex index
    std::vector<std::pair<int, int>> pairs;
    // facets whose gradient leaves Y: their vertex lives on the unclipped
    // complex, verified directly against the sites (boundary bookkeeping)
    std::vector<int> exterior_facets;
    std::vector<int> unmatched_facets;
    std::vector<int> unmatched_vertices;
    int facet_count = 0;
    int interior_vertex_count = 0;
    int boundary_vertex_count = 0;  // diagram vertices on the boundary of Y
    int tie_count = 0;              // degenerate fans (vertex with > 3 incident cells)
    double max_interior_gradient_distance = 0.0;  // max signed distance to Y of paired gradients

    bool ok() const {
        return unmatched_facets.empty() && unmatched_vertices.empty() &&
               static_cast<int>(pairs.size()) == interior_vertex_count;
    }
};

// Pairs every PWA facet with the Laguerre vertex its gradient realizes:
// interior vertices must match one-to-one; a facet whose gradient escapes Y
// (possible for boundary triangles) is audited against the sites instead,
// by checking that its corners attain the discrete Legendre max there.
BijectionReport verify_facet_vertex_bijection(const PiecewiseAffineConvex& pwa,
                                              const LaguerreDiagram& diagram,
                                              const SourceCloud& cloud,
                                              const PotentialVector& phi);

// Monge-Ampere measure of a global max-of-affine function: atoms at the
// 0-cells of the induced complex, each carrying the area of the subgradient
// polygon (the convex hull of the incident gradients).
DiscreteMeasure ma_measure_pwa(const std::vector<AffinePiece>& pieces);

// Pieces of the solved potential's global extension: one support plane per
// vertex of the target subdivision (interior, boundary crossings, corners).
std::vector<AffinePiece> dual_complex_pieces(const SourceCloud& cloud,
                                             const PotentialVector& phi,
                                             const LaguerreDiagram& diagram);

// phi_Y(x) = max over vertices of Y of x.y.
double support_function(const ConvexPolygon& y, Point2 x);

// CSV dumps: "<prefix>_facets.csv" with facet_id,vertex_index,x,y and
// "<prefix>_targets.csv" with facet_id,target_x,target_y.
void write_map_csv(const TransportMapPWC& map, const std::string& prefix);

}  // namespace sdot
