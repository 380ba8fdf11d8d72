#pragma once

#include <vector>

#include "sdot/convexity.hpp"
#include "sdot/solver.hpp"

namespace sdot {

// Point cloud on the flat torus [0,1)^2 with target masses f_i and the mesh
// norm of its periodic Voronoi tessellation.
struct TorusCloud {
    std::vector<Point2> points;
    std::vector<double> masses;
    double mesh_norm = 0.0;

    int size() const { return static_cast<int>(points.size()); }
};

// u_i = phi_i - |x_i|^2 / 2, mean zero; the quasi-periodic representative of
// the potential.
struct QuasiPeriodicPotential {
    std::vector<double> u;
};

// Periodic separable reference: per axis T(t) = t + beta sin(2 pi t)/(2 pi),
// density f = prod_k (1 + beta cos(2 pi t_k)), uniform target.
struct TorusProblem {
    double beta = 0.0;

    double density(Point2 p) const;
    double u_exact(Point2 p) const;  // -beta (cos(2 pi u) + cos(2 pi v)) / (4 pi^2)
    Point2 map(Point2 p) const;
};

TorusProblem make_torus_problem(double beta);

// Laguerre diagram of the 3x3 replicated sites, reduced back to the torus.
struct PeriodicDiagram {
    struct Piece {
        int base = 0;        // site index in the cloud
        Point2 site;         // replicated site position
        double phi = 0.0;    // potential of the replicated site
        ConvexPolygon region;  // copy cell intersected with the fundamental domain
        double mass = 0.0;
        Point2 centroid;     // g-weighted
    };
    std::vector<Piece> pieces;
    std::vector<double> masses;  // per base index, sums to one

    struct Edge {
        int i = 0, j = 0;  // base indices, i != j
        Point2 site_i, site_j;  // the replicated positions realizing the edge
        Point2 a, b;            // in-square bisector segment
    };
    std::vector<Edge> edges;

    // weighted-Delaunay dual facets meeting the fundamental domain, already
    // clipped to it; targets are the diagram junctions
    std::vector<ConvexPolygon> facets;
    std::vector<Point2> facet_targets;
};

// Builds the periodic diagram; requires cells not to wrap (mesh norm < 1/3),
// else the replication ring is insufficient.
PeriodicDiagram periodic_diagram(const TorusCloud& cloud,
                                 const QuasiPeriodicPotential& u, const Density& g);

// Mesh norm of the periodic Voronoi tessellation of the points.
double periodic_mesh_norm(const std::vector<Point2>& points);

// k x k grid sites with masses from the density integral over the periodic
// Voronoi cells (squares of side 1/k).
TorusCloud torus_grid_cloud(int k, const Density& f);

std::pair<QuasiPeriodicPotential, SolveReport> periodic_solve(
    const TorusCloud& cloud, const std::vector<double>& f, const Density& g,
    const SolveSettings& settings = {});

// The piecewise-constant torus transport map: dual facets to their junctions.
TransportMapPWC periodic_transport_map(const PeriodicDiagram& diagram);

// (int_M |grad u_h - grad u|^2 dx)^(1/2) over the fundamental domain, with
// differences wrapped to the nearest image.
double torus_h1_error(const TransportMapPWC& map, const TorusProblem& problem);

}  // namespace sdot
