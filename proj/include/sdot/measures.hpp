#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdot/geometry.hpp"

namespace sdot {

// Target measure nu = 1_Y g dy, normalized to unit total mass.
struct TargetDomain {
    ConvexPolygon boundary;  // Y, convex
    Density density;         // g, after normalization
    double delta = 0.0;      // lower bound of g on Y
    double total_mass = 0.0; // = 1 after normalization
};

// Rescales g so that the total mass over Y is exactly one; delta is the
// caller-supplied lower bound of the raw g, rescaled accordingly.
TargetDomain make_target(const ConvexPolygon& boundary, Density g, double delta_raw);
TargetDomain uniform_target(const ConvexPolygon& boundary);

// Source measure mu = f dx on X with unit mass.
struct SourceMeasure {
    ConvexPolygon support;  // X
    Density density;        // f
};

SourceMeasure uniform_source(const ConvexPolygon& support);

// Point cloud x_i with dual cells C_i: the carrier of the discretization.
struct SourceCloud {
    std::vector<Point2> points;
    std::vector<ConvexPolygon> cells;
    double mesh_norm = 0.0;          // h = max_i diam(C_i)
    double separation = 0.0;         // min pairwise point distance
    double boundary_distance = 0.0;  // min over sites of dist(x_i, boundary of X); diagnostic

    int size() const { return static_cast<int>(points.size()); }
};

// Atomic measure sum_i f_i delta_{x_i}.
struct DiscreteMeasure {
    std::vector<Point2> points;
    std::vector<double> masses;

    int size() const { return static_cast<int>(points.size()); }
};

// k x k partition of an axis-aligned rectangle, sites at the cell centers.
SourceCloud grid_cloud(const ConvexPolygon& rect, int k);

// N uniform points in X by seeded rejection sampling; cells are the Voronoi
// cells clipped to X.
SourceCloud random_cloud(const ConvexPolygon& domain, int n, std::uint64_t seed);

// Rebuild the Voronoi dual tessellation for externally supplied points.
SourceCloud cloud_from_points(const ConvexPolygon& domain, std::vector<Point2> points);

// f_i = integral of f over C_i, renormalized to sum exactly one.
DiscreteMeasure discretize(const SourceMeasure& mu, const SourceCloud& cloud);

// f_i proportional to f(x_i) * area(C_i).
DiscreteMeasure discretize_weighted(const SourceMeasure& mu, const SourceCloud& cloud);

// Computable form of the W1 estimate: sum_i int_{C_i} |x - x_i| dmu <= h.
double w1_upper_bound(const SourceMeasure& mu, const SourceCloud& cloud);

// CSV with header "x,y" or "x,y,mass", one point per row.
void write_cloud_csv(const std::string& path, const std::vector<Point2>& points,
                     const std::vector<double>* masses = nullptr);
struct CloudFile {
    std::vector<Point2> points;
    std::vector<double> masses;  // empty when the file had no mass column
};
CloudFile read_cloud_csv(const std::string& path);

}  // namespace sdot
