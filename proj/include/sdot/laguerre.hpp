#pragma once

#include <string>
#include <vector>

#include "sdot/measures.hpp"
#include "sdot/power_cells.hpp"

namespace sdot {

// Site potentials phi_i anchored to a cloud's point list. The solver keeps
// the values mean-zero; the diagram itself only sees differences phi_j - phi_i.
struct PotentialVector {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
};

PotentialVector voronoi_potential(const SourceCloud& cloud);
void mean_zero(std::vector<double>& values);

struct DiagramVertex {
    Point2 position;
    std::vector<int> cells;  // incident cell indices, ascending
};

struct DiagramEdge {
    int i = 0, j = 0;  // i < j, adjacent cells
    Point2 a, b;       // shared segment on the bisector (x_j - x_i).y = phi_j - phi_i
    double length = 0.0;
};

struct LaguerreDiagram {
    std::vector<LabeledPolygon> raw_cells;  // with edge provenance
    std::vector<ConvexPolygon> cells;       // F_i intersected with Y
    std::vector<double> masses;             // nu-mass per cell
    std::vector<Point2> centroids;          // g-weighted centroid per nonempty cell
    std::vector<DiagramEdge> adjacency;
    std::vector<DiagramVertex> dual_vertices;      // interior to Y, >= 3 incident cells
    std::vector<DiagramVertex> boundary_vertices;  // on the boundary of Y
    ConvexPolygon boundary;                        // Y

    int size() const { return static_cast<int>(cells.size()); }
    double total_mass() const;
    double min_mass() const;
};

LaguerreDiagram build_diagram(const SourceCloud& cloud, const PotentialVector& phi,
                              const TargetDomain& target);

// Sparse symmetric mass Jacobian H_ij = d m_i / d phi_j:
//   H_ij = (int_{edge(i,j)} g ds) / |x_i - x_j| for adjacent i != j,
//   H_ii = -sum_{j != i} H_ij.
struct MassJacobian {
    int n = 0;
    std::vector<int> edge_i, edge_j;     // off-diagonal entries, i < j
    std::vector<double> edge_value;
    std::vector<double> diagonal;

    double row_sum(int i) const;
};

MassJacobian mass_jacobian(const LaguerreDiagram& diagram, const SourceCloud& cloud,
                           const TargetDomain& target);

std::vector<DiagramVertex> dual_vertices(const LaguerreDiagram& diagram);

// CSV dumps: "<prefix>_cells.csv" with cell_id,vertex_index,x,y and
// "<prefix>_masses.csv" with cell_id,mass. `periodic` prepends a period=1
// header flag line to both files.
void write_diagram_csv(const LaguerreDiagram& diagram, const std::string& prefix,
                       bool periodic = false);
void write_cells_csv(const std::string& path, const std::vector<ConvexPolygon>& cells,
                     bool periodic = false);
void write_cell_masses_csv(const std::string& path, const std::vector<double>& masses,
                           bool periodic = false);

}  // namespace sdot
