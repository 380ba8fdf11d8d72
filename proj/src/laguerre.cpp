#include "sdot/laguerre.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace sdot {

PotentialVector voronoi_potential(const SourceCloud& cloud) {
    PotentialVector phi;
    phi.values.resize(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        phi.values[i] = 0.5 * norm2(cloud.points[i]);
    mean_zero(phi.values);
    return phi;
}

void mean_zero(std::vector<double>& values) {
    if (values.empty()) return;
    double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                  static_cast<double>(values.size());
    for (double& v : values) v -= mean;
}

double LaguerreDiagram::total_mass() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

double LaguerreDiagram::min_mass() const {
    return masses.empty() ? 0.0 : *std::min_element(masses.begin(), masses.end());
}

LaguerreDiagram build_diagram(const SourceCloud& cloud, const PotentialVector& phi,
                              const TargetDomain& target) {
    std::size_t n = cloud.points.size();
    if (phi.values.size() != n) throw std::invalid_argument("phi size mismatch");
    double site_scale = length_scale(std::span<const Point2>(cloud.points));
    if (!(cloud.separation > 1e-13 * site_scale))
        throw std::invalid_argument("coincident sites");

    LaguerreDiagram d;
    d.boundary = target.boundary;
    d.raw_cells = power_cells(cloud.points, phi.values, target.boundary);
    d.cells.reserve(n);
    d.masses.resize(n);
    d.centroids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.cells.push_back(d.raw_cells[i].polygon());
        MassCentroid mc = mass_and_centroid(d.cells[i], target.density);
        d.masses[i] = mc.mass;
        d.centroids[i] = mc.centroid.value_or(Point2{0.0, 0.0});
    }

    double scale = length_scale(target.boundary);
    std::vector<CellEdge> edges = extract_edges(d.raw_cells, kEpsGeomRel * scale);
    d.adjacency.reserve(edges.size());
    for (const CellEdge& e : edges) d.adjacency.push_back({e.i, e.j, e.a, e.b, e.length});

    for (Junction& jn : extract_junctions(d.raw_cells, 1e-9 * scale)) {
        DiagramVertex v{jn.position, std::move(jn.cells)};
        if (jn.on_region_boundary)
            d.boundary_vertices.push_back(std::move(v));
        else if (v.cells.size() >= 3)
            d.dual_vertices.push_back(std::move(v));
    }
    return d;
}

double MassJacobian::row_sum(int i) const {
    double s = diagonal[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < edge_i.size(); ++k) {
        if (edge_i[k] == i || edge_j[k] == i) s += edge_value[k];
    }
    return s;
}

MassJacobian mass_jacobian(const LaguerreDiagram& diagram, const SourceCloud& cloud,
                           const TargetDomain& target) {
    MassJacobian h;
    h.n = diagram.size();
    h.diagonal.assign(static_cast<std::size_t>(h.n), 0.0);
    h.edge_i.reserve(diagram.adjacency.size());
    h.edge_j.reserve(diagram.adjacency.size());
    h.edge_value.reserve(diagram.adjacency.size());
    for (const DiagramEdge& e : diagram.adjacency) {
        double ds = integrate_segment(e.a, e.b, target.density);
        double gap = dist(cloud.points[static_cast<std::size_t>(e.i)],
                          cloud.points[static_cast<std::size_t>(e.j)]);
        double value = ds / gap;
        h.edge_i.push_back(e.i);
        h.edge_j.push_back(e.j);
        h.edge_value.push_back(value);
        h.diagonal[static_cast<std::size_t>(e.i)] -= value;
        h.diagonal[static_cast<std::size_t>(e.j)] -= value;
    }
    return h;
}

std::vector<DiagramVertex> dual_vertices(const LaguerreDiagram& diagram) {
    return diagram.dual_vertices;
}

void write_cells_csv(const std::string& path, const std::vector<ConvexPolygon>& cells,
                     bool periodic) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    if (periodic) out << "period=1\n";
    out << "cell_id,vertex_index,x,y\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t k = 0; k < cells[i].size(); ++k) {
            out << i << ',' << k << ',' << cells[i].vertices[k].u << ','
                << cells[i].vertices[k].v << '\n';
        }
    }
}

void write_cell_masses_csv(const std::string& path, const std::vector<double>& masses,
                           bool periodic) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    if (periodic) out << "period=1\n";
    out << "cell_id,mass\n";
    for (std::size_t i = 0; i < masses.size(); ++i) out << i << ',' << masses[i] << '\n';
}

void write_diagram_csv(const LaguerreDiagram& diagram, const std::string& prefix,
                       bool periodic) {
    write_cells_csv(prefix + "_cells.csv", diagram.cells, periodic);
    write_cell_masses_csv(prefix + "_masses.csv", diagram.masses, periodic);
}

}  // namespace sdot
