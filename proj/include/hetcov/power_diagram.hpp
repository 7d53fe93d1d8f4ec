#pragma once

#include <hetcov/error.hpp>
#include <hetcov/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hetcov {

/// Power-diagram generator: power distance to q is |q - position|^2 - weight.
struct Generator
{
    int id = 0;
    Point2 position;
    double weight = 0.0;
};

inline double power_distance(const Generator& g, Point2 q)
{
    return squared_norm(q - g.position) - g.weight;
}

/// Straight edge shared by two cells, written as base + direction * t for
/// t in [t_min, t_max]. The direction is the quarter-turn of the unit vector
/// from the querying generator towards its neighbor.
struct SharedEdge
{
    Point2 base;
    Point2 direction;
    double t_min = 0.0;
    double t_max = 0.0;
    Point2 first;
    Point2 second;

    double length() const { return t_max - t_min; }
    Point2 at(double t) const { return base + t * direction; }
};

struct Cell
{
    int owner = 0;
    ConvexPolygon polygon;
    double area = 0.0;
    std::vector<int> neighbors;           // sorted ids
    std::map<int, SharedEdge> edges;      // neighbor id -> shared edge
    std::vector<int> edge_labels;         // label of the polygon edge starting at each vertex

    bool empty() const { return polygon.empty(); }
    bool is_neighbor(int id) const { return edges.count(id) != 0; }
};

struct PartitionResult
{
    ConvexPolygon environment;
    double total_area = 0.0;
    std::vector<Cell> cells;   // same order as the generator list

    std::size_t index_of(int id) const
    {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (cells[k].owner == id) return k;
        }
        throw Error(ErrorCode::invalid_input, "unknown generator id " + std::to_string(id));
    }

    const Cell& cell(int id) const { return cells[index_of(id)]; }

    double area_sum() const
    {
        double s = 0.0;
        for (const auto& c : cells) s += c.area;
        return s;
    }
};

/// Base point of the power bisector of (gi, gj); see SharedEdge.
inline Point2 bisector_base(const Generator& gi, const Generator& gj)
{
    const Point2 delta = gj.position - gi.position;
    const double len2 = squared_norm(delta);
    return 0.5 * (gi.position + gj.position) + ((gi.weight - gj.weight) / (2.0 * len2)) * delta;
}

/// Cell of gi lies on the non-positive side.
inline HalfPlane dominance_halfplane(const Generator& gi, const Generator& gj)
{
    const Point2 delta = gj.position - gi.position;
    return HalfPlane{bisector_base(gi, gj), delta / norm(delta)};
}

namespace detail {

inline void check_generators(std::span<const Generator> generators)
{
    if (generators.empty()) throw Error(ErrorCode::invalid_input, "no generators");
    for (std::size_t a = 0; a < generators.size(); ++a) {
        if (!is_finite(generators[a].position) || !std::isfinite(generators[a].weight)) {
            throw Error(ErrorCode::invalid_input, "non-finite generator " + std::to_string(generators[a].id));
        }
        for (std::size_t b = a + 1; b < generators.size(); ++b) {
            if (generators[a].id == generators[b].id) {
                throw Error(ErrorCode::invalid_input, "duplicate generator id " + std::to_string(generators[a].id));
            }
            if (distance(generators[a].position, generators[b].position) < eps_pos) {
                throw Error(ErrorCode::degenerate_configuration,
                            "generators " + std::to_string(generators[a].id) + " and " +
                                std::to_string(generators[b].id) + " coincide");
            }
        }
    }
}

inline SharedEdge make_shared_edge(const Generator& gi, const Generator& gj, Point2 a, Point2 b)
{
    const Point2 delta = gj.position - gi.position;
    SharedEdge e;
    e.base = bisector_base(gi, gj);
    e.direction = rotate90(delta / norm(delta));
    double ta = dot(a - e.base, e.direction);
    double tb = dot(b - e.base, e.direction);
    if (ta > tb) std::swap(ta, tb);
    e.t_min = ta;
    e.t_max = tb;
    e.first = e.at(ta);
    e.second = e.at(tb);
    return e;
}

/// Cell polygon and edge labels only; neighbor data is filled by the caller.
inline Cell clip_cell(const ConvexPolygon& env, std::span<const Generator> generators, std::size_t index)
{
    const Generator& gi = generators[index];
    auto ring = labeled_ring(env);
    for (std::size_t k = 0; k < generators.size() && !ring.empty(); ++k) {
        if (k == index) continue;
        ring = clip_ring(ring, dominance_halfplane(gi, generators[k]), generators[k].id);
    }
    Cell cell;
    cell.owner = gi.id;
    cell.polygon = ConvexPolygon::unchecked(ring_points(ring));
    cell.area = ring.empty() ? 0.0 : shoelace_area(cell.polygon);
    for (const auto& v : ring) cell.edge_labels.push_back(v.edge_label);
    return cell;
}

inline const Generator& find_generator(std::span<const Generator> generators, int id)
{
    for (const auto& g : generators) {
        if (g.id == id) return g;
    }
    throw Error(ErrorCode::invalid_input, "unknown generator id " + std::to_string(id));
}

/// Length of the polygon edge labeled `label`, or 0 if absent.
inline double labeled_edge_length(const Cell& cell, int label)
{
    const std::size_t n = cell.edge_labels.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (cell.edge_labels[k] == label) return distance(cell.polygon.vertex(k), cell.polygon.vertex(k + 1));
    }
    return 0.0;
}

} // namespace detail

/// Shared-edge parameters of cell_i against neighbor gj.
inline SharedEdge edge_parameters(const Generator& gi, const Generator& gj, const Cell& cell_i)
{
    const std::size_t n = cell_i.edge_labels.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (cell_i.edge_labels[k] != gj.id) continue;
        const Point2 a = cell_i.polygon.vertex(k);
        const Point2 b = cell_i.polygon.vertex(k + 1);
        if (distance(a, b) < eps_geom) break;
        return detail::make_shared_edge(gi, gj, a, b);
    }
    throw Error(ErrorCode::no_shared_edge,
                "generators " + std::to_string(gi.id) + " and " + std::to_string(gj.id) + " are not neighbors");
}

/// Cell of one generator against all others, without consulting their cells.
/// Neighbor sets come from this cell alone and are not symmetrized.
inline Cell compute_cell(const ConvexPolygon& env, std::span<const Generator> generators, std::size_t index)
{
    Cell cell = detail::clip_cell(env, generators, index);
    const std::size_t n = cell.edge_labels.size();
    for (std::size_t k = 0; k < n; ++k) {
        const int label = cell.edge_labels[k];
        if (label == boundary_label) continue;
        if (distance(cell.polygon.vertex(k), cell.polygon.vertex(k + 1)) < eps_geom) continue;
        const Generator& gj = detail::find_generator(generators, label);
        cell.edges[label] = detail::make_shared_edge(generators[index], gj, cell.polygon.vertex(k),
                                                     cell.polygon.vertex(k + 1));
    }
    for (const auto& [id, edge] : cell.edges) cell.neighbors.push_back(id);
    return cell;
}

/// Bounded power diagram of `generators` clipped to `env`, by per-cell
/// half-plane clipping. Neighbor relations are symmetric: a pair is adjacent
/// only when both cells carry the shared edge with length >= eps_geom.
inline PartitionResult compute_power_partition(const ConvexPolygon& env, std::span<const Generator> generators)
{
    if (env.empty()) throw Error(ErrorCode::invalid_input, "empty environment");
    detail::check_generators(generators);

    PartitionResult result;
    result.environment = env;
    result.total_area = shoelace_area(env);
    result.cells.reserve(generators.size());
    for (std::size_t k = 0; k < generators.size(); ++k) {
        result.cells.push_back(detail::clip_cell(env, generators, k));
    }

    const std::size_t n = generators.size();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const int ia = generators[a].id;
            const int ib = generators[b].id;
            const double la = detail::labeled_edge_length(result.cells[a], ib);
            const double lb = detail::labeled_edge_length(result.cells[b], ia);
            if (la < eps_geom || lb < eps_geom) continue;
            result.cells[a].edges[ib] = edge_parameters(generators[a], generators[b], result.cells[a]);
            result.cells[b].edges[ia] = edge_parameters(generators[b], generators[a], result.cells[b]);
        }
    }
    for (auto& cell : result.cells) {
        for (const auto& [id, edge] : cell.edges) cell.neighbors.push_back(id);
    }
    return result;
}

inline PartitionResult compute_voronoi_partition(const ConvexPolygon& env, std::span<const Point2> positions)
{
    std::vector<Generator> generators;
    generators.reserve(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
        generators.push_back({static_cast<int>(k), positions[k], 0.0});
    }
    return compute_power_partition(env, generators);
}

/// True iff q lies in (or within eps_geom of) the cell of generator `id`.
inline bool point_in_cell(Point2 q, const PartitionResult& partition, int id)
{
    if (!partition.environment.contains(q)) {
        throw Error(ErrorCode::outside_environment, "query point outside environment");
    }
    return partition.cell(id).polygon.contains(q);
}

} // namespace hetcov
