#pragma once

#include <hetcov/error.hpp>
#include <hetcov/geometry.hpp>
#include <hetcov/power_diagram.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hetcov {

/// Raw capabilities and their l1-normalized shares.
struct CapabilityProfile
{
    std::vector<double> raw;
    std::vector<double> normalized;

    static CapabilityProfile from_raw(std::vector<double> raw)
    {
        double total = 0.0;
        for (double c : raw) {
            if (!std::isfinite(c) || c < 0.0) throw Error(ErrorCode::invalid_input, "capability must be finite and >= 0");
            total += c;
        }
        if (!(total > 0.0)) throw Error(ErrorCode::invalid_input, "at least one capability must be positive");
        CapabilityProfile p;
        p.normalized.reserve(raw.size());
        for (double c : raw) p.normalized.push_back(c / total);
        p.raw = std::move(raw);
        return p;
    }

    std::size_t size() const { return raw.size(); }
};

/// Per-robot step scales for the position and weight blocks.
struct StepParameters
{
    double gamma_p = 0.0;
    double gamma_w = 0.0;
};

/// What a robot knows about itself or a neighbor: exactly the exchanged quantities.
struct AgentSummary
{
    int id = 0;
    double area = 0.0;
    double capability = 0.0;   // normalized share c
    Point2 position;
    double weight = 0.0;
};

struct NeighborView
{
    AgentSummary data;
    SharedEdge edge;   // oriented from the viewing robot
};

/// Everything a gradient evaluation may read: own data, neighbors, total area.
struct LocalView
{
    AgentSummary self;
    std::vector<NeighborView> neighbors;
    double total_area = 0.0;
};

struct GradientReport
{
    double objective = 0.0;
    std::vector<Point2> position;   // dH/dp_i, in generator order
    std::vector<double> weight;     // dH/dw_i, in generator order
};

/// Scaled area error A_i / c_i - A.
inline double scaled_error(double area, double capability, double total_area)
{
    return area / capability - total_area;
}

inline double objective_H(const PartitionResult& partition, const CapabilityProfile& caps)
{
    if (caps.size() != partition.cells.size()) {
        throw Error(ErrorCode::invalid_input, "capability profile does not match partition");
    }
    double h = 0.0;
    for (std::size_t k = 0; k < partition.cells.size(); ++k) {
        const double c = caps.normalized[k];
        const double a = partition.cells[k].area;
        if (c <= 0.0) {
            if (a > 0.0) {
                throw Error(ErrorCode::excluded_robot,
                            "robot " + std::to_string(partition.cells[k].owner) + " has zero capability but owns area");
            }
            continue;
        }
        const double e = scaled_error(a, c, partition.total_area);
        h += e * e;
    }
    return h;
}

/// Same objective from a per-robot area-error vector e_i = A_i - c_i A.
inline double objective_from_area_errors(std::span<const double> errors, std::span<const double> capabilities)
{
    if (errors.size() != capabilities.size()) throw Error(ErrorCode::invalid_input, "size mismatch");
    double h = 0.0;
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (capabilities[k] <= 0.0) throw Error(ErrorCode::excluded_robot, "zero capability");
        const double s = errors[k] / capabilities[k];
        h += s * s;
    }
    return h;
}

/// Integral over the shared edge of n_i^T dq/dp_i, i.e. the contribution of
/// this edge to dA_i/dp_i.
inline Point2 edge_integral_D(const AgentSummary& self, const AgentSummary& neighbor, const SharedEdge& edge)
{
    const double len = edge.length();
    if (!(len > 0.0)) return {};
    const Point2 delta = neighbor.position - self.position;
    const double r = norm(delta);
    const double linear = (1.0 / (2.0 * r) + (self.weight - neighbor.weight) / (2.0 * r * r * r)) * len;
    const double quadratic = (edge.t_max * edge.t_max - edge.t_min * edge.t_min) / (2.0 * r * r);
    return linear * delta + quadratic * rotate90(delta);
}

/// Contribution of the shared edge to dA_i/dw_i.
inline double edge_integral_E(const AgentSummary& self, const AgentSummary& neighbor, const SharedEdge& edge)
{
    const double len = edge.length();
    if (!(len > 0.0)) return 0.0;
    return len / (2.0 * distance(self.position, neighbor.position));
}

inline Point2 grad_position(const LocalView& view)
{
    if (view.neighbors.empty() || view.self.capability <= 0.0) return {};
    const double ci = view.self.capability;
    const double own = 2.0 * scaled_error(view.self.area, ci, view.total_area) / ci;
    Point2 g{};
    for (const auto& nb : view.neighbors) {
        const Point2 d = edge_integral_D(view.self, nb.data, nb.edge);
        const double cj = nb.data.capability;
        const double theirs = cj > 0.0 ? 2.0 * scaled_error(nb.data.area, cj, view.total_area) / cj : 0.0;
        g += (own - theirs) * d;
    }
    return g;
}

inline double grad_weight(const LocalView& view)
{
    if (view.neighbors.empty() || view.self.capability <= 0.0) return 0.0;
    const double ci = view.self.capability;
    const double own = 2.0 * scaled_error(view.self.area, ci, view.total_area) / ci;
    double g = 0.0;
    for (const auto& nb : view.neighbors) {
        const double e = edge_integral_E(view.self, nb.data, nb.edge);
        const double cj = nb.data.capability;
        const double theirs = cj > 0.0 ? 2.0 * scaled_error(nb.data.area, cj, view.total_area) / cj : 0.0;
        g += (own - theirs) * e;
    }
    return g;
}

/// Builds robot `index`'s view from a full snapshot; the gradient code never
/// sees more than this.
inline LocalView make_local_view(const PartitionResult& partition, const CapabilityProfile& caps,
                                 std::span<const Generator> generators, std::size_t index)
{
    auto summary = [&](std::size_t k) {
        return AgentSummary{generators[k].id, partition.cells[k].area, caps.normalized[k], generators[k].position,
                            generators[k].weight};
    };
    LocalView view;
    view.self = summary(index);
    view.total_area = partition.total_area;
    for (const auto& [id, edge] : partition.cells[index].edges) {
        view.neighbors.push_back({summary(partition.index_of(id)), edge});
    }
    return view;
}

inline Point2 grad_position(std::size_t index, const PartitionResult& partition, const CapabilityProfile& caps,
                            std::span<const Generator> generators)
{
    return grad_position(make_local_view(partition, caps, generators, index));
}

inline double grad_weight(std::size_t index, const PartitionResult& partition, const CapabilityProfile& caps,
                          std::span<const Generator> generators)
{
    return grad_weight(make_local_view(partition, caps, generators, index));
}

inline GradientReport gradient_report(const PartitionResult& partition, const CapabilityProfile& caps,
                                      std::span<const Generator> generators)
{
    GradientReport report;
    report.objective = objective_H(partition, caps);
    for (std::size_t k = 0; k < generators.size(); ++k) {
        const LocalView view = make_local_view(partition, caps, generators, k);
        report.position.push_back(grad_position(view));
        report.weight.push_back(grad_weight(view));
    }
    return report;
}

/// Position step -gamma_p * grad, projected onto the cell boundary when the
/// generator sits on it and the step points outward, then shortened so the
/// generator stays inside its current cell.
inline Point2 position_update(Point2 position, Point2 gradient, const Cell& cell, const StepParameters& params)
{
    if (!cell.polygon.contains(position)) {
        throw Error(ErrorCode::constraint_violation,
                    "generator " + std::to_string(cell.owner) + " lies outside its cell");
    }
    Point2 u = -params.gamma_p * gradient;
    if (u == Point2{}) return u;

    const auto& poly = cell.polygon;
    const std::size_t n = poly.size();
    struct Blocking { Point2 tangent; Point2 outward; };
    std::vector<Blocking> blocking;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = poly.vertex(k);
        const Point2 b = poly.vertex(k + 1);
        const double len = distance(a, b);
        if (len == 0.0) continue;
        if (distance_to_segment(position, a, b) > eps_geom) continue;
        const Point2 t = (b - a) / len;
        const Point2 out{t.y, -t.x};
        if (dot(u, out) > 1e-12 * norm(u)) blocking.push_back({t, out});
    }
    if (!blocking.empty()) {
        // At a vertex two edges can block; slide along the tangent closest in angle to u.
        const Blocking* best = &blocking.front();
        double best_cos = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocking) {
            const double c = std::abs(dot(u, b.tangent));
            if (c > best_cos) {
                best_cos = c;
                best = &b;
            }
        }
        u = dot(u, best->tangent) * best->tangent;
        for (const auto& b : blocking) {
            if (dot(u, b.outward) > eps_geom * norm(u)) return {};
        }
    }
    return poly.ray_fraction_inside(position, u) * u;
}

inline double weight_update(double gradient, const StepParameters& params)
{
    return -params.gamma_w * gradient;
}

/// Generator i stays in its cell against j iff w_j - w_i <= |p_i - p_j|^2.
/// Each robot of a pair may consume at most half of the remaining slack, so
/// simultaneous updates of both sides keep the pair feasible.
inline double clamp_weight_step(const LocalView& view, double step)
{
    for (const auto& nb : view.neighbors) {
        const double d2 = squared_norm(view.self.position - nb.data.position);
        const double diff = view.self.weight - nb.data.weight;
        const double room_down = std::max(0.0, 0.5 * (d2 + diff));
        const double room_up = std::max(0.0, 0.5 * (d2 - diff));
        step = std::clamp(step, -room_down, room_up);
    }
    return step;
}

/// Same half-slack rule for positions: the pair stays feasible while
/// |p_i - p_j| >= sqrt(|w_i - w_j|), and each side may close at most half the gap.
inline Point2 clamp_position_step(const LocalView& view, Point2 step)
{
    double scale = 1.0;
    for (const auto& nb : view.neighbors) {
        const Point2 away = view.self.position - nb.data.position;
        const double dist = norm(away);
        const double gap = std::max(0.0, dist - std::sqrt(std::abs(view.self.weight - nb.data.weight)));
        const double approach = -dot(away, step) / dist;
        if (approach > 0.5 * gap) scale = std::min(scale, 0.5 * gap / approach);
    }
    return scale * step;
}

} // namespace hetcov
