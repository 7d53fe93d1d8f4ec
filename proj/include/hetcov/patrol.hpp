#pragma once

#include <hetcov/error.hpp>
#include <hetcov/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace hetcov {

/// Cyclic coverage path inside one convex cell.
struct PatrolPath
{
    std::vector<Point2> waypoints;
    double sweep_width = 0.0;
    std::size_t cursor = 0;
    std::size_t sweep_lines = 0;

    bool empty() const { return waypoints.empty(); }
};

/// Boustrophedon sweep: passes run parallel to the cell edge across which the
/// cell is narrowest, spaced evenly at most `sweep_width` apart with the
/// outermost passes at most sweep_width/2 from the cell boundary, followed by
/// one loop around the boundary starting at the vertex nearest the last pass.
inline PatrolPath plan_boustrophedon(const ConvexPolygon& cell, double sweep_width)
{
    if (!(sweep_width > 0.0)) throw Error(ErrorCode::invalid_input, "sweep width must be positive");
    PatrolPath path;
    path.sweep_width = sweep_width;
    if (cell.empty()) return path;

    const auto& v = cell.vertices();
    Point2 axis{1.0, 0.0};
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Point2 e = cell.vertex(k + 1) - v[k];
        const double len = norm(e);
        if (len < eps_geom) continue;
        const Point2 across = rotate90(e / len);
        double a = dot(v[0], across);
        double b = a;
        for (const auto& p : v) {
            a = std::min(a, dot(p, across));
            b = std::max(b, dot(p, across));
        }
        if (b - a < hi - lo) {
            lo = a;
            hi = b;
            axis = e / len;
        }
    }
    const Point2 across = rotate90(axis);
    const double extent = hi - lo;
    const auto lines = static_cast<std::size_t>(std::max(1.0, std::ceil(extent / sweep_width - 1e-12)));
    const double spacing = extent / static_cast<double>(lines);

    for (std::size_t k = 0; k < lines; ++k) {
        const double offset = lo + (static_cast<double>(k) + 0.5) * spacing;
        const Point2 origin = offset * across;
        const auto span = chord(cell, origin, axis);
        if (!span) continue;
        Point2 a = origin + span->first * axis;
        Point2 b = origin + span->second * axis;
        if (path.sweep_lines % 2 == 1) std::swap(a, b);
        path.waypoints.push_back(a);
        if (distance(a, b) > eps_geom) path.waypoints.push_back(b);
        ++path.sweep_lines;
    }
    if (path.waypoints.empty()) return path;

    const Point2 end = path.waypoints.back();
    std::size_t first = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (distance(v[k], end) < distance(v[first], end)) first = k;
    }
    for (std::size_t k = 0; k <= v.size(); ++k) path.waypoints.push_back(cell.vertex(first + k));
    return path;
}

/// Distance from q to the closed (cyclic) polyline of the path.
inline double distance_to_path(const PatrolPath& path, Point2 q)
{
    const auto& w = path.waypoints;
    if (w.empty()) return std::numeric_limits<double>::infinity();
    if (w.size() == 1) return distance(q, w[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.size(); ++k) {
        best = std::min(best, distance_to_segment(q, w[k], w[(k + 1) % w.size()]));
    }
    return best;
}

inline constexpr double default_reach_tolerance = 1e-6;

/// Current waypoint, advancing (cyclically) first if the pose has reached it.
inline Point2 next_target(PatrolPath& path, Point2 pose, double reach = default_reach_tolerance)
{
    if (path.empty()) throw Error(ErrorCode::invalid_input, "empty patrol path");
    if (distance(pose, path.waypoints[path.cursor]) <= reach) {
        path.cursor = (path.cursor + 1) % path.waypoints.size();
    }
    return path.waypoints[path.cursor];
}

/// Area of the symmetric difference of two convex polygons.
inline double symmetric_difference_area(const ConvexPolygon& a, const ConvexPolygon& b)
{
    const double aa = a.empty() ? 0.0 : shoelace_area(a);
    const double bb = b.empty() ? 0.0 : shoelace_area(b);
    const ConvexPolygon both = intersect(a, b);
    const double ab = both.empty() ? 0.0 : shoelace_area(both);
    return std::max(0.0, aa + bb - 2.0 * ab);
}

/// Per-robot patrol state: keeps a path for the current cell and replans when
/// the cell drifts by more than `replan_fraction` of its area.
class Patroller
{
public:
    explicit Patroller(double sweep_width = 5.0, double replan_fraction = 0.01,
                       double reach = default_reach_tolerance)
        : sweep_width_(sweep_width), replan_fraction_(replan_fraction), reach_(reach)
    {}

    /// Returns true when a new path was planned.
    bool update_cell(const ConvexPolygon& cell)
    {
        current_ = cell;
        if (cell.empty()) {
            path_ = PatrolPath{};
            path_.sweep_width = sweep_width_;
            planned_for_ = ConvexPolygon{};
            return false;
        }
        bool replan = planned_for_.empty() || path_.empty();
        if (!replan) {
            const double area = shoelace_area(cell);
            replan = symmetric_difference_area(planned_for_, cell) > replan_fraction_ * area;
        }
        if (replan) {
            const bool had_path = !path_.empty();
            const Point2 last = had_path ? path_.waypoints[path_.cursor] : Point2{};
            path_ = plan_boustrophedon(cell, sweep_width_);
            planned_for_ = cell;
            hold_ = centroid(cell);
            if (had_path) path_.cursor = nearest_waypoint(last);
        }
        return replan;
    }

    /// Next patrol target, kept inside the current cell. Holds at the centroid
    /// of the last nonempty cell when there is no path.
    Point2 next_target(Point2 pose)
    {
        if (path_.empty()) return hold_.value_or(pose);
        const Point2 target = hetcov::next_target(path_, pose, reach_);
        return current_.empty() ? target : closest_point(current_, target);
    }
    const PatrolPath& path() const { return path_; }
    const ConvexPolygon& planned_for() const { return planned_for_; }

private:
    double sweep_width_;
    double replan_fraction_;
    double reach_;
    PatrolPath path_;
    ConvexPolygon planned_for_;
    ConvexPolygon current_;
    std::optional<Point2> hold_;

    std::size_t nearest_waypoint(Point2 q) const
    {
        std::size_t best = 0;
        for (std::size_t k = 1; k < path_.waypoints.size(); ++k) {
            if (distance(q, path_.waypoints[k]) < distance(q, path_.waypoints[best])) best = k;
        }
        return best;
    }
};

} // namespace hetcov
