#pragma once

#include <hetcov/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace hetcov {

/// Vertex/edge coincidence tolerance, in length units.
inline constexpr double eps_geom = 1e-9;
/// Two generators closer than this are treated as coincident.
inline constexpr double eps_pos = 1e-6;

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;

    Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
    Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
constexpr double squared_norm(Point2 a) { return dot(a, a); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
/// Counter-clockwise rotation by a quarter turn.
constexpr Point2 rotate90(Point2 a) { return {-a.y, a.x}; }
inline bool is_finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline double distance_to_segment(Point2 q, Point2 a, Point2 b)
{
    const Point2 ab = b - a;
    const double len2 = squared_norm(ab);
    if (len2 == 0.0) return distance(q, a);
    const double t = std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
    return distance(q, a + t * ab);
}

/// Signed shoelace area; positive for counter-clockwise rings.
inline double signed_area(std::span<const Point2> ring)
{
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    // Anchor at the first vertex to limit cancellation at large coordinates.
    const Point2 o = ring[0];
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        sum += cross(ring[k] - o, ring[k + 1] - o);
    }
    return 0.5 * sum;
}

/// Counter-clockwise convex polygon. A default-constructed polygon is empty.
class ConvexPolygon
{
public:
    ConvexPolygon() = default;

    /// Validates and normalizes orientation (clockwise input is reversed).
    static ConvexPolygon make(std::vector<Point2> vertices)
    {
        for (const auto& v : vertices) {
            if (!is_finite(v)) throw Error(ErrorCode::invalid_input, "non-finite polygon vertex");
        }
        if (vertices.size() < 3) throw Error(ErrorCode::invalid_input, "polygon needs at least 3 vertices");
        const std::size_t n = vertices.size();
        for (std::size_t k = 0; k < n; ++k) {
            if (distance(vertices[k], vertices[(k + 1) % n]) < eps_geom) {
                throw Error(ErrorCode::invalid_input, "repeated polygon vertex");
            }
        }
        double area = signed_area(vertices);
        if (area < 0.0) {
            std::reverse(vertices.begin(), vertices.end());
            area = -area;
        }
        if (!(area > 0.0)) throw Error(ErrorCode::invalid_input, "polygon has zero area");
        for (std::size_t k = 0; k < n; ++k) {
            const Point2 a = vertices[k];
            const Point2 b = vertices[(k + 1) % n];
            const Point2 c = vertices[(k + 2) % n];
            const double turn = cross(b - a, c - b);
            if (turn < -eps_geom * norm(b - a) * norm(c - b) - eps_geom) {
                throw Error(ErrorCode::invalid_input, "polygon is not convex");
            }
        }
        return ConvexPolygon(std::move(vertices));
    }

    /// No validation; for rings produced by clipping, which are convex by construction.
    static ConvexPolygon unchecked(std::vector<Point2> vertices) { return ConvexPolygon(std::move(vertices)); }

    const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    bool empty() const noexcept { return vertices_.size() < 3; }
    Point2 vertex(std::size_t k) const { return vertices_[k % vertices_.size()]; }

    /// Inside or within `tol` of the boundary.
    bool contains(Point2 q, double tol = eps_geom) const
    {
        if (empty()) return false;
        const std::size_t n = vertices_.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Point2 a = vertices_[k];
            const Point2 b = vertices_[(k + 1) % n];
            const double len = distance(a, b);
            if (len == 0.0) continue;
            if (cross(b - a, q - a) / len < -tol) return false;
        }
        return true;
    }

    /// Distance from q to the nearest edge (meaningful for interior and exterior points).
    double boundary_distance(Point2 q) const
    {
        double best = std::numeric_limits<double>::infinity();
        const std::size_t n = vertices_.size();
        for (std::size_t k = 0; k < n; ++k) {
            best = std::min(best, distance_to_segment(q, vertices_[k], vertices_[(k + 1) % n]));
        }
        return best;
    }

    /// Largest s in [0, 1] such that from + s*step stays inside, allowing the
    /// endpoint to sit at most `slack` outside an edge.
    double ray_fraction_inside(Point2 from, Point2 step, double slack = 0.5 * eps_geom) const
    {
        double s = 1.0;
        const double step_len = norm(step);
        const std::size_t n = vertices_.size();
        for (std::size_t k = 0; k < n; ++k) {
            const Point2 a = vertices_[k];
            const Point2 b = vertices_[(k + 1) % n];
            const Point2 e = b - a;
            const double len = norm(e);
            if (len == 0.0) continue;
            // signed inward distance: cross(e, q - a) / len >= 0 inside
            const double d0 = cross(e, from - a) / len;
            const double rate = cross(e, step) / len;
            if (rate < -1e-12 * step_len) {
                s = std::min(s, (d0 + slack) / -rate);
            }
        }
        return std::max(0.0, s);
    }

private:
    explicit ConvexPolygon(std::vector<Point2> v) : vertices_(std::move(v)) {}

    std::vector<Point2> vertices_;
};

inline double shoelace_area(std::span<const Point2> ring)
{
    for (const auto& v : ring) {
        if (!is_finite(v)) throw Error(ErrorCode::invalid_input, "non-finite polygon vertex");
    }
    return std::abs(signed_area(ring));
}

inline double shoelace_area(const ConvexPolygon& polygon)
{
    return shoelace_area(std::span<const Point2>(polygon.vertices()));
}

inline Point2 centroid(const ConvexPolygon& polygon)
{
    const auto& v = polygon.vertices();
    if (v.empty()) return {};
    const Point2 o = v[0];
    double area2 = 0.0;
    Point2 acc{};
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        const double a = cross(v[k] - o, v[k + 1] - o);
        area2 += a;
        acc += a * (v[k] + v[k + 1] - 2.0 * o) / 3.0;
    }
    if (area2 == 0.0) {
        Point2 mean{};
        for (const auto& p : v) mean += p;
        return mean / static_cast<double>(v.size());
    }
    return o + acc / area2;
}

/// q itself when inside the polygon, otherwise the nearest boundary point.
inline Point2 closest_point(const ConvexPolygon& polygon, Point2 q)
{
    if (polygon.empty() || polygon.contains(q, 0.0)) return q;
    Point2 best = polygon.vertex(0);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < polygon.size(); ++k) {
        const Point2 a = polygon.vertex(k);
        const Point2 ab = polygon.vertex(k + 1) - a;
        const double len2 = squared_norm(ab);
        const double t = len2 > 0.0 ? std::clamp(dot(q - a, ab) / len2, 0.0, 1.0) : 0.0;
        const Point2 c = a + t * ab;
        const double d = distance(q, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

/// Closed half-plane { q : dot(q - base, normal) <= 0 } with a unit normal.
struct HalfPlane
{
    Point2 base;
    Point2 normal;

    double signed_distance(Point2 q) const { return dot(q - base, normal); }
};

/// Ring vertex tagged with the label of the edge that starts at it.
struct LabeledVertex
{
    Point2 point;
    int edge_label;
};

inline constexpr int boundary_label = -1;

inline std::vector<Point2> ring_points(const std::vector<LabeledVertex>& ring)
{
    std::vector<Point2> pts;
    pts.reserve(ring.size());
    for (const auto& v : ring) pts.push_back(v.point);
    return pts;
}

/// Sutherland-Hodgman clip of a convex labeled ring; edges created along the
/// clip line carry `clip_label`.
inline std::vector<LabeledVertex> clip_ring(const std::vector<LabeledVertex>& ring, const HalfPlane& h,
                                            int clip_label, double tol = eps_geom)
{
    const std::size_t n = ring.size();
    if (n < 3) return {};
    std::vector<double> s(n);
    bool any_out = false;
    bool any_in = false;
    for (std::size_t k = 0; k < n; ++k) {
        double d = h.signed_distance(ring[k].point);
        if (std::abs(d) <= tol) d = 0.0;
        s[k] = d;
        any_out = any_out || d > 0.0;
        any_in = any_in || d < 0.0;
    }
    if (!any_out) return ring;
    if (!any_in) return {};

    std::vector<LabeledVertex> out;
    out.reserve(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t m = (k + 1) % n;
        const auto& cur = ring[k];
        const auto& nxt = ring[m];
        const double sc = s[k];
        const double sn = s[m];
        if (sc <= 0.0) {
            if (sn > 0.0) {
                if (sc < 0.0) {
                    const double t = sc / (sc - sn);
                    out.push_back(cur);
                    out.push_back({cur.point + t * (nxt.point - cur.point), clip_label});
                } else {
                    out.push_back({cur.point, clip_label});
                }
            } else {
                out.push_back(cur);
            }
        } else if (sn < 0.0) {
            const double t = sc / (sc - sn);
            out.push_back({cur.point + t * (nxt.point - cur.point), cur.edge_label});
        }
    }

    // Drop zero-length edges: the later vertex survives and keeps its outgoing label.
    std::vector<LabeledVertex> cleaned;
    cleaned.reserve(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& v = out[k];
        const auto& nxt = out[(k + 1) % out.size()];
        if (out.size() > 1 && distance(v.point, nxt.point) < tol) continue;
        cleaned.push_back(v);
    }
    if (cleaned.size() < 3) return {};
    if (signed_area(ring_points(cleaned)) <= 0.0) return {};
    return cleaned;
}

inline std::vector<LabeledVertex> labeled_ring(const ConvexPolygon& polygon, int label = boundary_label)
{
    std::vector<LabeledVertex> ring;
    ring.reserve(polygon.size());
    for (const auto& v : polygon.vertices()) ring.push_back({v, label});
    return ring;
}

/// Intersection of two convex polygons (possibly empty).
inline ConvexPolygon intersect(const ConvexPolygon& a, const ConvexPolygon& b)
{
    if (a.empty() || b.empty()) return {};
    auto ring = labeled_ring(a);
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n && !ring.empty(); ++k) {
        const Point2 p = b.vertex(k);
        const Point2 q = b.vertex(k + 1);
        const Point2 e = q - p;
        const double len = norm(e);
        if (len == 0.0) continue;
        // outward normal of a CCW edge is the clockwise rotation of its direction
        ring = clip_ring(ring, HalfPlane{p, Point2{e.y, -e.x} / len}, boundary_label);
    }
    return ConvexPolygon::unchecked(ring_points(ring));
}

/// Parameter interval of the line origin + t*dir inside the polygon, if any.
inline std::optional<std::pair<double, double>> chord(const ConvexPolygon& polygon, Point2 origin, Point2 dir)
{
    if (polygon.empty()) return std::nullopt;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const std::size_t n = polygon.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = polygon.vertex(k);
        const Point2 e = polygon.vertex(k + 1) - a;
        // inside: cross(e, q - a) >= 0
        const double c0 = cross(e, origin - a);
        const double rate = cross(e, dir);
        if (rate == 0.0) {
            if (c0 < 0.0) return std::nullopt;
            continue;
        }
        const double t = -c0 / rate;
        if (rate > 0.0) lo = std::max(lo, t);
        else hi = std::min(hi, t);
    }
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

} // namespace hetcov
