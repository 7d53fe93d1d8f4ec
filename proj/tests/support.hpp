#pragma once

#include <hetcov/geometry.hpp>
#include <hetcov/objective.hpp>
#include <hetcov/power_diagram.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <type_traits>
#include <vector>

namespace hetcov::testing {

inline ConvexPolygon unit_square()
{
    return ConvexPolygon::make({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

inline ConvexPolygon rectangle(double w = 200.0, double h = 100.0)
{
    return ConvexPolygon::make({{0, 0}, {w, 0}, {w, h}, {0, h}});
}

/// Convex polygon with k vertices on a jittered ellipse.
inline ConvexPolygon random_convex(std::mt19937_64& rng, int k, Point2 center = {0, 0}, double radius = 10.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> angles;
    for (int i = 0; i < k; ++i) angles.push_back(2.0 * std::numbers::pi * (i + 0.8 * u(rng)) / k);
    std::sort(angles.begin(), angles.end());
    const double rx = radius * (0.5 + u(rng));
    const double ry = radius * (0.5 + u(rng));
    std::vector<Point2> v;
    for (double a : angles) v.push_back(center + Point2{rx * std::cos(a), ry * std::sin(a)});
    return ConvexPolygon::make(v);
}

inline Point2 random_point(std::mt19937_64& rng, const ConvexPolygon& env)
{
    double lo_x = env.vertex(0).x, hi_x = lo_x, lo_y = env.vertex(0).y, hi_y = lo_y;
    for (const auto& v : env.vertices()) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
    while (true) {
        const Point2 p{ux(rng), uy(rng)};
        if (env.contains(p, 0.0)) return p;
    }
}

/// n generators in env, pairwise at least min_gap apart. With max_weight > 0 the
/// weights are drawn in [-max_weight, max_weight] and redrawn until every
/// generator lies strictly inside its own nonempty cell.
inline std::vector<Generator> random_generators(std::mt19937_64& rng, const ConvexPolygon& env, int n,
                                                double max_weight = 0.0, double min_gap = 2.0)
{
    std::uniform_real_distribution<double> uw(-max_weight, max_weight);
    while (true) {
        std::vector<Generator> g;
        while (static_cast<int>(g.size()) < n) {
            const Point2 p = random_point(rng, env);
            bool ok = true;
            for (const auto& o : g) ok = ok && distance(o.position, p) >= min_gap;
            if (ok) g.push_back({static_cast<int>(g.size()), p, max_weight > 0.0 ? uw(rng) : 0.0});
        }
        const PartitionResult part = compute_power_partition(env, g);
        bool ok = true;
        for (std::size_t k = 0; k < g.size(); ++k) {
            ok = ok && !part.cells[k].empty() && part.cells[k].area > 1.0 &&
                 part.cells[k].polygon.contains(g[k].position, 0.0) &&
                 part.cells[k].polygon.boundary_distance(g[k].position) > 1e-3;
        }
        if (ok) return g;
    }
}

inline CapabilityProfile random_capabilities(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.5, 5.0);
    std::vector<double> raw;
    for (int k = 0; k < n; ++k) raw.push_back(u(rng));
    return CapabilityProfile::from_raw(raw);
}

inline double objective_at(const ConvexPolygon& env, const std::vector<Generator>& g, const CapabilityProfile& caps)
{
    return objective_H(compute_power_partition(env, g), caps);
}

/// Central differences of H with respect to (x_i, y_i, w_i).
struct NumericGradient
{
    Point2 position;
    double weight = 0.0;
};

inline NumericGradient finite_difference(const ConvexPolygon& env, std::vector<Generator> g,
                                         const CapabilityProfile& caps, std::size_t i, double h = 1e-5)
{
    auto diff = [&](auto&& bump) {
        const Generator keep = g[i];
        bump(g[i], h);
        const double plus = objective_at(env, g, caps);
        g[i] = keep;
        bump(g[i], -h);
        const double minus = objective_at(env, g, caps);
        g[i] = keep;
        return (plus - minus) / (2.0 * h);
    };
    NumericGradient out;
    out.position.x = diff([](Generator& x, double d) { x.position.x += d; });
    out.position.y = diff([](Generator& x, double d) { x.position.y += d; });
    out.weight = diff([](Generator& x, double d) { x.weight += d; });
    return out;
}

inline double relative_error(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double relative_error(Point2 a, Point2 b)
{
    const double scale = std::max(norm(a), norm(b));
    return scale == 0.0 ? 0.0 : norm(a - b) / scale;
}

/// Relative check, falling back to an absolute bound for near-zero gradients.
template <class T>
bool gradient_matches(const T& analytic, const T& numeric, double rel = 1e-4, double abs_tol = 1e-6)
{
    double scale;
    double gap;
    if constexpr (std::is_same_v<T, Point2>) {
        scale = std::max(norm(analytic), norm(numeric));
        gap = norm(analytic - numeric);
    } else {
        scale = std::max(std::abs(analytic), std::abs(numeric));
        gap = std::abs(analytic - numeric);
    }
    if (scale < 1.0) return gap <= abs_tol || gap <= rel * scale;
    return gap <= rel * scale;
}

/// Grid membership oracle: the cell containing each sample is the power-distance argmin.
inline bool grid_matches_argmin(const PartitionResult& part, const std::vector<Generator>& g, int nx, int ny,
                                double tie = 1e-4)
{
    const auto& env = part.environment;
    double lo_x = env.vertex(0).x, hi_x = lo_x, lo_y = env.vertex(0).y, hi_y = lo_y;
    for (const auto& v : env.vertices()) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    for (int a = 0; a < nx; ++a) {
        for (int b = 0; b < ny; ++b) {
            const Point2 q{lo_x + (a + 0.5) * (hi_x - lo_x) / nx, lo_y + (b + 0.5) * (hi_y - lo_y) / ny};
            if (!env.contains(q)) continue;
            double best = power_distance(g[0], q);
            for (const auto& x : g) best = std::min(best, power_distance(x, q));
            for (std::size_t k = 0; k < g.size(); ++k) {
                const bool minimal = power_distance(g[k], q) <= best + tie;
                const bool strict = power_distance(g[k], q) <= best;
                const bool inside = part.cells[k].polygon.contains(q, 1e-7);
                if (strict && !inside) return false;
                if (inside && !minimal) return false;
            }
        }
    }
    return true;
}

} // namespace hetcov::testing
