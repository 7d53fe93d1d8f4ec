#include "support.hpp"

#include <hetcov/geometry.hpp>

#include <gtest/gtest.h>

using namespace hetcov;
using hetcov::testing::random_convex;
using hetcov::testing::unit_square;

namespace {

double fan_area(const ConvexPolygon& p)
{
    // triangles from the vertex centroid, each by Heron's formula
    Point2 c{};
    for (const auto& v : p.vertices()) c += v;
    c = c / static_cast<double>(p.size());
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double a = distance(c, p.vertex(k));
        const double b = distance(p.vertex(k), p.vertex(k + 1));
        const double d = distance(p.vertex(k + 1), c);
        const double s = 0.5 * (a + b + d);
        total += std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - d)));
    }
    return total;
}

} // namespace

TEST(Shoelace, UnitSquare) { EXPECT_DOUBLE_EQ(shoelace_area(unit_square()), 1.0); }

TEST(Shoelace, TwoHundredByHundred)
{
    EXPECT_DOUBLE_EQ(shoelace_area(hetcov::testing::rectangle()), 20000.0);
}

TEST(Shoelace, OrientationIndependent)
{
    const std::vector<Point2> cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    EXPECT_DOUBLE_EQ(shoelace_area(cw), 1.0);
    EXPECT_LT(signed_area(cw), 0.0);
}

TEST(Shoelace, MatchesTriangleFan)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const ConvexPolygon hex = random_convex(rng, 6, {50.0, -20.0}, 30.0);
        const double a = shoelace_area(hex);
        EXPECT_NEAR(a, fan_area(hex), 1e-12 * a * 10) << trial;
    }
}

TEST(Shoelace, RejectsNonFinite)
{
    const std::vector<Point2> bad{{0, 0}, {1, 0}, {std::nan(""), 1}};
    EXPECT_THROW(shoelace_area(bad), Error);
}

TEST(ConvexPolygon, NormalizesClockwiseInput)
{
    const auto p = ConvexPolygon::make({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    EXPECT_GT(signed_area(p.vertices()), 0.0);
}

TEST(ConvexPolygon, RejectsInvalidInput)
{
    EXPECT_THROW(ConvexPolygon::make({{0, 0}, {1, 0}}), Error);
    EXPECT_THROW(ConvexPolygon::make({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), Error);
    EXPECT_THROW(ConvexPolygon::make({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), Error);
    EXPECT_THROW(ConvexPolygon::make({{0, 0}, {1, 0}, {2, 0}}), Error);
    try {
        ConvexPolygon::make({{0, 0}, {1, 0}});
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_input);
    }
}

TEST(ConvexPolygon, AcceptsCollinearVertex)
{
    EXPECT_NO_THROW(ConvexPolygon::make({{0, 0}, {1, 0}, {2, 0}, {2, 1}, {0, 1}}));
}

TEST(ConvexPolygon, ContainsWithTolerance)
{
    const auto sq = unit_square();
    EXPECT_TRUE(sq.contains({0.5, 0.5}));
    EXPECT_TRUE(sq.contains({1.0, 0.5}));
    EXPECT_TRUE(sq.contains({1.0 + 0.5e-9, 0.5}));
    EXPECT_FALSE(sq.contains({1.0 + 1e-6, 0.5}));
    EXPECT_FALSE(ConvexPolygon{}.contains({0, 0}));
}

TEST(ConvexPolygon, BoundaryDistance)
{
    const auto sq = unit_square();
    EXPECT_DOUBLE_EQ(sq.boundary_distance({0.5, 0.5}), 0.5);
    EXPECT_DOUBLE_EQ(sq.boundary_distance({0.5, 0.1}), 0.1);
    EXPECT_DOUBLE_EQ(sq.boundary_distance({2.0, 0.5}), 1.0);
}

TEST(ConvexPolygon, RayFractionInside)
{
    const auto sq = unit_square();
    EXPECT_DOUBLE_EQ(sq.ray_fraction_inside({0.5, 0.5}, {0.1, 0.0}), 1.0);
    EXPECT_NEAR(sq.ray_fraction_inside({0.5, 0.5}, {1.0, 0.0}), 0.5, 1e-9);
    EXPECT_NEAR(sq.ray_fraction_inside({1.0, 0.5}, {1.0, 0.0}), 0.0, 1e-9);
    EXPECT_DOUBLE_EQ(sq.ray_fraction_inside({1.0, 0.5}, {0.0, 0.2}), 1.0);
}

TEST(ConvexPolygon, Centroid)
{
    const Point2 c = centroid(ConvexPolygon::make({{0, 0}, {4, 0}, {4, 2}, {0, 2}}));
    EXPECT_NEAR(c.x, 2.0, 1e-12);
    EXPECT_NEAR(c.y, 1.0, 1e-12);
}

TEST(ConvexPolygon, ClosestPoint)
{
    const auto sq = unit_square();
    const Point2 inside{0.3, 0.4};
    EXPECT_EQ(closest_point(sq, inside), inside);
    const Point2 right = closest_point(sq, {3.0, 0.25});
    EXPECT_NEAR(right.x, 1.0, 1e-12);
    EXPECT_NEAR(right.y, 0.25, 1e-12);
    const Point2 corner = closest_point(sq, {2.0, 2.0});
    EXPECT_NEAR(corner.x, 1.0, 1e-12);
    EXPECT_NEAR(corner.y, 1.0, 1e-12);
}

TEST(Clip, HalfPlaneKeepsLabels)
{
    const auto ring = labeled_ring(unit_square());
    const HalfPlane h{{0.5, 0.0}, {1.0, 0.0}};   // keep x <= 0.5
    const auto out = clip_ring(ring, h, 7);
    const auto pts = ring_points(out);
    EXPECT_NEAR(shoelace_area(pts), 0.5, 1e-12);
    int labelled = 0;
    for (const auto& v : out) labelled += v.edge_label == 7;
    EXPECT_EQ(labelled, 1);
}

TEST(Clip, EmptyWhenFullyOutside)
{
    const HalfPlane h{{-1.0, 0.0}, {1.0, 0.0}};
    EXPECT_TRUE(clip_ring(labeled_ring(unit_square()), h, 1).empty());
}

TEST(Clip, IntersectSquares)
{
    const auto a = unit_square();
    const auto b = ConvexPolygon::make({{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}});
    EXPECT_NEAR(shoelace_area(intersect(a, b)), 0.25, 1e-12);
    const auto far = ConvexPolygon::make({{5, 5}, {6, 5}, {6, 6}});
    EXPECT_TRUE(intersect(a, far).empty());
}

TEST(Clip, Chord)
{
    const auto span = chord(unit_square(), {0.0, 0.25}, {1.0, 0.0});
    ASSERT_TRUE(span.has_value());
    EXPECT_NEAR(span->first, 0.0, 1e-12);
    EXPECT_NEAR(span->second, 1.0, 1e-12);
    EXPECT_FALSE(chord(unit_square(), {0.0, 2.0}, {1.0, 0.0}).has_value());
}
