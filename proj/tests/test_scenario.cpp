#include <hetcov/io.hpp>
#include <hetcov/scenario.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace hetcov;

namespace {

ErrorCode code_of(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::invalid_input;
}

std::string message_of(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

const char* minimal = R"({
  "environment": [[0, 0], [10, 0], [10, 10], [0, 10]],
  "robots": [{"id": 1, "capability": 1, "position": [2, 2]}, {"id": 2, "capability": 3}]
})";

} // namespace

TEST(BuiltinScenario, Environment)
{
    const auto s = gen_paper_scenario();
    EXPECT_DOUBLE_EQ(shoelace_area(s.environment), 20000.0);
}

TEST(BuiltinScenario, Capabilities)
{
    const auto s = gen_paper_scenario();
    std::vector<double> caps;
    for (const auto& r : s.robots) caps.push_back(r.capability);
    EXPECT_EQ(caps, (std::vector<double>{2, 1, 1, 1, 1, 1, 1, 5}));
}

TEST(BuiltinScenario, Events)
{
    const auto s = gen_paper_scenario();
    ASSERT_EQ(s.events.size(), 2u);
    EXPECT_EQ(s.events[0].action, EventAction::set_capability);
    EXPECT_EQ(s.events[0].after_convergence, 1);
    EXPECT_EQ(s.events[0].value, 1.0);
    EXPECT_EQ(s.events[1].action, EventAction::remove_robot);
    EXPECT_EQ(s.events[1].after_convergence, 2);
    EXPECT_EQ(s.parameters.stop_after_convergences, 3);
    std::vector<double> after{1, 1, 1, 1, 1, 1, 1, 5};
    EXPECT_NEAR(CapabilityProfile::from_raw(after).normalized[0], 1.0 / 12.0, 1e-15);
}

TEST(ScenarioIo, RoundTrip)
{
    auto s = gen_paper_scenario(77);
    s.robots[2].position = Point2{12.5, 0.1 + 0.2};
    s.parameters.gamma_p = 3e-6;
    TeamEvent add;
    add.step = 40;
    add.action = EventAction::add_robot;
    add.id = 20;
    add.value = 0.3;
    add.position = {1.0 / 3.0, 2.0 / 7.0};
    s.events.push_back(add);
    const auto again = parse_scenario(write_scenario(s));
    EXPECT_EQ(again, s);
    EXPECT_EQ(write_scenario(again), write_scenario(s));
}

TEST(ScenarioIo, MinimalDefaults)
{
    const auto s = parse_scenario(minimal);
    EXPECT_EQ(s.robots.size(), 2u);
    EXPECT_FALSE(s.parameters.gamma_p.has_value());
    EXPECT_EQ(s.parameters.time_threshold, 100);
    EXPECT_DOUBLE_EQ(simulation_parameters(s).steps.gamma_p, 0.2 / 100.0);
}

TEST(ScenarioIo, MalformedReportsLine)
{
    const std::string bad = "{\n  \"environment\": [[0,0],\n  [1,0]]]\n}";
    EXPECT_EQ(code_of(bad), ErrorCode::scenario);
    EXPECT_NE(message_of(bad).find("line 3"), std::string::npos) << message_of(bad);
}

TEST(ScenarioIo, SchemaErrorsReportPath)
{
    const std::string outside = R"({"environment": [[0,0],[1,0],[1,1]], "robots": [{"id": 1, "capability": 1, "position": [5, 5]}]})";
    EXPECT_EQ(code_of(outside), ErrorCode::scenario);
    EXPECT_NE(message_of(outside).find("/robots/0/position"), std::string::npos);

    const std::string negative = R"({"environment": [[0,0],[1,0],[1,1]], "robots": [{"id": 1, "capability": -1}]})";
    EXPECT_NE(message_of(negative).find("/robots/0/capability"), std::string::npos);

    const std::string zero = R"({"environment": [[0,0],[1,0],[1,1]], "robots": [{"id": 1, "capability": 0}]})";
    EXPECT_EQ(code_of(zero), ErrorCode::scenario);

    const std::string missing = R"({"robots": [{"id": 1, "capability": 1}]})";
    EXPECT_NE(message_of(missing).find("environment"), std::string::npos);

    const std::string unknown = R"({"environment": [[0,0],[1,0],[1,1]], "robots": [{"id": 1, "capability": 1}], "colour": 3})";
    EXPECT_NE(message_of(unknown).find("colour"), std::string::npos);

    const std::string concave = R"({"environment": [[0,0],[2,0],[1,0.2],[2,2],[0,2]], "robots": [{"id": 1, "capability": 1}]})";
    EXPECT_NE(message_of(concave).find("/environment"), std::string::npos);

    const std::string trigger = R"({"environment": [[0,0],[1,0],[1,1]], "robots": [{"id": 1, "capability": 1}],
        "events": [{"action": "remove_robot", "id": 1}]})";
    EXPECT_NE(message_of(trigger).find("/events/0"), std::string::npos);
}

TEST(ScenarioIo, SeededPlacementIsReproducible)
{
    const auto s = parse_scenario(minimal);
    const auto a = resolve_robots(s);
    const auto b = resolve_robots(s);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].position, (Point2{2, 2}));
    EXPECT_EQ(a[1].position, b[1].position);
    auto other = s;
    other.parameters.seed = 99;
    EXPECT_NE(resolve_robots(other)[1].position, a[1].position);
    const auto env = ConvexPolygon::make(s.environment);
    EXPECT_TRUE(env.contains(a[1].position));
}

TEST(Summary, ObjectiveMatchesErrorVector)
{
    auto s = gen_paper_scenario(5);
    auto sim = make_simulation(s);
    sim.run(400);
    const auto summary = summarize(sim, 5);
    ASSERT_EQ(summary.robots.size(), 8u);
    const double recomputed = summary_objective(summary);
    EXPECT_NEAR(recomputed, summary.objective, 1e-9 * summary.objective);
    const auto j = to_json(summary);
    EXPECT_EQ(j["robots"].size(), 8u);
    EXPECT_EQ(j["seed"], 5);
}

TEST(TraceCsv, HeaderAndRows)
{
    auto sim = make_simulation(parse_scenario(minimal));
    sim.run(7);
    std::ostringstream out;
    write_trace(out, sim.trace());
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("tick,lambda,state,keep_converged,H,events,A_1,c_1,px_1,py_1,w_1,x_1,y_1,conv_1,A_2", 0), 0u);
    const auto columns = std::count(line.begin(), line.end(), ',');
    int rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), columns);
        EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u);
        ++rows;
    }
    EXPECT_EQ(rows, 7);
}

TEST(PartitionDump, OneLinePerCell)
{
    auto sim = make_simulation(parse_scenario(minimal));
    std::ostringstream out;
    write_partition(out, sim.partition(), sim.board());
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line[0], '#');
    int cells = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        int id, k;
        double px, py, w, area;
        fields >> id >> px >> py >> w >> area >> k;
        std::vector<Point2> v(k);
        for (auto& p : v) fields >> p.x >> p.y;
        EXPECT_NEAR(shoelace_area(v), area, 1e-9);
        ++cells;
    }
    EXPECT_EQ(cells, 2);
}

TEST(Snapshot, ContainsCellsAndLabels)
{
    auto sim = make_simulation(gen_paper_scenario());
    std::ostringstream out;
    write_svg(out, sim);
    const std::string svg = out.str();
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    std::size_t polygons = 0;
    for (auto p = svg.find("<polygon"); p != std::string::npos; p = svg.find("<polygon", p + 1)) ++polygons;
    EXPECT_EQ(polygons, 9u);
    EXPECT_NE(svg.find("c=0.15384615384615385"), std::string::npos);
}
