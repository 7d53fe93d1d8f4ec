#pragma once

#include <hetcov/error.hpp>
#include <hetcov/geometry.hpp>
#include <hetcov/simulation.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace hetcov {

struct ScenarioRobot
{
    int id = 0;
    double capability = 0.0;
    std::optional<Point2> position;   // unset: drawn uniformly over the environment from the seed

    bool operator==(const ScenarioRobot&) const = default;
};

struct ScenarioParameters
{
    std::optional<double> gamma_p;   // unset: 0.2 / area
    double gamma_w = 1e-3;
    double position_eps = 1e-3;
    double weight_eps = 1e-2;
    int time_threshold = 100;
    long max_steps = 20000;
    std::uint64_t seed = 1;
    long snapshot_every = 0;
    double max_speed = 0.0;
    double sweep_width = 5.0;
    double replan_fraction = 0.01;
    int stop_after_convergences = 0;

    bool operator==(const ScenarioParameters&) const = default;
};

struct ScenarioScript
{
    std::vector<Point2> environment;
    std::vector<ScenarioRobot> robots;
    std::vector<TeamEvent> events;
    ScenarioParameters parameters;

    bool operator==(const ScenarioScript&) const = default;
};

inline double default_gamma_p(double area) { return 0.2 / area; }

namespace detail {

using nlohmann::json;

[[noreturn]] inline void scenario_fail(const std::string& path, const std::string& what)
{
    throw Error(ErrorCode::scenario, (path.empty() ? std::string("/") : path) + ": " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path)
{
    if (!obj.contains(key)) scenario_fail(path, "missing field '" + key + "'");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& path)
{
    if (!v.is_number()) scenario_fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) scenario_fail(path, "expected a finite number");
    return d;
}

inline long as_integer(const json& v, const std::string& path)
{
    if (!v.is_number_integer()) scenario_fail(path, "expected an integer");
    return v.get<long>();
}

inline Point2 as_point(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2) scenario_fail(path, "expected [x, y]");
    return {as_number(v[0], path + "/0"), as_number(v[1], path + "/1")};
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path)
{
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
            scenario_fail(path, "unknown field '" + key + "'");
        }
    }
}

inline EventAction parse_action(const json& v, const std::string& path)
{
    if (!v.is_string()) scenario_fail(path, "expected a string");
    const auto s = v.get<std::string>();
    if (s == "set_capability") return EventAction::set_capability;
    if (s == "remove_robot") return EventAction::remove_robot;
    if (s == "add_robot") return EventAction::add_robot;
    scenario_fail(path, "unknown action '" + s + "'");
}

inline std::pair<long, long> line_column(const std::string& text, std::size_t byte)
{
    long line = 1, col = 1;
    for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses and validates a scenario script; errors carry a JSON path or a line number.
inline ScenarioScript parse_scenario(const std::string& text)
{
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw Error(ErrorCode::scenario,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed scenario");
    }
    if (!doc.is_object()) detail::scenario_fail("", "expected an object");
    detail::check_keys(doc, {"environment", "robots", "events", "parameters"}, "");

    ScenarioScript s;
    const json& env = detail::field(doc, "environment", "");
    if (!env.is_array()) detail::scenario_fail("/environment", "expected an array of [x, y]");
    for (std::size_t k = 0; k < env.size(); ++k) {
        s.environment.push_back(detail::as_point(env[k], "/environment/" + std::to_string(k)));
    }
    ConvexPolygon poly;
    try {
        poly = ConvexPolygon::make(s.environment);
    } catch (const Error& e) {
        detail::scenario_fail("/environment", e.what());
    }

    const json& robots = detail::field(doc, "robots", "");
    if (!robots.is_array() || robots.empty()) detail::scenario_fail("/robots", "expected a nonempty array");
    bool any_positive = false;
    for (std::size_t k = 0; k < robots.size(); ++k) {
        const std::string path = "/robots/" + std::to_string(k);
        const json& r = robots[k];
        if (!r.is_object()) detail::scenario_fail(path, "expected an object");
        detail::check_keys(r, {"id", "capability", "position"}, path);
        ScenarioRobot robot;
        robot.id = static_cast<int>(detail::as_integer(detail::field(r, "id", path), path + "/id"));
        robot.capability = detail::as_number(detail::field(r, "capability", path), path + "/capability");
        if (robot.capability < 0.0) detail::scenario_fail(path + "/capability", "must be >= 0");
        any_positive = any_positive || robot.capability > 0.0;
        if (r.contains("position")) {
            robot.position = detail::as_point(r.at("position"), path + "/position");
            if (!poly.contains(*robot.position)) detail::scenario_fail(path + "/position", "outside the environment");
        }
        for (const auto& other : s.robots) {
            if (other.id == robot.id) detail::scenario_fail(path + "/id", "duplicate id");
            if (other.position && robot.position && distance(*other.position, *robot.position) < eps_pos) {
                detail::scenario_fail(path + "/position", "coincides with robot " + std::to_string(other.id));
            }
        }
        s.robots.push_back(robot);
    }
    if (!any_positive) detail::scenario_fail("/robots", "at least one capability must be positive");

    if (doc.contains("events")) {
        const json& events = doc.at("events");
        if (!events.is_array()) detail::scenario_fail("/events", "expected an array");
        for (std::size_t k = 0; k < events.size(); ++k) {
            const std::string path = "/events/" + std::to_string(k);
            const json& e = events[k];
            if (!e.is_object()) detail::scenario_fail(path, "expected an object");
            detail::check_keys(e, {"action", "id", "value", "position", "step", "after_convergence"}, path);
            TeamEvent ev;
            ev.action = detail::parse_action(detail::field(e, "action", path), path + "/action");
            ev.id = static_cast<int>(detail::as_integer(detail::field(e, "id", path), path + "/id"));
            if (e.contains("step")) {
                ev.step = detail::as_integer(e.at("step"), path + "/step");
                if (*ev.step < 0) detail::scenario_fail(path + "/step", "must be >= 0");
            }
            if (e.contains("after_convergence")) {
                ev.after_convergence = static_cast<int>(detail::as_integer(e.at("after_convergence"), path + "/after_convergence"));
                if (*ev.after_convergence < 1) detail::scenario_fail(path + "/after_convergence", "must be >= 1");
            }
            if (ev.step.has_value() == ev.after_convergence.has_value()) {
                detail::scenario_fail(path, "exactly one of 'step' or 'after_convergence' is required");
            }
            if (ev.action != EventAction::remove_robot) {
                ev.value = detail::as_number(detail::field(e, "value", path), path + "/value");
                if (ev.value < 0.0) detail::scenario_fail(path + "/value", "must be >= 0");
            }
            if (ev.action == EventAction::add_robot) {
                ev.position = detail::as_point(detail::field(e, "position", path), path + "/position");
                if (!poly.contains(ev.position)) detail::scenario_fail(path + "/position", "outside the environment");
            }
            s.events.push_back(ev);
        }
    }

    if (doc.contains("parameters")) {
        const json& p = doc.at("parameters");
        const std::string path = "/parameters";
        if (!p.is_object()) detail::scenario_fail(path, "expected an object");
        detail::check_keys(p, {"gamma_p", "gamma_w", "position_eps", "weight_eps", "time_threshold", "max_steps", "seed",
                               "snapshot_every", "max_speed", "sweep_width", "replan_fraction",
                               "stop_after_convergences"},
                           path);
        auto& q = s.parameters;
        auto positive = [&](const char* key, double& out) {
            if (!p.contains(key)) return;
            out = detail::as_number(p.at(key), path + "/" + key);
            if (!(out > 0.0)) detail::scenario_fail(path + "/" + key, "must be > 0");
        };
        auto non_negative = [&](const char* key, auto& out) {
            if (!p.contains(key)) return;
            const auto v = std::is_integral_v<std::decay_t<decltype(out)>>
                               ? static_cast<double>(detail::as_integer(p.at(key), path + "/" + key))
                               : detail::as_number(p.at(key), path + "/" + key);
            if (v < 0.0) detail::scenario_fail(path + "/" + key, "must be >= 0");
            out = static_cast<std::decay_t<decltype(out)>>(v);
        };
        if (p.contains("gamma_p")) {
            double g = 0.0;
            positive("gamma_p", g);
            q.gamma_p = g;
        }
        positive("gamma_w", q.gamma_w);
        positive("position_eps", q.position_eps);
        positive("weight_eps", q.weight_eps);
        positive("sweep_width", q.sweep_width);
        non_negative("replan_fraction", q.replan_fraction);
        non_negative("max_speed", q.max_speed);
        non_negative("time_threshold", q.time_threshold);
        non_negative("max_steps", q.max_steps);
        non_negative("snapshot_every", q.snapshot_every);
        non_negative("stop_after_convergences", q.stop_after_convergences);
        if (p.contains("seed")) {
            const json& v = p.at("seed");
            if (!v.is_number_unsigned()) detail::scenario_fail(path + "/seed", "expected a non-negative integer");
            q.seed = v.get<std::uint64_t>();
        }
    }
    return s;
}

inline ScenarioScript load_scenario(const std::string& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::scenario, "cannot read scenario '" + file + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

inline nlohmann::json to_json(const ScenarioScript& s)
{
    using nlohmann::json;
    json doc;
    doc["environment"] = json::array();
    for (const auto& v : s.environment) doc["environment"].push_back({v.x, v.y});
    doc["robots"] = json::array();
    for (const auto& r : s.robots) {
        json jr{{"id", r.id}, {"capability", r.capability}};
        if (r.position) jr["position"] = {r.position->x, r.position->y};
        doc["robots"].push_back(jr);
    }
    doc["events"] = json::array();
    for (const auto& e : s.events) {
        json je{{"action", to_string(e.action)}, {"id", e.id}};
        if (e.step) je["step"] = *e.step;
        if (e.after_convergence) je["after_convergence"] = *e.after_convergence;
        if (e.action != EventAction::remove_robot) je["value"] = e.value;
        if (e.action == EventAction::add_robot) je["position"] = {e.position.x, e.position.y};
        doc["events"].push_back(je);
    }
    const auto& p = s.parameters;
    json jp{{"gamma_w", p.gamma_w},
            {"position_eps", p.position_eps},
            {"weight_eps", p.weight_eps},
            {"time_threshold", p.time_threshold},
            {"max_steps", p.max_steps},
            {"seed", p.seed},
            {"snapshot_every", p.snapshot_every},
            {"max_speed", p.max_speed},
            {"sweep_width", p.sweep_width},
            {"replan_fraction", p.replan_fraction},
            {"stop_after_convergences", p.stop_after_convergences}};
    if (p.gamma_p) jp["gamma_p"] = *p.gamma_p;
    doc["parameters"] = jp;
    return doc;
}

inline std::string write_scenario(const ScenarioScript& s) { return to_json(s).dump(2) + "\n"; }

/// Fills in unset robot positions, uniformly over the environment, in listing order.
inline std::vector<RobotSpec> resolve_robots(const ScenarioScript& s)
{
    const ConvexPolygon env = ConvexPolygon::make(s.environment);
    double lo_x = s.environment[0].x, hi_x = lo_x, lo_y = s.environment[0].y, hi_y = lo_y;
    for (const auto& v : s.environment) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    std::mt19937_64 rng(s.parameters.seed);
    std::uniform_real_distribution<double> ux(lo_x, hi_x), uy(lo_y, hi_y);
    std::vector<RobotSpec> out;
    for (const auto& r : s.robots) {
        RobotSpec spec{r.id, {}, r.capability};
        if (r.position) {
            spec.position = *r.position;
        } else {
            bool ok = false;
            for (int attempt = 0; attempt < 100000 && !ok; ++attempt) {
                spec.position = {ux(rng), uy(rng)};
                ok = env.contains(spec.position, 0.0);
                for (const auto& o : out) ok = ok && distance(o.position, spec.position) >= eps_pos;
                for (const auto& o : s.robots) {
                    ok = ok && !(o.position && distance(*o.position, spec.position) < eps_pos);
                }
            }
            if (!ok) throw Error(ErrorCode::scenario, "could not place robot " + std::to_string(r.id));
        }
        out.push_back(spec);
    }
    return out;
}

inline SimulationParameters simulation_parameters(const ScenarioScript& s)
{
    const double area = shoelace_area(s.environment);
    SimulationParameters p;
    p.steps.gamma_p = s.parameters.gamma_p.value_or(default_gamma_p(area));
    p.steps.gamma_w = s.parameters.gamma_w;
    p.thresholds.position_eps = s.parameters.position_eps;
    p.thresholds.weight_eps = s.parameters.weight_eps;
    p.thresholds.time_threshold = s.parameters.time_threshold;
    p.max_speed = s.parameters.max_speed;
    p.sweep_width = s.parameters.sweep_width;
    p.replan_fraction = s.parameters.replan_fraction;
    return p;
}

inline Simulation make_simulation(const ScenarioScript& s)
{
    return Simulation(ConvexPolygon::make(s.environment), resolve_robots(s), s.events, simulation_parameters(s));
}

/// Built-in reproduction scenario: 200 x 100 rectangle, eight robots with
/// capabilities 2,1,1,1,1,1,1,5 at seeded uniform positions; robot 1's
/// capability halves after the first sustained convergence and robot 1 leaves
/// after the second; the run stops at the third.
inline ScenarioScript gen_paper_scenario(std::uint64_t seed = 1)
{
    ScenarioScript s;
    s.environment = {{0.0, 0.0}, {200.0, 0.0}, {200.0, 100.0}, {0.0, 100.0}};
    const double caps[] = {2, 1, 1, 1, 1, 1, 1, 5};
    for (int k = 0; k < 8; ++k) s.robots.push_back({k + 1, caps[k], std::nullopt});
    TeamEvent halve;
    halve.action = EventAction::set_capability;
    halve.id = 1;
    halve.value = 1.0;
    halve.after_convergence = 1;
    TeamEvent remove;
    remove.action = EventAction::remove_robot;
    remove.id = 1;
    remove.after_convergence = 2;
    s.events = {halve, remove};
    s.parameters.seed = seed;
    s.parameters.max_steps = 20000;
    s.parameters.stop_after_convergences = 3;
    return s;
}

} // namespace hetcov
