#pragma once

#include <hetcov/objective.hpp>
#include <hetcov/power_diagram.hpp>
#include <hetcov/simulation.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace hetcov {

/// Shortest text that reads back to the same double.
inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline constexpr const char* trace_robot_columns[] = {"A", "c", "px", "py", "w", "x", "y", "conv"};

inline std::string trace_header(const std::vector<int>& roster)
{
    std::string h = "tick,lambda,state,keep_converged,H,events";
    for (int id : roster) {
        for (const char* col : trace_robot_columns) h += "," + std::string(col) + "_" + std::to_string(id);
    }
    return h;
}

inline std::string trace_line(const TraceRow& row, const std::vector<int>& roster)
{
    std::string line = std::to_string(row.tick) + "," + std::to_string(row.lambda) + "," + to_string(row.state) + "," +
                       std::to_string(row.keep_converged) + "," + format_number(row.objective) + ",";
    for (std::size_t k = 0; k < row.events.size(); ++k) line += (k ? ";" : "") + row.events[k];
    for (int id : roster) {
        const auto it = std::find_if(row.robots.begin(), row.robots.end(), [&](const RobotRecord& r) { return r.id == id; });
        if (it == row.robots.end()) {
            line += ",,,,,,,,";
            continue;
        }
        line += "," + format_number(it->area) + "," + format_number(it->capability) + "," +
                format_number(it->position.x) + "," + format_number(it->position.y) + "," + format_number(it->weight) +
                "," + format_number(it->pose.x) + "," + format_number(it->pose.y) + "," + (it->converged ? "1" : "0");
    }
    return line;
}

inline void write_trace(std::ostream& out, const TraceLog& log)
{
    out << trace_header(log.roster) << '\n';
    for (const auto& row : log.rows) out << trace_line(row, log.roster) << '\n';
}

// ---------------------------------------------------------------------------
// Partition dump
// ---------------------------------------------------------------------------

/// One line per cell: id px py w area k x1 y1 ... xk yk.
inline void write_partition(std::ostream& out, const PartitionResult& partition, std::span<const Generator> generators)
{
    out << "# id px py w area k x1 y1 ... xk yk\n";
    for (std::size_t i = 0; i < partition.cells.size(); ++i) {
        const Cell& c = partition.cells[i];
        const Generator& g = generators[i];
        out << g.id << ' ' << format_number(g.position.x) << ' ' << format_number(g.position.y) << ' '
            << format_number(g.weight) << ' ' << format_number(c.area) << ' ' << c.polygon.size();
        for (const auto& v : c.polygon.vertices()) out << ' ' << format_number(v.x) << ' ' << format_number(v.y);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// SVG snapshot
// ---------------------------------------------------------------------------

inline std::string robot_color(int id)
{
    const int hue = static_cast<int>((static_cast<unsigned>(id) * 137u) % 360u);
    return "hsl(" + std::to_string(hue) + ",65%,72%)";
}

inline void write_svg(std::ostream& out, const Simulation& sim)
{
    const auto& env = sim.environment().vertices();
    double lo_x = env[0].x, hi_x = lo_x, lo_y = env[0].y, hi_y = lo_y;
    for (const auto& v : env) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    const double w = hi_x - lo_x, h = hi_y - lo_y;
    const double pad = 0.03 * std::max(w, h);
    const double unit = std::max(w, h) / 200.0;
    auto px = [&](Point2 p) { return format_number(p.x) + "," + format_number(hi_y + lo_y - p.y); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_number(lo_x - pad) << ' '
        << format_number(lo_y - pad) << ' ' << format_number(w + 2 * pad) << ' ' << format_number(h + 2 * pad)
        << "\" width=\"800\" height=\"" << static_cast<int>(std::lround(800.0 * (h + 2 * pad) / (w + 2 * pad)))
        << "\">\n";
    out << "<title>tick " << sim.tick() << ", H=" << format_number(sim.objective()) << "</title>\n";

    out << "<polygon points=\"";
    for (const auto& v : env) out << px(v) << ' ';
    out << "\" fill=\"none\" stroke=\"black\" stroke-width=\"" << format_number(0.5 * unit) << "\"/>\n";

    const auto& part = sim.partition();
    const auto& board = sim.board();
    const auto& robots = sim.robots();
    const CapabilityProfile caps = robots.empty() ? CapabilityProfile{} : sim.capability_profile();
    for (std::size_t k = 0; k < part.cells.size(); ++k) {
        const Cell& c = part.cells[k];
        if (c.empty()) continue;
        out << "<polygon points=\"";
        for (const auto& v : c.polygon.vertices()) out << px(v) << ' ';
        out << "\" fill=\"" << robot_color(c.owner) << "\" stroke=\"#333\" stroke-width=\"" << format_number(0.3 * unit)
            << "\"/>\n";
    }
    for (std::size_t k = 0; k < board.size(); ++k) {
        const Generator& g = board[k];
        out << "<circle cx=\"" << format_number(g.position.x) << "\" cy=\"" << format_number(hi_y + lo_y - g.position.y)
            << "\" r=\"" << format_number(1.2 * unit) << "\" fill=\"black\"/>\n";
        const double c = k < caps.size() ? caps.normalized[k] : 0.0;
        const double cap = k < robots.size() ? robots[k].capability() : 0.0;
        out << "<text x=\"" << format_number(g.position.x + 1.5 * unit) << "\" y=\""
            << format_number(hi_y + lo_y - g.position.y - 1.5 * unit) << "\" font-size=\"" << format_number(4 * unit)
            << "\">" << g.id << " C=" << format_number(cap) << " c=" << format_number(c)
            << " w=" << format_number(g.weight) << "</text>\n";
    }
    for (const auto& r : robots) {
        const Point2 p = r.pose();
        const double s = 1.5 * unit;
        out << "<rect x=\"" << format_number(p.x - s / 2) << "\" y=\"" << format_number(hi_y + lo_y - p.y - s / 2)
            << "\" width=\"" << format_number(s) << "\" height=\"" << format_number(s)
            << "\" fill=\"none\" stroke=\"red\" stroke-width=\"" << format_number(0.3 * unit) << "\"/>\n";
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Summary
// ---------------------------------------------------------------------------

struct SummaryRobot
{
    int id = 0;
    double capability = 0.0;   // normalized
    double area = 0.0;
    double error = 0.0;        // A_i - c_i A
};

struct RunSummary
{
    double objective = 0.0;
    double total_area = 0.0;
    long ticks = 0;
    std::vector<long> convergence_ticks;
    std::vector<SummaryRobot> robots;
    std::uint64_t seed = 0;
    std::string stop_reason;
};

inline RunSummary summarize(const Simulation& sim, std::uint64_t seed)
{
    RunSummary s;
    s.objective = sim.objective();
    s.total_area = sim.partition().total_area;
    s.ticks = sim.tick();
    s.convergence_ticks = sim.trace().convergence_ticks;
    s.seed = seed;
    s.stop_reason = to_string(sim.stop_reason());
    const auto& cells = sim.partition().cells;
    const auto& robots = sim.robots();
    if (robots.empty()) return s;
    const CapabilityProfile caps = sim.capability_profile();
    for (std::size_t k = 0; k < robots.size() && k < cells.size(); ++k) {
        const double c = caps.normalized[k];
        s.robots.push_back({robots[k].id(), c, cells[k].area, cells[k].area - c * s.total_area});
    }
    return s;
}

inline nlohmann::json to_json(const RunSummary& s)
{
    nlohmann::json j;
    j["final_H"] = s.objective;
    j["total_area"] = s.total_area;
    j["ticks"] = s.ticks;
    j["convergence_ticks"] = s.convergence_ticks;
    j["seed"] = s.seed;
    j["stop_reason"] = s.stop_reason;
    j["robots"] = nlohmann::json::array();
    for (const auto& r : s.robots) {
        j["robots"].push_back({{"id", r.id}, {"capability", r.capability}, {"area", r.area}, {"area_error", r.error}});
    }
    return j;
}

/// H recomputed from the summary's own error vector.
inline double summary_objective(const RunSummary& s)
{
    std::vector<double> e, c;
    for (const auto& r : s.robots) {
        e.push_back(r.error);
        c.push_back(r.capability);
    }
    return objective_from_area_errors(e, c);
}

} // namespace hetcov
