#pragma once

#include <hetcov/bcd.hpp>
#include <hetcov/error.hpp>
#include <hetcov/geometry.hpp>
#include <hetcov/objective.hpp>
#include <hetcov/patrol.hpp>
#include <hetcov/power_diagram.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hetcov {

// ---------------------------------------------------------------------------
// Messages
// ---------------------------------------------------------------------------

inline constexpr int machine_address = -1;

struct CapabilityReport { double capability = 0.0; };
struct SyncBroadcast { double normalized_capability = 0.0; Block block = Block::position; };
struct NeighborData { AgentSummary data; };
struct ConvergedSignal {};
struct OperationalStateNotice { OperationalState state = OperationalState::initialing; };

enum class MessageKind { capability_report, sync_broadcast, neighbor_data, converged_signal, operational_state };

struct Message
{
    int sender = machine_address;
    int receiver = machine_address;
    std::variant<CapabilityReport, SyncBroadcast, NeighborData, ConvergedSignal, OperationalStateNotice> payload;

    MessageKind kind() const { return static_cast<MessageKind>(payload.index()); }
};

template <class T>
const T* find_payload(const std::vector<Message>& inbox)
{
    for (const auto& m : inbox) {
        if (const T* p = std::get_if<T>(&m.payload)) return p;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

enum class EventAction { set_capability, remove_robot, add_robot };

inline const char* to_string(EventAction a)
{
    switch (a) {
        case EventAction::set_capability: return "set_capability";
        case EventAction::remove_robot: return "remove_robot";
        case EventAction::add_robot: return "add_robot";
    }
    return "?";
}

/// Team change, fired at an absolute tick or right after the k-th sustained
/// convergence (entry into patrolling).
struct TeamEvent
{
    std::optional<long> step;
    std::optional<int> after_convergence;
    EventAction action = EventAction::set_capability;
    int id = 0;
    double value = 0.0;       // capability for set_capability / add_robot
    Point2 position;          // add_robot only

    bool operator==(const TeamEvent&) const = default;

    std::string describe() const
    {
        std::string s = std::string(to_string(action)) + ":" + std::to_string(id);
        if (action != EventAction::remove_robot) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "=%.17g", value);
            s += buf;
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

struct SimulationParameters
{
    StepParameters steps;
    ConvergenceThresholds thresholds;
    double max_speed = 0.0;       // per tick; 0 snaps the pose onto its target
    double sweep_width = 5.0;
    double replan_fraction = 0.01;
};

/// One robot running the per-robot loop. A tick is split into the phases the
/// lockstep round needs: publish (cell + neighbor data), tick (proposal),
/// commit (apply the accepted step) and steer (target and pose).
class RobotAgent
{
public:
    RobotAgent(int id, Point2 pose, double capability, const SimulationParameters& params)
        : id_(id), pose_(pose), target_(pose), capability_(capability), generator_{id, pose, 0.0},
          steps_(params.steps), thresholds_(params.thresholds), max_speed_(params.max_speed),
          patroller_(params.sweep_width, params.replan_fraction)
    {}

    int id() const { return id_; }
    Point2 pose() const { return pose_; }
    Point2 target() const { return target_; }
    double capability() const { return capability_; }
    double normalized_capability() const { return normalized_; }
    const Generator& generator() const { return generator_; }
    OperationalState operational_state() const { return op_state_; }
    const Cell& cell() const { return cell_; }
    const Proposal& last_proposal() const { return proposal_; }
    const std::vector<Message>& mailbox() const { return mailbox_; }
    const Patroller& patroller() const { return patroller_; }

    void set_capability(double c) { capability_ = c; }
    void set_step_parameters(const StepParameters& s) { steps_ = s; }
    void deliver(Message m) { mailbox_.push_back(std::move(m)); }
    void clear_mailbox() { mailbox_.clear(); }

    Message report_capability() const { return {id_, machine_address, CapabilityReport{capability_}}; }

    /// Computes the own cell from the published generators and returns the
    /// neighbor-data messages for every neighbor. Requires this tick's broadcast.
    std::vector<Message> publish(const ConvexPolygon& env, std::span<const Generator> board)
    {
        const SyncBroadcast* sync = find_payload<SyncBroadcast>(mailbox_);
        if (!sync) return {};
        normalized_ = sync->normalized_capability;
        std::size_t self = board.size();
        for (std::size_t k = 0; k < board.size(); ++k) {
            if (board[k].id == id_) self = k;
        }
        if (self == board.size()) throw Error(ErrorCode::invalid_input, "robot missing from board");
        cell_ = compute_cell(env, board, self);
        total_area_ = shoelace_area(env);
        std::vector<Message> out;
        for (int nb : cell_.neighbors) out.push_back({id_, nb, NeighborData{summary()}});
        return out;
    }

    /// Descent proposal for the broadcast block; emits a convergence signal
    /// when the update is below threshold. Without a broadcast the robot idles.
    std::vector<Message> tick()
    {
        proposal_ = Proposal{};
        const SyncBroadcast* sync = find_payload<SyncBroadcast>(mailbox_);
        if (!sync) return {};
        LocalView view;
        view.self = summary();
        view.total_area = total_area_;
        for (const auto& m : mailbox_) {
            const auto* nd = std::get_if<NeighborData>(&m.payload);
            if (!nd) continue;
            const auto it = cell_.edges.find(m.sender);
            if (it == cell_.edges.end()) continue;
            view.neighbors.push_back({nd->data, it->second});
        }
        proposal_ = propose_update(view, cell_, sync->block, steps_, thresholds_);
        if (proposal_.converged) return {{id_, machine_address, ConvergedSignal{}}};
        return {};
    }

    void commit(const Generator& accepted, const Cell& cell)
    {
        generator_ = accepted;
        cell_ = cell;
    }

    /// Chooses the target from the operational state and moves the pose.
    void steer(OperationalState state)
    {
        op_state_ = state;
        if (state == OperationalState::initialing) {
            target_ = generator_.position;
        } else {
            patroller_.update_cell(cell_.polygon);
            target_ = patroller_.next_target(pose_);
        }
        const Point2 gap = target_ - pose_;
        const double d = norm(gap);
        if (max_speed_ <= 0.0 || d <= max_speed_) pose_ = target_;
        else pose_ += (max_speed_ / d) * gap;
    }

private:
    AgentSummary summary() const
    {
        return {id_, cell_.area, normalized_, generator_.position, generator_.weight};
    }

    int id_;
    Point2 pose_;
    Point2 target_;
    double capability_;
    double normalized_ = 0.0;
    Generator generator_;
    StepParameters steps_;
    ConvergenceThresholds thresholds_;
    double max_speed_;
    Patroller patroller_;
    OperationalState op_state_ = OperationalState::initialing;
    Cell cell_;
    double total_area_ = 0.0;
    Proposal proposal_;
    std::vector<Message> mailbox_;
};

/// The synchronizing machine: normalizes capabilities, owns the block state
/// and decides the operational state.
class SyncMachine
{
public:
    explicit SyncMachine(ConvergenceThresholds th = {}) : thresholds_(th) {}

    const OptimizationState& state() const { return state_; }
    OptimizationState& state() { return state_; }
    const std::map<int, double>& normalized() const { return normalized_; }
    OperationalState operational_state() const { return hetcov::operational_state(state_); }

    /// l1-normalizes the reported capabilities and addresses (c_i, lambda) to each reporter.
    std::vector<Message> broadcast(const std::vector<Message>& reports)
    {
        std::map<int, double> raw;
        for (const auto& m : reports) {
            if (const auto* r = std::get_if<CapabilityReport>(&m.payload)) raw[m.sender] = r->capability;
        }
        if (raw.empty()) throw Error(ErrorCode::invalid_input, "empty active team");
        double total = 0.0;
        for (const auto& [id, c] : raw) total += c;
        if (!(total > 0.0)) throw Error(ErrorCode::invalid_input, "team has no capability");
        normalized_.clear();
        std::vector<Message> out;
        for (const auto& [id, c] : raw) {
            normalized_[id] = c / total;
            out.push_back({machine_address, id, SyncBroadcast{c / total, state_.block}});
        }
        state_.converged.assign(raw.size(), false);
        return out;
    }

    /// Applies the block-toggle rule to this tick's convergence signals and
    /// returns the operational-state notices.
    std::vector<Message> conclude(const std::vector<Message>& signals)
    {
        std::size_t k = 0;
        bool all = !normalized_.empty();
        for (const auto& [id, c] : normalized_) {
            bool got = false;
            for (const auto& m : signals) {
                got = got || (m.sender == id && std::holds_alternative<ConvergedSignal>(m.payload));
            }
            if (k < state_.converged.size()) state_.converged[k] = got;
            all = all && got;
            ++k;
        }
        last_all_converged_ = all;
        state_ = toggle_policy(state_, all, thresholds_);
        std::vector<Message> out;
        for (const auto& [id, c] : normalized_) {
            out.push_back({machine_address, id, OperationalStateNotice{operational_state()}});
        }
        return out;
    }

    bool last_all_converged() const { return last_all_converged_; }

    /// Team or capability change: prior convergence evidence no longer counts.
    void reset_convergence()
    {
        state_.keep_converged = 0;
        state_.time_in_block = 0;
        state_.converged.assign(state_.converged.size(), false);
    }

private:
    ConvergenceThresholds thresholds_;
    OptimizationState state_;
    std::map<int, double> normalized_;
    bool last_all_converged_ = false;
};

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct RobotRecord
{
    int id = 0;
    double area = 0.0;
    double capability = 0.0;   // normalized share
    Point2 position;
    double weight = 0.0;
    Point2 pose;
    bool converged = false;
};

struct TraceRow
{
    long tick = 0;
    int lambda = 1;                                      // block optimized during this tick
    OperationalState state = OperationalState::initialing;   // decided at the end of the tick
    int keep_converged = 0;
    double objective = 0.0;                              // after the tick's update
    std::vector<RobotRecord> robots;                     // active robots, ascending id
    std::vector<std::string> events;                     // applied at the start of the tick
};

struct TraceLog
{
    std::vector<int> roster;   // every robot id that appears in the run, ascending
    std::vector<TraceRow> rows;
    std::vector<long> convergence_ticks;   // ticks at which patrolling was entered
};

struct MessageRecord
{
    long tick = 0;
    int sender = 0;
    int receiver = 0;
    MessageKind kind = MessageKind::capability_report;
};

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

struct RobotSpec
{
    int id = 0;
    Point2 position;
    double capability = 0.0;
};

enum class StopReason { running, max_steps, converged, team_empty };

inline const char* to_string(StopReason r)
{
    switch (r) {
        case StopReason::running: return "running";
        case StopReason::max_steps: return "max_steps";
        case StopReason::converged: return "converged";
        case StopReason::team_empty: return "team_empty";
    }
    return "?";
}

/// Lockstep simulation of the robots and the synchronizing machine. Each tick:
/// events, capability reports, sync broadcast, cell computation and neighbor
/// exchange, proposals, round application, convergence signals and block
/// toggle, operational state and steering.
class Simulation
{
public:
    Simulation(ConvexPolygon env, std::vector<RobotSpec> robots, std::vector<TeamEvent> events,
               SimulationParameters params)
        : env_(std::move(env)), params_(params), machine_(params.thresholds), events_(std::move(events))
    {
        if (env_.empty()) throw Error(ErrorCode::scenario, "empty environment");
        std::vector<int> roster;
        for (const auto& r : robots) {
            check_new_robot(r.id, r.position, r.capability);
            roster.push_back(r.id);
            if (r.capability > 0.0) robots_.emplace_back(r.id, r.position, r.capability, params_);
        }
        for (const auto& e : events_) {
            if (!e.step && !e.after_convergence) throw Error(ErrorCode::scenario, "event without a trigger");
            if (e.action == EventAction::add_robot) roster.push_back(e.id);
        }
        std::sort(roster.begin(), roster.end());
        roster.erase(std::unique(roster.begin(), roster.end()), roster.end());
        trace_.roster = std::move(roster);
        sort_robots();
        if (robots_.empty()) throw Error(ErrorCode::scenario, "no robot with positive capability");
        fired_.assign(events_.size(), false);
        rebuild_board();
    }

    const ConvexPolygon& environment() const { return env_; }
    const std::vector<RobotAgent>& robots() const { return robots_; }
    const SyncMachine& machine() const { return machine_; }
    const TraceLog& trace() const { return trace_; }
    long tick() const { return tick_; }
    int convergence_count() const { return static_cast<int>(trace_.convergence_ticks.size()); }
    const std::vector<Generator>& board() const { return board_; }
    const PartitionResult& partition() const { return partition_; }
    double objective() const { return objective_; }

    void record_messages(bool on) { record_messages_ = on; }
    const std::vector<MessageRecord>& message_log() const { return message_log_; }

    /// Raw and normalized capabilities of the active team, in robot order.
    CapabilityProfile capability_profile() const
    {
        std::vector<double> raw;
        for (const auto& r : robots_) raw.push_back(r.capability());
        return CapabilityProfile::from_raw(std::move(raw));
    }

    /// Applies one team event now.
    void apply_event(const TeamEvent& e)
    {
        auto it = std::find_if(robots_.begin(), robots_.end(), [&](const RobotAgent& r) { return r.id() == e.id; });
        switch (e.action) {
            case EventAction::set_capability:
                if (it == robots_.end()) throw Error(ErrorCode::scenario, "unknown robot id " + std::to_string(e.id));
                if (!std::isfinite(e.value) || e.value < 0.0) throw Error(ErrorCode::scenario, "invalid capability");
                if (e.value == 0.0) robots_.erase(it);
                else it->set_capability(e.value);
                break;
            case EventAction::remove_robot:
                if (it == robots_.end()) throw Error(ErrorCode::scenario, "unknown robot id " + std::to_string(e.id));
                robots_.erase(it);
                break;
            case EventAction::add_robot:
                if (it != robots_.end()) throw Error(ErrorCode::scenario, "robot id already active " + std::to_string(e.id));
                check_new_robot(e.id, e.position, e.value);
                for (const auto& r : robots_) {
                    if (distance(r.generator().position, e.position) < eps_pos) {
                        throw Error(ErrorCode::scenario, "added robot coincides with generator " + std::to_string(r.id()));
                    }
                }
                if (e.value > 0.0) robots_.emplace_back(e.id, e.position, e.value, params_);
                sort_robots();
                break;
        }
        machine_.reset_convergence();
        rebuild_board();
    }

    /// Advances one tick and returns its trace row; the row is also appended to the trace.
    const TraceRow& step()
    {
        if (stop_ == StopReason::team_empty) throw Error(ErrorCode::invalid_input, "no active robots");
        TraceRow row;
        row.tick = tick_;

        for (std::size_t k = 0; k < events_.size(); ++k) {
            if (fired_[k] || !due(events_[k])) continue;
            fired_[k] = true;
            if (robots_.empty()) continue;
            apply_event(events_[k]);
            row.events.push_back(events_[k].describe());
        }
        if (robots_.empty()) {
            stop_ = StopReason::team_empty;
            row.objective = 0.0;
            row.lambda = lambda_of(machine_.state().block);
            trace_.rows.push_back(std::move(row));
            return trace_.rows.back();
        }

        for (auto& r : robots_) r.clear_mailbox();

        std::vector<Message> reports;
        for (const auto& r : robots_) reports.push_back(log(r.report_capability()));
        row.lambda = lambda_of(machine_.state().block);
        route(machine_.broadcast(reports));

        std::vector<Message> neighbor_msgs;
        for (auto& r : robots_) {
            for (auto& m : r.publish(env_, board_)) neighbor_msgs.push_back(std::move(m));
        }
        route(std::move(neighbor_msgs));

        std::vector<Message> signals;
        std::vector<Proposal> proposals;
        for (auto& r : robots_) {
            for (auto& m : r.tick()) signals.push_back(log(std::move(m)));
            proposals.push_back(r.last_proposal());
        }

        // Single-writer application of the round against one snapshot.
        const CapabilityProfile caps = capability_profile();
        const double before = objective_H(partition_, caps);
        RoundOutcome round = apply_round(env_, board_, partition_, caps, proposals, before);
        for (std::size_t k = 0; k < robots_.size(); ++k) {
            robots_[k].commit(round.generators[k], round.partition.cells[k]);
        }
        board_ = std::move(round.generators);
        partition_ = std::move(round.partition);
        objective_ = round.objective;
        if (!std::isfinite(objective_)) {
            throw Error(ErrorCode::numerical_failure, "objective is not finite at tick " + std::to_string(tick_));
        }

        const OperationalState before_state = machine_.operational_state();
        const auto notices = machine_.conclude(signals);
        for (const auto& m : notices) log(m);
        const OperationalState state = machine_.operational_state();
        for (auto& r : robots_) r.steer(state);
        if (before_state == OperationalState::initialing && state == OperationalState::patrolling) {
            trace_.convergence_ticks.push_back(tick_);
        }

        row.state = state;
        row.keep_converged = machine_.state().keep_converged;
        row.objective = objective_;
        for (std::size_t k = 0; k < robots_.size(); ++k) {
            const auto& r = robots_[k];
            row.robots.push_back({r.id(), partition_.cells[k].area, caps.normalized[k], r.generator().position,
                                  r.generator().weight, r.pose(), r.last_proposal().converged});
        }
        trace_.rows.push_back(std::move(row));
        ++tick_;
        return trace_.rows.back();
    }

    /// Runs until tick max_steps, the requested number of sustained
    /// convergences (0 = no such stop), or an empty team. May be resumed.
    StopReason run(long max_steps, int stop_after_convergences = 0,
                   const std::function<void(const Simulation&)>& observer = {})
    {
        if (stop_ != StopReason::team_empty) stop_ = StopReason::running;
        while (stop_ == StopReason::running) {
            if (tick_ >= max_steps) {
                stop_ = StopReason::max_steps;
                break;
            }
            const int before = convergence_count();
            step();
            if (observer) observer(*this);
            if (stop_after_convergences > 0 && convergence_count() > before &&
                convergence_count() >= stop_after_convergences) {
                stop_ = StopReason::converged;
            }
        }
        return stop_;
    }

    StopReason stop_reason() const { return stop_; }

private:
    void check_new_robot(int id, Point2 position, double capability) const
    {
        if (!is_finite(position) || !env_.contains(position)) {
            throw Error(ErrorCode::scenario, "robot " + std::to_string(id) + " starts outside the environment");
        }
        if (!std::isfinite(capability) || capability < 0.0) {
            throw Error(ErrorCode::scenario, "robot " + std::to_string(id) + " has an invalid capability");
        }
    }

    bool due(const TeamEvent& e) const
    {
        if (e.step) return *e.step == tick_;
        // fires on the tick after the k-th entry into patrolling
        return convergence_count() >= *e.after_convergence;
    }

    void sort_robots()
    {
        std::sort(robots_.begin(), robots_.end(), [](const RobotAgent& a, const RobotAgent& b) { return a.id() < b.id(); });
    }

    void rebuild_board()
    {
        board_.clear();
        for (const auto& r : robots_) board_.push_back(r.generator());
        if (board_.empty()) {
            partition_ = PartitionResult{};
            objective_ = 0.0;
            return;
        }
        partition_ = compute_power_partition(env_, board_);
        objective_ = objective_H(partition_, capability_profile());
    }

    Message log(Message m)
    {
        if (record_messages_) message_log_.push_back({tick_, m.sender, m.receiver, m.kind()});
        return m;
    }

    void route(std::vector<Message> msgs)
    {
        for (auto& m : msgs) {
            log(m);
            for (auto& r : robots_) {
                if (r.id() == m.receiver) {
                    r.deliver(std::move(m));
                    break;
                }
            }
        }
    }

    ConvexPolygon env_;
    SimulationParameters params_;
    SyncMachine machine_;
    std::vector<RobotAgent> robots_;
    std::vector<TeamEvent> events_;
    std::vector<bool> fired_;
    std::vector<Generator> board_;
    PartitionResult partition_;
    double objective_ = 0.0;
    long tick_ = 0;
    StopReason stop_ = StopReason::running;
    TraceLog trace_;
    bool record_messages_ = false;
    std::vector<MessageRecord> message_log_;
};

} // namespace hetcov
