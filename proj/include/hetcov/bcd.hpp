#pragma once

#include <hetcov/geometry.hpp>
#include <hetcov/objective.hpp>
#include <hetcov/power_diagram.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace hetcov {

/// Which block the current round optimizes (lambda = 1 for positions).
enum class Block : int { partition = 0, position = 1 };

enum class OperationalState { initialing, patrolling };

inline const char* to_string(OperationalState s)
{
    return s == OperationalState::patrolling ? "patrolling" : "initialing";
}

inline int lambda_of(Block b) { return static_cast<int>(b); }
inline Block other(Block b) { return b == Block::position ? Block::partition : Block::position; }

struct ConvergenceThresholds
{
    double position_eps = 1e-3;
    double weight_eps = 1e-2;
    int time_threshold = 100;
};

struct OptimizationState
{
    Block block = Block::position;
    long iteration = 0;             // number of block toggles
    std::vector<bool> converged;    // latest signal per robot
    int keep_converged = 0;
    int time_in_block = 0;
};

/// Synchronizer block switch: flip on unanimous convergence (counting it),
/// flip and forget on timeout, otherwise keep counting time.
inline OptimizationState toggle_policy(OptimizationState state, bool all_converged, const ConvergenceThresholds& th)
{
    if (all_converged) {
        state.block = other(state.block);
        state.keep_converged += 1;
        state.time_in_block = 0;
        state.iteration += 1;
        state.converged.assign(state.converged.size(), false);
    } else if (state.time_in_block >= th.time_threshold) {
        state.block = other(state.block);
        state.keep_converged = 0;
        state.time_in_block = 0;
        state.iteration += 1;
        state.converged.assign(state.converged.size(), false);
    } else {
        state.time_in_block += 1;
    }
    return state;
}

inline OperationalState operational_state(const OptimizationState& state)
{
    return state.keep_converged >= 2 ? OperationalState::patrolling : OperationalState::initialing;
}

struct Proposal
{
    Point2 position_step;
    double weight_step = 0.0;
    double magnitude = 0.0;
    bool converged = false;
};

/// One robot's update for the active block, computed from its local view only.
inline Proposal propose_update(const LocalView& view, const Cell& cell, Block block, const StepParameters& params,
                               const ConvergenceThresholds& th)
{
    Proposal p;
    if (block == Block::position) {
        if (!cell.empty()) {
            p.position_step =
                clamp_position_step(view, position_update(view.self.position, grad_position(view), cell, params));
        }
        p.magnitude = norm(p.position_step);
        p.converged = p.magnitude <= th.position_eps;
    } else {
        p.weight_step = clamp_weight_step(view, weight_update(grad_weight(view), params));
        p.magnitude = std::abs(p.weight_step);
        p.converged = p.magnitude <= th.weight_eps;
    }
    return p;
}

struct RoundOutcome
{
    std::vector<Generator> generators;
    PartitionResult partition;
    double objective = 0.0;
    std::vector<double> scales;   // fraction of each proposal applied
    int halvings = 0;             // backtracking iterations used
    bool rejected = false;        // nothing could be applied
};

inline constexpr int max_step_halvings = 20;

namespace detail {

/// Robots whose generator left its cell, plus the robots whose dominance evicted it.
inline std::vector<std::size_t> containment_offenders(const PartitionResult& before,
                                                      std::span<const Generator> old_gens,
                                                      const PartitionResult& after,
                                                      std::span<const Generator> new_gens)
{
    std::vector<bool> mark(new_gens.size(), false);
    for (std::size_t k = 0; k < new_gens.size(); ++k) {
        const Cell& was = before.cells[k];
        if (was.empty() || !was.polygon.contains(old_gens[k].position)) continue;
        const Cell& now = after.cells[k];
        if (!now.empty() && now.polygon.contains(new_gens[k].position)) continue;
        mark[k] = true;
        const double own = power_distance(new_gens[k], new_gens[k].position);
        for (std::size_t j = 0; j < new_gens.size(); ++j) {
            if (j != k && power_distance(new_gens[j], new_gens[k].position) < own + eps_geom) mark[j] = true;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < mark.size(); ++k) {
        if (mark[k]) out.push_back(k);
    }
    return out;
}

} // namespace detail

/// Applies all proposals together. Robots involved in a containment violation
/// have their own step halved (and dropped after max_step_halvings); an
/// objective increase halves every step. Gives up, leaving the configuration
/// unchanged, after max_step_halvings global halvings.
inline RoundOutcome apply_round(const ConvexPolygon& env, std::span<const Generator> generators,
                                const PartitionResult& partition, const CapabilityProfile& caps,
                                std::span<const Proposal> proposals, double objective_before)
{
    const std::size_t n = generators.size();
    RoundOutcome out;
    out.scales.assign(n, 1.0);
    std::vector<int> own_halvings(n, 0);
    int global_halvings = 0;

    auto keep_current = [&] {
        out.generators.assign(generators.begin(), generators.end());
        out.partition = partition;
        out.objective = objective_before;
    };
    auto any_motion = [&] {
        for (std::size_t k = 0; k < n; ++k) {
            if (out.scales[k] != 0.0 && (proposals[k].position_step != Point2{} || proposals[k].weight_step != 0.0)) {
                return true;
            }
        }
        return false;
    };
    auto halve_all = [&] {
        for (auto& s : out.scales) s *= 0.5;
        ++global_halvings;
    };

    while (true) {
        if (!any_motion()) {
            keep_current();
            out.rejected = true;
            out.scales.assign(n, 0.0);
            return out;
        }
        if (global_halvings > max_step_halvings) break;

        std::vector<Generator> cand(generators.begin(), generators.end());
        for (std::size_t k = 0; k < n; ++k) {
            cand[k].position += out.scales[k] * proposals[k].position_step;
            cand[k].weight += out.scales[k] * proposals[k].weight_step;
        }
        ++out.halvings;
        PartitionResult next;
        try {
            next = compute_power_partition(env, cand);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_configuration) throw;
            halve_all();
            continue;
        }
        const auto offenders = detail::containment_offenders(partition, generators, next, cand);
        if (!offenders.empty()) {
            for (std::size_t k : offenders) {
                if (++own_halvings[k] > max_step_halvings) out.scales[k] = 0.0;
                else out.scales[k] *= 0.5;
            }
            continue;
        }
        const double h_next = objective_H(next, caps);
        if (!(h_next <= objective_before)) {
            halve_all();
            continue;
        }
        out.generators = std::move(cand);
        out.partition = std::move(next);
        out.objective = h_next;
        --out.halvings;
        return out;
    }
    keep_current();
    out.rejected = true;
    out.scales.assign(n, 0.0);
    return out;
}

struct BlockStepResult
{
    RoundOutcome round;
    GradientReport report;            // at the configuration before the step
    std::vector<Proposal> proposals;
    OptimizationState state;          // converged flags refreshed
    bool all_converged = false;
};

/// One synchronous round of the active block: every robot proposes from the
/// same snapshot, then the round is applied at once.
inline BlockStepResult optimize_block_step(const OptimizationState& state, std::span<const Generator> generators,
                                           const CapabilityProfile& caps, const ConvexPolygon& env,
                                           std::span<const StepParameters> params, const ConvergenceThresholds& th)
{
    const PartitionResult partition = compute_power_partition(env, generators);
    BlockStepResult res;
    res.report = gradient_report(partition, caps, generators);
    res.state = state;
    res.state.converged.assign(generators.size(), false);
    res.all_converged = true;
    for (std::size_t k = 0; k < generators.size(); ++k) {
        const LocalView view = make_local_view(partition, caps, generators, k);
        res.proposals.push_back(propose_update(view, partition.cells[k], state.block, params[k], th));
        res.state.converged[k] = res.proposals.back().converged;
        res.all_converged = res.all_converged && res.proposals.back().converged;
    }
    res.round = apply_round(env, generators, partition, caps, res.proposals, res.report.objective);
    return res;
}

inline BlockStepResult optimize_block_step(const OptimizationState& state, std::span<const Generator> generators,
                                           const CapabilityProfile& caps, const ConvexPolygon& env,
                                           const StepParameters& params, const ConvergenceThresholds& th)
{
    const std::vector<StepParameters> all(generators.size(), params);
    return optimize_block_step(state, generators, caps, env, all, th);
}

} // namespace hetcov
