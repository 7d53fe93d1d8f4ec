#include <hetcov/io.hpp>
#include <hetcov/scenario.hpp>
#include <hetcov/simulation.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr int exit_scenario = 2;
constexpr int exit_numerical = 3;

struct RunOptions
{
    std::string scenario;
    std::string out_dir;
    std::optional<long> max_steps;
    std::optional<std::uint64_t> seed;
    std::optional<long> snapshot_every;
};

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

void write_snapshot(const fs::path& dir, const hetcov::Simulation& sim)
{
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06ld.svg", sim.tick());
    auto out = open_out(dir / name);
    hetcov::write_svg(out, sim);
}

void write_outputs(const fs::path& dir, const hetcov::Simulation& sim, std::uint64_t seed)
{
    {
        auto out = open_out(dir / "trace.csv");
        hetcov::write_trace(out, sim.trace());
    }
    {
        auto out = open_out(dir / "partition.txt");
        hetcov::write_partition(out, sim.partition(), sim.board());
    }
    {
        auto out = open_out(dir / "summary.json");
        out << hetcov::to_json(hetcov::summarize(sim, seed)).dump(2) << '\n';
    }
}

int run(const RunOptions& opt)
{
    hetcov::ScenarioScript script;
    std::optional<hetcov::Simulation> sim;
    try {
        script = hetcov::load_scenario(opt.scenario);
        if (opt.seed) script.parameters.seed = *opt.seed;
        if (opt.max_steps) script.parameters.max_steps = *opt.max_steps;
        if (opt.snapshot_every) script.parameters.snapshot_every = *opt.snapshot_every;
        sim.emplace(hetcov::make_simulation(script));
    } catch (const hetcov::Error& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario;
    }

    const fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory " << dir << ": " << ec.message() << '\n';
        return exit_scenario;
    }

    const auto& p = script.parameters;
    write_snapshot(dir, *sim);
    long last_snapshot = sim->tick();
    try {
        sim->run(p.max_steps, p.stop_after_convergences, [&](const hetcov::Simulation& s) {
            if (p.snapshot_every > 0 && s.tick() % p.snapshot_every == 0) {
                write_snapshot(dir, s);
                last_snapshot = s.tick();
            }
        });
    } catch (const hetcov::Error& e) {
        const long last_good = sim->trace().rows.empty() ? -1 : sim->trace().rows.back().tick;
        std::cerr << "numerical failure at tick " << sim->tick() << " (last good tick " << last_good
                  << "): " << e.what() << '\n';
        try {
            auto out = open_out(dir / "trace.csv");
            hetcov::write_trace(out, sim->trace());
        } catch (const std::exception&) {
        }
        return exit_numerical;
    }
    if (sim->tick() != last_snapshot) write_snapshot(dir, *sim);
    write_outputs(dir, *sim, p.seed);

    const auto summary = hetcov::summarize(*sim, p.seed);
    std::cout << "ticks " << summary.ticks << ", stop " << summary.stop_reason << ", H "
              << hetcov::format_number(summary.objective) << ", convergences " << summary.convergence_ticks.size()
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Capability-proportional area partitioning simulator"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace, snapshots and summary");
    run_cmd->add_option("--scenario", opt.scenario, "Scenario file")->required();
    run_cmd->add_option("--out-dir", opt.out_dir, "Output directory")->required();
    run_cmd->add_option("--max-steps", opt.max_steps, "Tick limit (overrides the scenario)")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--seed", opt.seed, "Placement seed (overrides the scenario)");
    run_cmd->add_option("--snapshot-every", opt.snapshot_every, "Snapshot period in ticks, 0 for first/last only")
        ->check(CLI::NonNegativeNumber);

    std::uint64_t gen_seed = 1;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-paper-scenario", "Write the built-in eight-robot scenario");
    gen_cmd->add_option("--seed", gen_seed, "Placement seed");
    gen_cmd->add_option("--output,-o", gen_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_scenario;
    }

    try {
        if (*run_cmd) return run(opt);
        const std::string text = hetcov::write_scenario(hetcov::gen_paper_scenario(gen_seed));
        if (gen_out.empty()) {
            std::cout << text;
        } else {
            auto out = open_out(gen_out);
            out << text;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
