// Command-line front end for batch planning studies: solve the whole horizon
// directly (solve-ef), solve it decomposed with progressive hedging
// (solve-ph), re-check a written solution against the model (validate),
// export subproblems for external solvers (export-mps), and aggregate a
// solution into a per-hour report (report).
//
// Exit codes: 0 success; 1 I/O or malformed input; 2 extensive form not
// optimal; 3 horizon over the extensive-form guardrail; 4 iteration cap hit
// (artifacts still written); 5 subproblem solver failure; 6 validation found
// violations.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "battplan/config.hpp"
#include "battplan/mps.hpp"
#include "battplan/ph.hpp"
#include "battplan/solution_io.hpp"
#include "battplan/solve.hpp"

namespace {

using namespace battplan;

struct Overrides {
    std::string config_path;
    std::optional<double> threshold;
    std::optional<int> periods;
    std::optional<int> period_hours;
    std::optional<int> workers;
    std::optional<double> rho;
    std::optional<int> max_iters;
    std::optional<double> tol;
    std::optional<std::string> out;
};

void add_common_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "Run configuration JSON file");
    cmd->add_option("--threshold", o.threshold,
                    "De-energize lines whose daily risk exceeds this");
    cmd->add_option("--periods", o.periods, "Partition the horizon into this many periods");
    cmd->add_option("--period-hours", o.period_hours, "Target hours per period");
    cmd->add_option("--workers", o.workers, "Worker threads for period solves");
    cmd->add_option("--rho", o.rho, "Hedging price step");
    cmd->add_option("--max-iters", o.max_iters, "Hedging iteration cap");
    cmd->add_option("--tol", o.tol, "Consensus residual tolerance");
    cmd->add_option("--out", o.out, "Output directory for artifacts");
}

// Flag > file > default.
RunConfig assemble(const Overrides& o)
{
    RunConfig cfg;
    if (!o.config_path.empty())
        cfg = run_config_from_file(o.config_path);
    if (o.threshold)
        cfg.threshold = *o.threshold;
    if (o.periods)
        cfg.periods = *o.periods;
    if (o.period_hours) {
        cfg.period_hours = *o.period_hours;
        if (!o.periods)
            cfg.periods = 0;  // an explicit length overrides a configured count
    }
    if (o.workers)
        cfg.workers = *o.workers;
    if (o.rho)
        cfg.ph.rho = *o.rho;
    if (o.max_iters)
        cfg.ph.max_iterations = *o.max_iters;
    if (o.tol)
        cfg.ph.tol = *o.tol;
    if (o.out)
        cfg.out_dir = *o.out;
    return cfg;
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg)
{
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory \"" + cfg.out_dir + "\": " +
                      ec.message());
    return dir;
}

const char* status_name(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "stopped at the iteration limit";
    }
}

void write_solution_artifacts(const std::filesystem::path& dir, const char* stem,
                              const PlanningSolution& sol, const Network& net)
{
    write_text_file((dir / (std::string(stem) + ".json")).string(),
                    solution_to_json(sol, net).dump(2) + "\n");
    write_text_file((dir / (std::string(stem) + ".csv")).string(),
                    solution_to_csv(sol, net));
}

int cmd_solve_ef(const RunConfig& cfg)
{
    Instance inst = load_instance(cfg);
    EfResult r = cfg.battery.integer_placement
                     ? solve_integer_placement(inst.net, inst.horizon, cfg.battery, cfg.cost,
                                               inst.schedule, inst.demand, {}, cfg.ef_hour_cap)
                     : solve_extensive_form(inst.net, inst.horizon, cfg.battery, cfg.cost,
                                            inst.schedule, inst.demand, {}, cfg.ef_hour_cap);
    if (r.status != SolveStatus::Optimal) {
        std::cerr << "extensive form " << status_name(r.status) << "\n";
        return 2;
    }
    auto dir = ensure_out_dir(cfg);
    write_solution_artifacts(dir, "solution", r.solution, inst.net);
    write_text_file((dir / "cost.json").string(), cost_to_json(r.solution.cost).dump(2) + "\n");
    std::cout << "optimal, total cost " << format_double(r.solution.cost.total) << " over "
              << inst.horizon << " h; artifacts in " << dir.string() << "\n";
    return 0;
}

int cmd_solve_ph(const RunConfig& cfg, const std::string& resume_path)
{
    Instance inst = load_instance(cfg);
    ScenarioPartition part = partition_for(cfg, inst.horizon);
    const int periods = static_cast<int>(part.periods.size());
    WorkPlan plan = work_plan_for(cfg, periods);
    auto dir = ensure_out_dir(cfg);

    PHOptions opts = cfg.ph;
    PHState resumed;
    if (!resume_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(resume_path));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("checkpoint \"" + resume_path + "\": " + e.what());
        }
        resumed = checkpoint_from_json(j);
        opts.resume = &resumed;
    }

    std::ofstream trace((dir / "trace.jsonl").string(), std::ios::binary | std::ios::trunc);
    if (!trace)
        throw IoError("cannot open trace file in \"" + dir.string() + "\"");
    opts.on_iteration = [&trace](const IterationStat& s) {
        trace << to_json(s).dump() << "\n";
        trace.flush();
    };

    PHResult r = run_ph(inst.net, part, cfg.battery, cfg.cost, inst.schedule, inst.demand,
                        opts, plan);

    write_text_file((dir / "checkpoint.json").string(),
                    checkpoint_to_json(r.state).dump(2) + "\n");
    if (r.has_incumbent)
        write_solution_artifacts(dir, "incumbent", r.incumbent, inst.net);

    nlohmann::ordered_json summary;
    summary["converged"] = r.converged;
    summary["iterations"] = r.iterations;
    summary["residual"] = r.residual;
    summary["lb"] = r.lb > -kInf ? nlohmann::ordered_json(r.lb) : nlohmann::ordered_json(nullptr);
    summary["ub"] = r.ub < kInf ? nlohmann::ordered_json(r.ub) : nlohmann::ordered_json(nullptr);
    summary["gap"] = r.gap < kInf ? nlohmann::ordered_json(r.gap) : nlohmann::ordered_json(nullptr);
    summary["incumbents_rejected"] = r.incumbents_rejected;
    summary["max_weight_gap"] = r.max_weight_gap;
    summary["periods"] = periods;
    summary["workers"] = cfg.workers;
    summary["policy"] = to_string(cfg.policy);
    summary["wall_ms"] = r.wall_ms;
    write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");

    const bool good = r.converged || r.gap <= cfg.gap_target;
    std::cout << (good ? "done" : "iteration cap") << ": " << r.iterations
              << " iterations, residual " << format_double(r.residual) << ", gap "
              << (r.gap < kInf ? format_double(r.gap) : "open") << "; artifacts in "
              << dir.string() << "\n";
    return good ? 0 : 4;
}

int cmd_validate(const RunConfig& cfg, const std::string& solution_path)
{
    Instance inst = load_instance(cfg);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(solution_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("solution \"" + solution_path + "\": " + e.what());
    }
    PlanningSolution sol = solution_from_json(j, inst.net);
    if (sol.first_hour + sol.hours() > inst.horizon)
        throw ValidationError("solution spans hours " + std::to_string(sol.first_hour) +
                              ".." + std::to_string(sol.first_hour + sol.hours()) +
                              " but the instance has " + std::to_string(inst.horizon));
    FeasibilityReport rep = check_feasibility(sol, inst.net, cfg.battery, cfg.cost,
                                              inst.schedule, inst.demand);
    for (const Violation& v : rep.violations)
        std::cout << "violation: " << v.describe() << "\n";
    for (const Violation& v : rep.notes)
        std::cout << "note: " << v.describe() << "\n";
    if (rep.clean()) {
        std::cout << "clean: " << sol.hours() << " h re-checked, no violations\n";
        return 0;
    }
    std::cout << rep.violations.size() << " violation(s)\n";
    return 6;
}

int cmd_export_mps(const RunConfig& cfg, bool split)
{
    Instance inst = load_instance(cfg);
    auto dir = ensure_out_dir(cfg);
    if (!split) {
        PeriodSubproblem ef = build_extensive_form(inst.net, inst.horizon, cfg.battery,
                                                   cfg.cost, inst.schedule, inst.demand,
                                                   cfg.ef_hour_cap);
        write_text_file((dir / "ef.mps").string(), write_mps(ef.lp));
        std::cout << "wrote " << (dir / "ef.mps").string() << "\n";
        return 0;
    }
    ScenarioPartition part = partition_for(cfg, inst.horizon);
    for (std::size_t p = 0; p < part.periods.size(); ++p) {
        PeriodSubproblem sub = build_period_lp(inst.net, part.periods[p], cfg.battery,
                                               cfg.cost, inst.schedule, inst.demand);
        std::string name = "period_" + std::to_string(p) + ".mps";
        write_text_file((dir / name).string(), write_mps(sub.lp));
    }
    std::cout << "wrote " << part.periods.size() << " period files in " << dir.string()
              << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& solution_path)
{
    Instance inst = load_instance(cfg);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(solution_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("solution \"" + solution_path + "\": " + e.what());
    }
    PlanningSolution sol = solution_from_json(j, inst.net);
    auto dir = ensure_out_dir(cfg);
    write_text_file((dir / "report.csv").string(), shed_discharge_csv(sol));
    std::cout << "placement:";
    for (std::size_t c = 0; c < sol.candidates.size(); ++c)
        if (sol.placement[c] > 1e-9)
            std::cout << " " << inst.net.buses()[sol.candidates[c]].id << "="
                      << format_double(sol.placement[c]);
    std::cout << "\ncost: generation " << format_double(sol.cost.generation) << ", load shed "
              << format_double(sol.cost.loadshed) << ", slack " << format_double(sol.cost.slack)
              << ", total " << format_double(sol.cost.total) << "\n";
    std::cout << "wrote " << (dir / "report.csv").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Battery siting and operation planning under wildfire de-energization"};
    app.require_subcommand(1);

    Overrides o;
    std::string solution_path;
    std::string resume_path;
    bool split = false;

    CLI::App* ef = app.add_subcommand("solve-ef", "Solve the whole horizon as one LP");
    add_common_flags(ef, o);

    CLI::App* ph = app.add_subcommand("solve-ph", "Solve decomposed with progressive hedging");
    add_common_flags(ph, o);
    ph->add_option("--resume", resume_path, "Checkpoint JSON to resume from");

    CLI::App* val = app.add_subcommand("validate", "Re-check a solution file against the model");
    add_common_flags(val, o);
    val->add_option("solution", solution_path, "Solution JSON to validate")->required();

    CLI::App* exp = app.add_subcommand("export-mps", "Write the model as MPS files");
    add_common_flags(exp, o);
    exp->add_flag("--split", split, "One file per period instead of the extensive form");

    CLI::App* rep = app.add_subcommand("report", "Aggregate a solution into a per-hour CSV");
    add_common_flags(rep, o);
    rep->add_option("solution", solution_path, "Solution JSON to aggregate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = assemble(o);
        if (ef->parsed())
            return cmd_solve_ef(cfg);
        if (ph->parsed())
            return cmd_solve_ph(cfg, resume_path);
        if (val->parsed())
            return cmd_validate(cfg, solution_path);
        if (exp->parsed())
            return cmd_export_mps(cfg, split);
        if (rep->parsed())
            return cmd_report(cfg, solution_path);
    } catch (const GuardrailError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SubproblemFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
