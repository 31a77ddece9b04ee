#pragma once

// Convenience layer tying the period builder to the solver: one-call
// extensive-form solves and the exhaustive integer-placement mode.

#include <string>
#include <vector>

#include "battplan/opf.hpp"
#include "battplan/simplex.hpp"

namespace battplan {

struct EfResult {
    SolveStatus status = SolveStatus::IterationLimit;
    PlanningSolution solution;  // meaningful when status == Optimal
    double objective = 0.0;
    long iterations = 0;
};

inline EfResult solve_extensive_form(const Network& net, int horizon_hours,
                                     const BatteryConfig& batt, const CostConfig& cost,
                                     const DeenergizationSchedule& schedule,
                                     const std::vector<std::vector<double>>& demand,
                                     const SolverOptions& opts = {}, int hour_cap = 2000)
{
    PeriodSubproblem sub =
        build_extensive_form(net, horizon_hours, batt, cost, schedule, demand, hour_cap);
    LPSolution sol = solve_lp(sub.lp, opts);
    EfResult out;
    out.status = sol.status;
    out.objective = sol.objective;
    out.iterations = sol.iterations;
    if (sol.status == SolveStatus::Optimal)
        out.solution = extract_solution(sub, sol.x, net, batt, cost);
    return out;
}

// Integer placements solved by exhaustive enumeration over candidate
// assignments, warm-starting each fix from the previous optimum. Viable for
// a handful of candidate buses only.
inline EfResult solve_integer_placement(const Network& net, int horizon_hours,
                                        const BatteryConfig& batt, const CostConfig& cost,
                                        const DeenergizationSchedule& schedule,
                                        const std::vector<std::vector<double>>& demand,
                                        const SolverOptions& base_opts = {}, int hour_cap = 2000)
{
    const int nc = static_cast<int>(net.candidate_buses().size());
    if (nc > 6)
        throw ValidationError("integer placement enumerates assignments and supports at most "
                              "6 candidate buses; this network has " + std::to_string(nc));
    PeriodSubproblem sub =
        build_extensive_form(net, horizon_hours, batt, cost, schedule, demand, hour_cap);

    int level_cap = static_cast<int>(std::floor(batt.x_max + 1e-9));
    std::vector<int> levels(nc, 0);
    EfResult best;
    bool have_best = false;
    Basis warm;
    bool more = true;
    while (more) {
        int total = 0;
        for (int v : levels)
            total += v;
        if (total <= batt.x_total + 1e-9) {
            for (int c = 0; c < nc; ++c) {
                int col = sub.vars.placement[c];
                sub.lp.col_lower[col] = levels[c];
                sub.lp.col_upper[col] = levels[c];
            }
            SolverOptions opts = base_opts;
            LPSolution sol = warm.empty() ? solve_lp(sub.lp, opts) : warm_solve(sub.lp, warm, opts);
            best.iterations += sol.iterations;
            if (sol.status == SolveStatus::Optimal) {
                warm = sol.basis;
                if (!have_best || sol.objective < best.objective) {
                    have_best = true;
                    best.status = sol.status;
                    best.objective = sol.objective;
                    best.solution = extract_solution(sub, sol.x, net, batt, cost);
                }
            }
        }
        // next assignment, lexicographic
        int c = nc - 1;
        while (c >= 0 && levels[c] == level_cap)
            levels[c--] = 0;
        if (c < 0)
            more = false;
        else
            ++levels[c];
    }
    if (!have_best)
        best.status = SolveStatus::Infeasible;
    return best;
}

} // namespace battplan
