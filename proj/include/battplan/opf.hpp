#pragma once

// Compiles a contiguous block of hours into a bounded-variable LP: DC power
// flow in the B-theta form, per-bus slack generation and load shed, and
// battery placement plus operation. The same builder produces the full
// extensive form (one period, no boundary) and the decomposed period
// subproblems (optionally with one extra state-of-charge column per
// candidate bus carrying the previous period's last hour).
//
// Column and row layouts are deterministic: first-stage columns first, then
// hour-major variable families; rows grouped by constraint family, then
// hour, then entity. Two builds from equal inputs are identical bit for bit.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "battplan/errors.hpp"
#include "battplan/lp.hpp"
#include "battplan/network.hpp"

namespace battplan {

struct BatteryConfig {
    double e_min = 0.0;           // p.u. storage floor per battery
    double e_max = 1.0;           // p.u. storage cap per battery
    double p_rate_min = 0.0;      // p.u./hour rate floor per battery
    double p_rate_max = 1.0;      // p.u./hour rate cap per battery
    double efficiency = 0.95;     // charge multiplier; discharge divides by it
    double carryover = 0.999958;  // hourly self-discharge retention
    double x_max = 4.0;           // batteries per bus
    double x_total = 10.0;        // batteries network-wide
    double e_initial = 0.0;       // total stored p.u. per candidate bus before hour 0
    std::map<std::string, double> e_initial_per_bus;
    bool integer_placement = false;
    bool terminal_at_least_initial = false;

    void validate() const
    {
        if (e_min > e_max)
            throw ValidationError("battery config: E_min > E_max");
        if (p_rate_min > p_rate_max)
            throw ValidationError("battery config: rate floor above rate cap");
        if (!(efficiency > 0.0) || efficiency > 1.0)
            throw ValidationError("battery config: efficiency outside (0, 1]");
        if (!(carryover > 0.0) || carryover > 1.0)
            throw ValidationError("battery config: carryover outside (0, 1]");
        if (x_max < 0.0 || x_max > x_total)
            throw ValidationError("battery config: needs 0 <= X_max <= X_total");
    }

    double initial_soc(const std::string& bus_id) const
    {
        auto it = e_initial_per_bus.find(bus_id);
        return it == e_initial_per_bus.end() ? e_initial : it->second;
    }
};

struct CostConfig {
    double k_loadshed = 20000.0;        // $ per p.u. unserved per hour
    double k_slack = 50.0 * 20000.0;    // $ per p.u. slack generation per hour
    double slack_upper = 10000.0;       // p.u. cap per bus slack injection

    void validate() const
    {
        if (!(k_loadshed > 0.0))
            throw ValidationError("cost config: load shed price must be positive");
        if (k_slack < k_loadshed)
            throw ValidationError("cost config: slack price below load shed price");
        if (slack_upper < 0.0)
            throw ValidationError("cost config: negative slack bound");
    }
};

struct PeriodSlice {
    int first_hour = 0;
    int n_hours = 0;
    bool has_left_boundary = false;
};

// Column lookup for one compiled period. Hour indices are relative to the
// slice; entity indices follow network order (candidates for battery
// families).
struct VarMap {
    int first_hour = 0;
    int n_hours = 0;
    std::vector<int> candidates;   // bus index per candidate
    std::vector<int> placement;    // column per candidate
    std::vector<int> boundary_soc; // column per candidate, -1 without left boundary
    std::vector<std::vector<int>> gen;        // [hour][generator]
    std::vector<std::vector<int>> slack;      // [hour][bus]
    std::vector<std::vector<int>> theta;      // [hour][bus]
    std::vector<std::vector<int>> shed;       // [hour][bus]
    std::vector<std::vector<int>> flow;       // [hour][line]
    std::vector<std::vector<int>> charge;     // [hour][candidate]
    std::vector<std::vector<int>> discharge;  // [hour][candidate]
    std::vector<std::vector<int>> soc;        // [hour][candidate]
};

struct PeriodSubproblem {
    StandardFormLP lp;
    VarMap vars;
    std::vector<int> first_stage_columns;  // placement columns, then boundary columns
};

namespace detail {

inline void check_affine_costs(const Network& net)
{
    for (const Generator& g : net.generators())
        for (std::size_t j = 2; j < g.cost_coeffs.size(); ++j)
            if (g.cost_coeffs[j] != 0.0)
                throw ValidationError("generator \"" + g.id +
                                      "\" has a nonzero cost term of degree " +
                                      std::to_string(j) + "; only affine costs are supported");
}

inline std::vector<std::vector<char>> off_flags(const Network& net,
                                                const DeenergizationSchedule& schedule,
                                                int first_hour, int n_hours)
{
    std::vector<std::vector<char>> off(n_hours, std::vector<char>(net.line_count(), 0));
    for (int t = 0; t < n_hours; ++t) {
        for (const std::string& id : schedule.off_lines(first_hour + t)) {
            int l = net.line_index(id);
            if (l < 0)
                throw ValidationError("de-energization schedule references unknown line \"" +
                                      id + "\"");
            off[t][l] = 1;
        }
    }
    return off;
}

} // namespace detail

inline PeriodSubproblem build_period_lp(const Network& net, const PeriodSlice& slice,
                                        const BatteryConfig& batt, const CostConfig& cost,
                                        const DeenergizationSchedule& schedule,
                                        const std::vector<std::vector<double>>& demand)
{
    batt.validate();
    cost.validate();
    detail::check_affine_costs(net);
    if (slice.n_hours < 1)
        throw ValidationError("period slice is empty");
    for (int n = 0; n < net.bus_count(); ++n)
        if (static_cast<int>(demand[n].size()) < slice.first_hour + slice.n_hours)
            throw ValidationError("demand series ends before the slice does");

    auto off = detail::off_flags(net, schedule, slice.first_hour, slice.n_hours);

    PeriodSubproblem out;
    StandardFormLP& lp = out.lp;
    VarMap& vm = out.vars;
    vm.first_hour = slice.first_hour;
    vm.n_hours = slice.n_hours;
    vm.candidates = net.candidate_buses();
    const int nc = static_cast<int>(vm.candidates.size());
    const double theta_box = 2.0 * std::numbers::pi;

    auto hour_tag = [](int t) { return "[t" + std::to_string(t) + "]"; };

    for (int c = 0; c < nc; ++c) {
        const std::string& id = net.buses()[vm.candidates[c]].id;
        vm.placement.push_back(lp.add_column("x[" + id + "]", 0.0, batt.x_max, 0.0));
    }
    vm.boundary_soc.assign(nc, -1);
    if (slice.has_left_boundary)
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            vm.boundary_soc[c] =
                lp.add_column("e0[" + id + "]", 0.0, batt.x_max * batt.e_max, 0.0);
        }
    out.first_stage_columns = vm.placement;
    if (slice.has_left_boundary)
        out.first_stage_columns.insert(out.first_stage_columns.end(), vm.boundary_soc.begin(),
                                       vm.boundary_soc.end());

    vm.gen.resize(slice.n_hours);
    vm.slack.resize(slice.n_hours);
    vm.theta.resize(slice.n_hours);
    vm.shed.resize(slice.n_hours);
    vm.flow.resize(slice.n_hours);
    vm.charge.resize(slice.n_hours);
    vm.discharge.resize(slice.n_hours);
    vm.soc.resize(slice.n_hours);

    double soc_floor = std::min(0.0, batt.x_max * batt.e_min);
    for (int t = 0; t < slice.n_hours; ++t) {
        int abs_t = slice.first_hour + t;
        std::string tag = hour_tag(abs_t);
        for (const Generator& g : net.generators()) {
            double c1 = g.cost_coeffs.size() > 1 ? g.cost_coeffs[1] : 0.0;
            vm.gen[t].push_back(lp.add_column("g[" + g.id + "]" + tag, g.g_min, g.g_max, c1));
        }
        for (const Bus& b : net.buses())
            vm.slack[t].push_back(
                lp.add_column("sl[" + b.id + "]" + tag, 0.0, cost.slack_upper, cost.k_slack));
        for (int n = 0; n < net.bus_count(); ++n) {
            bool ref = n == net.reference_bus();
            vm.theta[t].push_back(lp.add_column("th[" + net.buses()[n].id + "]" + tag,
                                                ref ? 0.0 : -theta_box, ref ? 0.0 : theta_box,
                                                0.0));
        }
        for (int n = 0; n < net.bus_count(); ++n)
            vm.shed[t].push_back(lp.add_column("ls[" + net.buses()[n].id + "]" + tag, 0.0,
                                               demand[n][abs_t], cost.k_loadshed));
        for (int l = 0; l < net.line_count(); ++l) {
            double cap = off[t][l] ? 0.0 : net.lines()[l].flow_limit;
            vm.flow[t].push_back(
                lp.add_column("f[" + net.lines()[l].id + "]" + tag, -cap, cap, 0.0));
        }
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            vm.charge[t].push_back(lp.add_column("pc[" + id + "]" + tag, 0.0,
                                                 batt.x_max * batt.p_rate_max, 0.0));
        }
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            vm.discharge[t].push_back(lp.add_column("pd[" + id + "]" + tag, 0.0,
                                                    batt.x_max * batt.p_rate_max, 0.0));
        }
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            vm.soc[t].push_back(
                lp.add_column("e[" + id + "]" + tag, soc_floor, batt.x_max * batt.e_max, 0.0));
        }
    }

    // Angle-difference window on energized lines.
    for (int t = 0; t < slice.n_hours; ++t) {
        std::string tag = hour_tag(slice.first_hour + t);
        for (int l = 0; l < net.line_count(); ++l) {
            if (off[t][l])
                continue;
            const Line& ln = net.lines()[l];
            int lo = lp.add_row("ang-lo[" + ln.id + "]" + tag, RowSense::GreaterEqual,
                                ln.angle_diff_min);
            lp.add_entry(lo, vm.theta[t][net.line_from(l)], 1.0);
            lp.add_entry(lo, vm.theta[t][net.line_to(l)], -1.0);
            int hi = lp.add_row("ang-hi[" + ln.id + "]" + tag, RowSense::LessEqual,
                                ln.angle_diff_max);
            lp.add_entry(hi, vm.theta[t][net.line_from(l)], 1.0);
            lp.add_entry(hi, vm.theta[t][net.line_to(l)], -1.0);
        }
    }

    // Flow definition on energized lines; de-energized flows are pinned to
    // zero by their column bounds and get no definition row.
    for (int t = 0; t < slice.n_hours; ++t) {
        std::string tag = hour_tag(slice.first_hour + t);
        for (int l = 0; l < net.line_count(); ++l) {
            if (off[t][l])
                continue;
            const Line& ln = net.lines()[l];
            int r = lp.add_row("flow[" + ln.id + "]" + tag, RowSense::Equal, 0.0);
            lp.add_entry(r, vm.flow[t][l], 1.0);
            lp.add_entry(r, vm.theta[t][net.line_from(l)], ln.susceptance);
            lp.add_entry(r, vm.theta[t][net.line_to(l)], -ln.susceptance);
        }
    }

    if (nc > 0) {
        int r = lp.add_row("cap", RowSense::LessEqual, batt.x_total);
        for (int c = 0; c < nc; ++c)
            lp.add_entry(r, vm.placement[c], 1.0);
    }

    // Stored energy recursion; hour 0 reads the boundary column or the
    // configured initial state.
    for (int t = 0; t < slice.n_hours; ++t) {
        std::string tag = hour_tag(slice.first_hour + t);
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            int r = lp.add_row("soc[" + id + "]" + tag, RowSense::Equal, 0.0);
            lp.add_entry(r, vm.soc[t][c], 1.0);
            lp.add_entry(r, vm.charge[t][c], -batt.efficiency);
            lp.add_entry(r, vm.discharge[t][c], 1.0 / batt.efficiency);
            if (t > 0)
                lp.add_entry(r, vm.soc[t - 1][c], -batt.carryover);
            else if (slice.has_left_boundary)
                lp.add_entry(r, vm.boundary_soc[c], -batt.carryover);
            else
                lp.rhs[r] = batt.carryover * batt.initial_soc(id);
        }
    }

    for (int t = 0; t < slice.n_hours; ++t) {
        std::string tag = hour_tag(slice.first_hour + t);
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            int lo = lp.add_row("soc-lo[" + id + "]" + tag, RowSense::GreaterEqual, 0.0);
            lp.add_entry(lo, vm.soc[t][c], 1.0);
            lp.add_entry(lo, vm.placement[c], -batt.e_min);
            int hi = lp.add_row("soc-hi[" + id + "]" + tag, RowSense::LessEqual, 0.0);
            lp.add_entry(hi, vm.soc[t][c], 1.0);
            lp.add_entry(hi, vm.placement[c], -batt.e_max);
        }
    }

    auto rate_rows = [&](const char* stem, const std::vector<std::vector<int>>& cols) {
        for (int t = 0; t < slice.n_hours; ++t) {
            std::string tag = hour_tag(slice.first_hour + t);
            for (int c = 0; c < nc; ++c) {
                const std::string& id = net.buses()[vm.candidates[c]].id;
                int lo = lp.add_row(std::string(stem) + "-lo[" + id + "]" + tag,
                                    RowSense::GreaterEqual, 0.0);
                lp.add_entry(lo, cols[t][c], 1.0);
                lp.add_entry(lo, vm.placement[c], -batt.p_rate_min);
                int hi = lp.add_row(std::string(stem) + "-hi[" + id + "]" + tag,
                                    RowSense::LessEqual, 0.0);
                lp.add_entry(hi, cols[t][c], 1.0);
                lp.add_entry(hi, vm.placement[c], -batt.p_rate_max);
            }
        }
    };
    rate_rows("chg", vm.charge);
    rate_rows("dis", vm.discharge);

    // Nodal balance: inflow - outflow + generation + slack + shed - charge
    // + discharge = demand.
    std::vector<int> cand_of_bus(net.bus_count(), -1);
    for (int c = 0; c < nc; ++c)
        cand_of_bus[vm.candidates[c]] = c;
    for (int t = 0; t < slice.n_hours; ++t) {
        int abs_t = slice.first_hour + t;
        std::string tag = hour_tag(abs_t);
        for (int n = 0; n < net.bus_count(); ++n) {
            int r = lp.add_row("bal[" + net.buses()[n].id + "]" + tag, RowSense::Equal,
                               demand[n][abs_t]);
            for (int l : net.lines_to(n))
                lp.add_entry(r, vm.flow[t][l], 1.0);
            for (int l : net.lines_from(n))
                lp.add_entry(r, vm.flow[t][l], -1.0);
            for (int g : net.generators_at(n))
                lp.add_entry(r, vm.gen[t][g], 1.0);
            lp.add_entry(r, vm.slack[t][n], 1.0);
            lp.add_entry(r, vm.shed[t][n], 1.0);
            if (int c = cand_of_bus[n]; c >= 0) {
                lp.add_entry(r, vm.charge[t][c], -1.0);
                lp.add_entry(r, vm.discharge[t][c], 1.0);
            }
        }
    }

    if (batt.terminal_at_least_initial && !slice.has_left_boundary) {
        int last = slice.n_hours - 1;
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[vm.candidates[c]].id;
            int r = lp.add_row("soc-end[" + id + "]", RowSense::GreaterEqual,
                               batt.initial_soc(id));
            lp.add_entry(r, vm.soc[last][c], 1.0);
        }
    }

    lp.validate();
    return out;
}

inline PeriodSubproblem build_extensive_form(const Network& net, int horizon_hours,
                                             const BatteryConfig& batt, const CostConfig& cost,
                                             const DeenergizationSchedule& schedule,
                                             const std::vector<std::vector<double>>& demand,
                                             int hour_cap = 2000)
{
    if (horizon_hours > hour_cap)
        throw GuardrailError(horizon_hours, hour_cap);
    PeriodSlice slice{0, horizon_hours, false};
    return build_period_lp(net, slice, batt, cost, schedule, demand);
}

// Stored-energy recursion applied forward from a starting state.
inline std::vector<double> soc_trajectory(const std::vector<double>& charge,
                                          const std::vector<double>& discharge, double e_start,
                                          const BatteryConfig& batt)
{
    if (charge.size() != discharge.size())
        throw ValidationError("charge and discharge series differ in length");
    std::vector<double> out(charge.size());
    double e = e_start;
    for (std::size_t t = 0; t < charge.size(); ++t) {
        e = batt.carryover * e + batt.efficiency * charge[t] -
            discharge[t] / batt.efficiency;
        out[t] = e;
    }
    return out;
}

struct CostBreakdown {
    double generation = 0.0;
    double loadshed = 0.0;
    double slack = 0.0;
    double total = 0.0;
};

struct PlanningSolution {
    int first_hour = 0;
    std::vector<int> candidates;                 // bus index per candidate
    std::vector<double> placement;               // per candidate
    std::vector<double> initial_soc;             // per candidate, state before first hour
    std::vector<std::vector<double>> gen;        // [hour][generator]
    std::vector<std::vector<double>> slack;      // [hour][bus]
    std::vector<std::vector<double>> theta;      // [hour][bus]
    std::vector<std::vector<double>> shed;       // [hour][bus]
    std::vector<std::vector<double>> flow;       // [hour][line]
    std::vector<std::vector<double>> charge;     // [hour][candidate]
    std::vector<std::vector<double>> discharge;  // [hour][candidate]
    std::vector<std::vector<double>> soc;        // [hour][candidate]
    CostBreakdown cost;

    int hours() const { return static_cast<int>(gen.size()); }
};

inline CostBreakdown evaluate_cost(const PlanningSolution& sol, const Network& net,
                                   const CostConfig& cost)
{
    detail::check_affine_costs(net);
    CostBreakdown out;
    for (int t = 0; t < sol.hours(); ++t) {
        for (int g = 0; g < net.generator_count(); ++g) {
            const auto& coeffs = net.generators()[g].cost_coeffs;
            out.generation += coeffs[0];
            if (coeffs.size() > 1)
                out.generation += coeffs[1] * sol.gen[t][g];
        }
        for (int n = 0; n < net.bus_count(); ++n) {
            out.loadshed += cost.k_loadshed * sol.shed[t][n];
            out.slack += cost.k_slack * sol.slack[t][n];
        }
    }
    out.total = out.generation + out.loadshed + out.slack;
    return out;
}

inline PlanningSolution extract_solution(const PeriodSubproblem& sub,
                                         const std::vector<double>& x, const Network& net,
                                         const BatteryConfig& batt, const CostConfig& cost)
{
    const VarMap& vm = sub.vars;
    PlanningSolution sol;
    sol.first_hour = vm.first_hour;
    sol.candidates = vm.candidates;
    const int nc = static_cast<int>(vm.candidates.size());
    for (int c = 0; c < nc; ++c)
        sol.placement.push_back(x[vm.placement[c]]);
    for (int c = 0; c < nc; ++c)
        sol.initial_soc.push_back(vm.boundary_soc[c] >= 0
                                      ? x[vm.boundary_soc[c]]
                                      : batt.initial_soc(net.buses()[vm.candidates[c]].id));
    auto pull = [&](const std::vector<std::vector<int>>& cols) {
        std::vector<std::vector<double>> v(vm.n_hours);
        for (int t = 0; t < vm.n_hours; ++t) {
            v[t].reserve(cols[t].size());
            for (int j : cols[t])
                v[t].push_back(x[j]);
        }
        return v;
    };
    sol.gen = pull(vm.gen);
    sol.slack = pull(vm.slack);
    sol.theta = pull(vm.theta);
    sol.shed = pull(vm.shed);
    sol.flow = pull(vm.flow);
    sol.charge = pull(vm.charge);
    sol.discharge = pull(vm.discharge);
    sol.soc = pull(vm.soc);
    sol.cost = evaluate_cost(sol, net, cost);
    return sol;
}

struct Violation {
    std::string tag;
    int hour = -1;          // absolute hour, -1 for horizon-wide checks
    std::string entity;
    double amount = 0.0;    // magnitude of the violation

    std::string describe() const
    {
        std::string s = tag;
        if (!entity.empty())
            s += " " + entity;
        if (hour >= 0)
            s += " at hour " + std::to_string(hour);
        s += " by " + format_double(amount);
        return s;
    }
};

struct FeasibilityReport {
    std::vector<Violation> violations;
    std::vector<Violation> notes;  // informational, not feasibility failures

    bool clean() const { return violations.empty(); }
};

// Independent re-check of every model constraint against a solution. Kept
// free of the LP builder so tests can use it as a second opinion.
inline FeasibilityReport check_feasibility(const PlanningSolution& sol, const Network& net,
                                           const BatteryConfig& batt, const CostConfig& cost,
                                           const DeenergizationSchedule& schedule,
                                           const std::vector<std::vector<double>>& demand,
                                           double tol = 1e-6)
{
    FeasibilityReport report;
    auto flag = [&](const char* tag, int hour, const std::string& entity, double amount) {
        if (amount > tol)
            report.violations.push_back({tag, hour, entity, amount});
    };

    const int nc = static_cast<int>(sol.candidates.size());
    double placed = 0.0;
    for (int c = 0; c < nc; ++c) {
        const std::string& id = net.buses()[sol.candidates[c]].id;
        flag("placement-bus-cap", -1, id,
             std::max(sol.placement[c] - batt.x_max, -sol.placement[c]));
        placed += sol.placement[c];
    }
    if (nc > 0)
        flag("placement-total-cap", -1, "", placed - batt.x_total);

    auto off = detail::off_flags(net, schedule, sol.first_hour, sol.hours());
    std::vector<int> cand_of_bus(net.bus_count(), -1);
    for (int c = 0; c < nc; ++c)
        cand_of_bus[sol.candidates[c]] = c;

    for (int t = 0; t < sol.hours(); ++t) {
        int abs_t = sol.first_hour + t;
        for (int g = 0; g < net.generator_count(); ++g) {
            const Generator& gen = net.generators()[g];
            flag("gen-limits", abs_t, gen.id,
                 std::max(sol.gen[t][g] - gen.g_max, gen.g_min - sol.gen[t][g]));
        }
        for (int n = 0; n < net.bus_count(); ++n) {
            const std::string& id = net.buses()[n].id;
            flag("slack-limits", abs_t, id,
                 std::max(sol.slack[t][n] - cost.slack_upper, -sol.slack[t][n]));
            flag("shed-limits", abs_t, id,
                 std::max(sol.shed[t][n] - demand[n][abs_t], -sol.shed[t][n]));
        }
        flag("reference-angle", abs_t, net.reference_bus_id(),
             std::abs(sol.theta[t][net.reference_bus()]));
        for (int l = 0; l < net.line_count(); ++l) {
            const Line& ln = net.lines()[l];
            double f = sol.flow[t][l];
            if (off[t][l]) {
                flag("off-line-flow", abs_t, ln.id, std::abs(f));
                continue;
            }
            double diff = sol.theta[t][net.line_from(l)] - sol.theta[t][net.line_to(l)];
            flag("angle-limits", abs_t, ln.id,
                 std::max(diff - ln.angle_diff_max, ln.angle_diff_min - diff));
            flag("flow-definition", abs_t, ln.id, std::abs(f + ln.susceptance * diff));
            flag("flow-limit", abs_t, ln.id, std::abs(f) - ln.flow_limit);
        }
        for (int n = 0; n < net.bus_count(); ++n) {
            double lhs = sol.slack[t][n] + sol.shed[t][n];
            for (int l : net.lines_to(n))
                lhs += sol.flow[t][l];
            for (int l : net.lines_from(n))
                lhs -= sol.flow[t][l];
            for (int g : net.generators_at(n))
                lhs += sol.gen[t][g];
            if (int c = cand_of_bus[n]; c >= 0)
                lhs += sol.discharge[t][c] - sol.charge[t][c];
            flag("power-balance", abs_t, net.buses()[n].id,
                 std::abs(lhs - demand[n][abs_t]));
        }
        for (int c = 0; c < nc; ++c) {
            const std::string& id = net.buses()[sol.candidates[c]].id;
            double x = sol.placement[c];
            double prev = t > 0 ? sol.soc[t - 1][c] : sol.initial_soc[c];
            double expect = batt.carryover * prev + batt.efficiency * sol.charge[t][c] -
                            sol.discharge[t][c] / batt.efficiency;
            flag("soc-recursion", abs_t, id, std::abs(sol.soc[t][c] - expect));
            flag("soc-bounds", abs_t, id,
                 std::max(sol.soc[t][c] - x * batt.e_max, x * batt.e_min - sol.soc[t][c]));
            flag("charge-rate", abs_t, id,
                 std::max(sol.charge[t][c] - x * batt.p_rate_max,
                          x * batt.p_rate_min - sol.charge[t][c]));
            flag("discharge-rate", abs_t, id,
                 std::max(sol.discharge[t][c] - x * batt.p_rate_max,
                          x * batt.p_rate_min - sol.discharge[t][c]));
            if (sol.charge[t][c] > tol && sol.discharge[t][c] > tol)
                report.notes.push_back({"simultaneous-charge-discharge", abs_t, id,
                                        std::min(sol.charge[t][c], sol.discharge[t][c])});
        }
    }

    return report;
}

} // namespace battplan
