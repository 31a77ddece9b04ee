#pragma once

// Temporal decomposition by progressive hedging. The horizon splits into
// contiguous periods that act as scenarios with uniform weight. Two variable
// classes must agree across periods: battery placement, owned by every
// period, and the stored energy at each period boundary, owned by the two
// adjacent periods with weight 0.5 each. Every iteration updates per-period
// prices from the consensus gap, re-solves the periods with those prices plus
// a piecewise-linear proximal penalty (so subproblems stay LPs), computes a
// Lagrangian lower bound, and stitches a feasible incumbent whose cost upper-
// bounds the extensive-form optimum.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "battplan/errors.hpp"
#include "battplan/opf.hpp"
#include "battplan/runtime.hpp"
#include "battplan/solve.hpp"
#include "battplan/util.hpp"

namespace battplan {

inline constexpr double kWeightConservationTol = 1e-10;

// A period subproblem that did not solve to optimality. run_ph aborts with
// the lowest failing period regardless of worker scheduling.
class SubproblemFailure : public std::runtime_error {
public:
    SubproblemFailure(int period_, SolveStatus status_, const std::string& context)
        : std::runtime_error("period " + std::to_string(period_) + ": " + context +
                             " solve ended " + to_string(status_)),
          period(period_),
          status(status_)
    {
    }
    int period;
    SolveStatus status;
};

// ---------------------------------------------------------------------------
// Partition

struct ScenarioPartition {
    std::vector<PeriodSlice> periods;
    std::vector<double> probability;  // uniform, kept explicit for reporting

    int horizon() const
    {
        if (periods.empty())
            return 0;
        return periods.back().first_hour + periods.back().n_hours;
    }
};

// Contiguous periods of the target length. Remainder hours are appended to
// the final periods one 24 h day at a time, walking backwards from the last
// period, with any sub-day leftover folded into the last period. A horizon
// shorter than the target collapses to a single period.
inline ScenarioPartition make_partition(int horizon_hours, int target_hours)
{
    if (horizon_hours < 1)
        throw ValidationError("horizon must cover at least one hour");
    if (target_hours < 1)
        throw ValidationError("target period length must be at least one hour");

    const int n = horizon_hours / target_hours;
    std::vector<int> length;
    if (n == 0) {
        length.push_back(horizon_hours);
    } else {
        length.assign(n, target_hours);
        const int rem = horizon_hours - n * target_hours;
        for (int i = 0; i < rem / 24; ++i)
            length[n - 1 - (i % n)] += 24;
        length[n - 1] += rem % 24;
    }

    ScenarioPartition part;
    int start = 0;
    for (std::size_t p = 0; p < length.size(); ++p) {
        part.periods.push_back({start, length[p], p > 0});
        start += length[p];
    }
    part.probability.assign(length.size(), 1.0 / static_cast<double>(length.size()));
    return part;
}

// ---------------------------------------------------------------------------
// First-stage variables

struct FirstStageVar {
    enum class Class { Placement, SocBoundary };
    Class cls = Class::Placement;
    int candidate = 0;  // index into the candidate list
    int boundary = -1;  // SocBoundary: boundary between periods `boundary` and `boundary`+1
    std::string name;
};

// Global first-stage variable list plus, per period, the local LP columns
// holding that period's copies and their consensus weights. Placement is
// copied into every period with weight 1/P; each boundary state is copied
// into its two neighbours with weight 0.5. The right-hand copy of a boundary
// is the owning period's final-hour SOC column, the left-hand copy is the
// next period's dedicated boundary column.
struct FirstStageMap {
    struct Owned {
        int var = 0;
        int col = 0;
        double weight = 0.0;
    };
    std::vector<FirstStageVar> vars;
    std::vector<std::vector<Owned>> owned;

    int count() const { return static_cast<int>(vars.size()); }
};

inline FirstStageMap map_first_stage(const std::vector<PeriodSubproblem>& subs,
                                     const Network& net)
{
    if (subs.empty())
        throw ValidationError("first-stage mapping needs at least one period");
    const int P = static_cast<int>(subs.size());
    const auto& cands = subs[0].vars.candidates;
    const int nc = static_cast<int>(cands.size());

    for (int p = 0; p < P; ++p) {
        const VarMap& vm = subs[p].vars;
        if (vm.candidates != cands)
            throw ValidationError("period " + std::to_string(p) +
                                  " disagrees on candidate buses");
        if (p > 0 && vm.first_hour != subs[p - 1].vars.first_hour + subs[p - 1].vars.n_hours)
            throw ValidationError("periods are not contiguous at period " + std::to_string(p));
        for (int c = 0; c < nc; ++c) {
            bool has = vm.boundary_soc[c] >= 0;
            if (has != (p > 0))
                throw ValidationError("period " + std::to_string(p) +
                                      (has ? " has an unexpected boundary column"
                                           : " is missing its boundary column"));
        }
    }

    FirstStageMap fs;
    fs.owned.resize(P);
    for (int c = 0; c < nc; ++c)
        fs.vars.push_back({FirstStageVar::Class::Placement, c, -1,
                           "x." + net.buses()[cands[c]].id});
    for (int b = 0; b + 1 < P; ++b)
        for (int c = 0; c < nc; ++c)
            fs.vars.push_back({FirstStageVar::Class::SocBoundary, c, b,
                               "soc." + net.buses()[cands[c]].id + ".end_of_p" +
                                   std::to_string(b)});

    const double placement_weight = 1.0 / static_cast<double>(P);
    auto boundary_var = [nc](int b, int c) { return nc + b * nc + c; };
    for (int p = 0; p < P; ++p) {
        const VarMap& vm = subs[p].vars;
        for (int c = 0; c < nc; ++c)
            fs.owned[p].push_back({c, vm.placement[c], placement_weight});
        if (p > 0)
            for (int c = 0; c < nc; ++c)
                fs.owned[p].push_back({boundary_var(p - 1, c), vm.boundary_soc[c], 0.5});
        if (p + 1 < P)
            for (int c = 0; c < nc; ++c)
                fs.owned[p].push_back({boundary_var(p, c), vm.soc[vm.n_hours - 1][c], 0.5});
    }
    return fs;
}

// Pulls the period's copies of the first-stage variables out of a full primal
// vector, aligned with fs.owned[period].
inline std::vector<double> owned_values(const std::vector<FirstStageMap::Owned>& owned,
                                        const std::vector<double>& x_full)
{
    std::vector<double> v(owned.size());
    for (std::size_t i = 0; i < owned.size(); ++i) {
        if (owned[i].col < 0 || owned[i].col >= static_cast<int>(x_full.size()))
            throw ValidationError("first-stage column out of range");
        v[i] = x_full[owned[i].col];
    }
    return v;
}

// Consensus: the weighted mean of every owner's copy, per variable. xs[p]
// must align with fs.owned[p].
inline std::vector<double> aggregate(const FirstStageMap& fs,
                                     const std::vector<std::vector<double>>& xs)
{
    if (xs.size() != fs.owned.size())
        throw ValidationError("aggregate needs one value vector per period");
    std::vector<double> xbar(fs.count(), 0.0);
    for (std::size_t p = 0; p < fs.owned.size(); ++p) {
        const auto& ow = fs.owned[p];
        if (xs[p].size() != ow.size())
            throw ValidationError("period " + std::to_string(p) +
                                  " first-stage values misaligned");
        for (std::size_t i = 0; i < ow.size(); ++i)
            xbar[ow[i].var] += ow[i].weight * xs[p][i];
    }
    return xbar;
}

// w <- w + rho (x - xbar), elementwise over each period's owned copies. The
// price step may differ by variable class.
inline void price_update(const FirstStageMap& fs, const std::vector<std::vector<double>>& xs,
                         const std::vector<double>& xbar, double rho_placement, double rho_soc,
                         std::vector<std::vector<double>>& w)
{
    if (xs.size() != fs.owned.size() || w.size() != fs.owned.size())
        throw ValidationError("price update needs one value and one price vector per period");
    for (std::size_t p = 0; p < fs.owned.size(); ++p) {
        const auto& ow = fs.owned[p];
        if (xs[p].size() != ow.size() || w[p].size() != ow.size())
            throw ValidationError("period " + std::to_string(p) + " price vectors misaligned");
        for (std::size_t i = 0; i < ow.size(); ++i) {
            double rho = fs.vars[ow[i].var].cls == FirstStageVar::Class::Placement
                             ? rho_placement
                             : rho_soc;
            w[p][i] += rho * (xs[p][i] - xbar[ow[i].var]);
        }
    }
}

// Weighted root-mean-square consensus gap over all (variable, owner) pairs,
// normalized by the variable count.
inline double residual(const FirstStageMap& fs, const std::vector<std::vector<double>>& xs,
                       const std::vector<double>& xbar)
{
    if (fs.count() == 0)
        return 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < fs.owned.size(); ++p) {
        const auto& ow = fs.owned[p];
        for (std::size_t i = 0; i < ow.size(); ++i) {
            double d = xs[p][i] - xbar[ow[i].var];
            sum += ow[i].weight * d * d;
        }
    }
    return std::sqrt(sum / fs.count());
}

// Largest |sum over owners of weight * w| across variables. Zero (up to
// roundoff) is an invariant of the price recurrence and the precondition for
// the Lagrangian bound.
inline double weight_conservation_gap(const FirstStageMap& fs,
                                      const std::vector<std::vector<double>>& w)
{
    std::vector<double> s(fs.count(), 0.0);
    for (std::size_t p = 0; p < fs.owned.size(); ++p) {
        const auto& ow = fs.owned[p];
        if (w[p].size() != ow.size())
            throw ValidationError("period " + std::to_string(p) + " price vector misaligned");
        for (std::size_t i = 0; i < ow.size(); ++i)
            s[ow[i].var] += ow[i].weight * w[p][i];
    }
    double worst = 0.0;
    for (double v : s)
        worst = std::max(worst, std::abs(v));
    return worst;
}

// ---------------------------------------------------------------------------
// Augmented subproblems

// One period's view of the prices: for each of its first-stage columns, the
// linear price, the consensus target, and the quadratic weight.
struct ScenarioPrices {
    std::vector<int> cols;
    std::vector<double> w;
    std::vector<double> xbar;
    std::vector<double> rho;
};

inline ScenarioPrices scenario_prices(const FirstStageMap& fs, int period,
                                      const std::vector<double>& w_p,
                                      const std::vector<double>& xbar, double rho_placement,
                                      double rho_soc)
{
    const auto& ow = fs.owned.at(period);
    if (w_p.size() != ow.size())
        throw ValidationError("price vector misaligned for period " + std::to_string(period));
    ScenarioPrices out;
    out.cols.reserve(ow.size());
    for (std::size_t i = 0; i < ow.size(); ++i) {
        out.cols.push_back(ow[i].col);
        out.w.push_back(w_p[i]);
        out.xbar.push_back(xbar.at(ow[i].var));
        out.rho.push_back(fs.vars[ow[i].var].cls == FirstStageVar::Class::Placement
                              ? rho_placement
                              : rho_soc);
    }
    return out;
}

// Copy of the period LP with only the linear price term added. Used for the
// Lagrangian bound, whose subproblems must not carry the proximal penalty.
inline StandardFormLP priced_subproblem(const PeriodSubproblem& sub,
                                        const ScenarioPrices& prices)
{
    StandardFormLP lp = sub.lp;
    for (std::size_t i = 0; i < prices.cols.size(); ++i) {
        if (!std::isfinite(prices.w[i]))
            throw ValidationError("non-finite price on column " +
                                  lp.col_names.at(prices.cols[i]));
        lp.objective.at(prices.cols[i]) += prices.w[i];
    }
    return lp;
}

// Copy of the period LP with the full progressive-hedging objective: the
// linear price term plus, per first-stage column, an epigraph variable over
// tangent cuts of (rho/2)(x - xbar)^2. Cuts are tangents at the centers of
// `breakpoints` uniform segments of [lo, up] (worst-case error rho/8 times
// the squared segment width) plus `ladder_depth` pairs of points closing in
// geometrically on xbar, so the penalty keeps resolving power near consensus
// as the gap shrinks. The epigraph variable's zero lower bound is the exact
// tangent at xbar itself. The cut count is fixed by the options, never by the
// data, so the LP shape is identical across iterations and bases stay
// warm-startable.
inline StandardFormLP augment_subproblem(const PeriodSubproblem& sub,
                                         const ScenarioPrices& prices, int breakpoints,
                                         int ladder_depth = 20)
{
    if (breakpoints < 0 || ladder_depth < 0)
        throw ValidationError("cut counts must be non-negative");
    StandardFormLP lp = sub.lp;
    for (std::size_t i = 0; i < prices.cols.size(); ++i) {
        const int j = prices.cols[i];
        const double xb = prices.xbar[i];
        const double rho = prices.rho[i];
        if (!std::isfinite(prices.w[i]) || !std::isfinite(xb))
            throw ValidationError("non-finite price data on column " + lp.col_names.at(j));
        lp.objective.at(j) += prices.w[i];
        if (rho <= 0.0)
            continue;

        const double lo = lp.col_lower[j];
        const double up = lp.col_upper[j];
        const double width = up - lo;
        if (!(width > 0.0))
            continue;  // fixed column, no deviation possible

        std::vector<double> points;
        for (int k = 0; k < breakpoints; ++k)
            points.push_back(lo + (k + 0.5) * width / breakpoints);
        const double range = std::max(up - xb, xb - lo);
        double step = range * 0.5;
        for (int k = 0; k < ladder_depth; ++k, step *= 0.5) {
            points.push_back(std::clamp(xb + step, lo, up));
            points.push_back(std::clamp(xb - step, lo, up));
        }

        const int z = lp.add_column("prox." + lp.col_names[j], 0.0, kInf, 1.0);
        for (std::size_t k = 0; k < points.size(); ++k) {
            const double slope = rho * (points[k] - xb);
            const double value = 0.5 * rho * (points[k] - xb) * (points[k] - xb);
            int r = lp.add_row("prox." + lp.col_names[j] + "." + std::to_string(k),
                               RowSense::GreaterEqual, value - slope * points[k]);
            lp.add_entry(r, z, 1.0);
            lp.add_entry(r, j, -slope);
        }
    }
    return lp;
}

// ---------------------------------------------------------------------------
// Bounds and incumbents

// Sum over periods of the optimal value with objective f_s + w_s^T x_s and no
// proximal term. Because the prices cancel across owners, any nonanticipative
// point scores the plain extensive-form cost under these objectives, so the
// sum of per-period minima bounds the extensive-form optimum from below.
inline double lagrangian_lower_bound(const std::vector<PeriodSubproblem>& subs,
                                     const FirstStageMap& fs,
                                     const std::vector<std::vector<double>>& w,
                                     const WorkPlan& plan, double rho_placement,
                                     double rho_soc, const SolverOptions& sopts = {},
                                     std::vector<Basis>* warm = nullptr)
{
    const int P = static_cast<int>(subs.size());
    if (weight_conservation_gap(fs, w) > kWeightConservationTol)
        throw ValidationError("prices do not cancel across owners; the bound would be invalid");

    // scenario_prices needs a consensus vector only for alignment; the priced
    // subproblem ignores it.
    const std::vector<double> zeros(fs.count(), 0.0);
    std::function<LPSolution(int)> task = [&](int p) {
        StandardFormLP lp = priced_subproblem(
            subs[p], scenario_prices(fs, p, w[p], zeros, rho_placement, rho_soc));
        SolverOptions so = sopts;
        if (warm && !(*warm)[p].empty())
            so.warm_basis = &(*warm)[p];
        return solve_lp(lp, so);
    };

    std::vector<LPSolution> sols = parallel_map(plan, P, task);
    for (int p = 0; p < P; ++p)
        if (sols[p].status != SolveStatus::Optimal)
            throw SubproblemFailure(p, sols[p].status, "bound");
    if (warm)
        for (int p = 0; p < P; ++p)
            (*warm)[p] = sols[p].basis;
    return ordered_reduce(sols, 0.0,
                          [](double acc, const LPSolution& s) { return acc + s.objective; });
}

// Projects a consensus vector into the battery limits: placement clipped to
// [0, x_max] and rescaled onto the budget when the sum overshoots, then each
// boundary state clipped into the energy window its repaired placement
// allows.
inline std::vector<double> repair_consensus(const FirstStageMap& fs, std::vector<double> xbar,
                                            const BatteryConfig& batt)
{
    double total = 0.0;
    for (int k = 0; k < fs.count(); ++k)
        if (fs.vars[k].cls == FirstStageVar::Class::Placement) {
            xbar[k] = std::clamp(xbar[k], 0.0, batt.x_max);
            total += xbar[k];
        }
    if (total > batt.x_total + 1e-9 && total > 0.0) {
        const double scale = batt.x_total / total;
        for (int k = 0; k < fs.count(); ++k)
            if (fs.vars[k].cls == FirstStageVar::Class::Placement)
                xbar[k] *= scale;
    }
    for (int k = 0; k < fs.count(); ++k)
        if (fs.vars[k].cls == FirstStageVar::Class::SocBoundary) {
            double x = xbar[fs.vars[k].candidate];
            xbar[k] = std::clamp(xbar[k], x * batt.e_min, x * batt.e_max);
        }
    return xbar;
}

struct Incumbent {
    PlanningSolution solution;
    double ub = kInf;
    bool feasible = false;
    FeasibilityReport report;
};

// Appends the slice hours of `piece` to `whole`; placement and initial state
// come from the first period.
inline void append_slice(PlanningSolution& whole, const PlanningSolution& piece)
{
    auto extend = [](std::vector<std::vector<double>>& dst,
                     const std::vector<std::vector<double>>& src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };
    extend(whole.gen, piece.gen);
    extend(whole.slack, piece.slack);
    extend(whole.theta, piece.theta);
    extend(whole.shed, piece.shed);
    extend(whole.flow, piece.flow);
    extend(whole.charge, piece.charge);
    extend(whole.discharge, piece.discharge);
    extend(whole.soc, piece.soc);
}

// Restores nonanticipativity: repairs the consensus vector, fixes every
// period's copies of the first-stage variables to it, re-solves the periods,
// and stitches the results into one full-horizon solution whose cost is a
// valid upper bound whenever the verifier passes it.
inline Incumbent incumbent_from_consensus(const Network& net,
                                          const std::vector<PeriodSubproblem>& subs,
                                          const FirstStageMap& fs,
                                          const std::vector<double>& xbar_in,
                                          const BatteryConfig& batt, const CostConfig& cost,
                                          const DeenergizationSchedule& schedule,
                                          const std::vector<std::vector<double>>& demand,
                                          const WorkPlan& plan, const SolverOptions& sopts = {},
                                          std::vector<Basis>* warm = nullptr)
{
    const int P = static_cast<int>(subs.size());
    for (double v : xbar_in)
        if (!std::isfinite(v))
            throw ValidationError("non-finite consensus value");
    const std::vector<double> fixed = repair_consensus(fs, xbar_in, batt);

    std::function<LPSolution(int)> task = [&](int p) {
        StandardFormLP lp = subs[p].lp;
        for (const auto& o : fs.owned[p]) {
            lp.col_lower[o.col] = fixed[o.var];
            lp.col_upper[o.col] = fixed[o.var];
        }
        SolverOptions so = sopts;
        if (warm && !(*warm)[p].empty())
            so.warm_basis = &(*warm)[p];
        return solve_lp(lp, so);
    };
    std::vector<LPSolution> sols = parallel_map(plan, P, task);

    Incumbent inc;
    for (int p = 0; p < P; ++p) {
        if (sols[p].status == SolveStatus::Optimal)
            continue;
        inc.feasible = false;
        inc.report.violations.push_back({"incumbent-subproblem", -1,
                                         "period " + std::to_string(p) + " ended " +
                                             to_string(sols[p].status),
                                         0.0});
        return inc;
    }
    if (warm)
        for (int p = 0; p < P; ++p)
            (*warm)[p] = sols[p].basis;

    PlanningSolution whole = extract_solution(subs[0], sols[0].x, net, batt, cost);
    for (int p = 1; p < P; ++p)
        append_slice(whole, extract_solution(subs[p], sols[p].x, net, batt, cost));
    whole.cost = evaluate_cost(whole, net, cost);

    inc.solution = std::move(whole);
    inc.ub = inc.solution.cost.total;
    inc.report = check_feasibility(inc.solution, net, batt, cost, schedule, demand);
    inc.feasible = inc.report.clean();
    return inc;
}

// ---------------------------------------------------------------------------
// The driver

struct IterationStat {
    int v = 0;
    double residual = 0.0;
    double lb = -kInf;  // best bound so far
    double ub = kInf;   // best bound so far
    double gap = kInf;
    double wall_ms = 0.0;
};

struct PHState {
    int iteration = 0;
    double rho = 0.0;
    double rho_soc = 0.0;
    std::vector<double> xbar;
    std::vector<std::vector<double>> x;  // per period, aligned with the first-stage map
    std::vector<std::vector<double>> w;
    double best_lb = -kInf;
    double best_ub = kInf;
    // solver bases per period for each solve family, so a resumed run warm
    // starts exactly like the uninterrupted one
    std::vector<Basis> lb_basis;
    std::vector<Basis> aug_basis;
    std::vector<Basis> inc_basis;
};

struct PHOptions {
    double rho = 0.001;
    double rho_soc = -1.0;  // < 0 means: use rho
    int max_iterations = 200;
    double tol = 1e-4;  // consensus residual target, p.u.
    int breakpoints = 8;
    int ladder_depth = 20;  // halvings toward xbar; sets the penalty's resolving power
    int incumbent_cadence = 1;
    SolverOptions solver;
    std::function<void(const IterationStat&)> on_iteration;
    const PHState* resume = nullptr;

    double effective_rho_soc() const { return rho_soc < 0.0 ? rho : rho_soc; }

    void validate() const
    {
        if (!(rho > 0.0))
            throw ValidationError("rho must be positive");
        if (rho_soc >= 0.0 && !(rho_soc > 0.0))
            throw ValidationError("rho_soc must be positive when set");
        if (!(tol > 0.0))
            throw ValidationError("tolerance must be positive");
        if (max_iterations < 0)
            throw ValidationError("iteration cap must be non-negative");
        if (breakpoints < 0 || ladder_depth < 0)
            throw ValidationError("cut counts must be non-negative");
        if (incumbent_cadence < 1)
            throw ValidationError("incumbent cadence must be at least 1");
    }
};

struct PHResult {
    bool converged = false;
    int iterations = 0;
    double residual = kInf;
    double lb = -kInf;
    double ub = kInf;
    double gap = kInf;
    PlanningSolution incumbent;
    bool has_incumbent = false;
    FeasibilityReport incumbent_report;
    int incumbents_rejected = 0;
    double max_weight_gap = 0.0;
    std::vector<IterationStat> trace;
    double wall_ms = 0.0;
    PHState state;
};

namespace detail {

inline double relative_gap(double lb, double ub)
{
    if (!(ub < kInf) || !(lb > -kInf))
        return kInf;
    return (ub - lb) / std::max({std::abs(ub), std::abs(lb), 1e-9});
}

// Bases travel in checkpoints as compact status strings so a resumed run warm
// starts from the same vertices as the uninterrupted one.
inline std::string encode_statuses(const std::vector<VarStatus>& v)
{
    std::string s;
    s.reserve(v.size());
    for (VarStatus st : v)
        s.push_back(st == VarStatus::Basic ? 'B' : st == VarStatus::AtLower ? 'L' : 'U');
    return s;
}

inline std::vector<VarStatus> decode_statuses(const std::string& s)
{
    std::vector<VarStatus> v;
    v.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case 'B': v.push_back(VarStatus::Basic); break;
        case 'L': v.push_back(VarStatus::AtLower); break;
        case 'U': v.push_back(VarStatus::AtUpper); break;
        default:
            throw ParseError(std::string("checkpoint basis has unknown status '") + c + "'");
        }
    }
    return v;
}

inline nlohmann::ordered_json bases_to_json(const std::vector<Basis>& bases)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Basis& b : bases) {
        nlohmann::ordered_json j;
        j["cols"] = encode_statuses(b.cols);
        j["rows"] = encode_statuses(b.rows);
        arr.push_back(std::move(j));
    }
    return arr;
}

inline std::vector<Basis> bases_from_json(const nlohmann::json& arr)
{
    std::vector<Basis> bases;
    bases.reserve(arr.size());
    for (const auto& j : arr) {
        Basis b;
        b.cols = decode_statuses(j.at("cols").get<std::string>());
        b.rows = decode_statuses(j.at("rows").get<std::string>());
        bases.push_back(std::move(b));
    }
    return bases;
}

} // namespace detail

inline nlohmann::ordered_json checkpoint_to_json(const PHState& st)
{
    nlohmann::ordered_json j;
    j["iteration"] = st.iteration;
    j["rho"] = st.rho;
    j["rho_soc"] = st.rho_soc;
    if (st.best_lb > -kInf)
        j["best_lb"] = st.best_lb;
    if (st.best_ub < kInf)
        j["best_ub"] = st.best_ub;
    j["xbar"] = st.xbar;
    j["x"] = st.x;
    j["w"] = st.w;
    if (!st.lb_basis.empty())
        j["lb_basis"] = detail::bases_to_json(st.lb_basis);
    if (!st.aug_basis.empty())
        j["aug_basis"] = detail::bases_to_json(st.aug_basis);
    if (!st.inc_basis.empty())
        j["inc_basis"] = detail::bases_to_json(st.inc_basis);
    return j;
}

inline PHState checkpoint_from_json(const nlohmann::json& j)
{
    try {
        PHState st;
        st.iteration = j.at("iteration").get<int>();
        st.rho = j.at("rho").get<double>();
        st.rho_soc = j.at("rho_soc").get<double>();
        if (j.contains("best_lb") && !j["best_lb"].is_null())
            st.best_lb = j["best_lb"].get<double>();
        if (j.contains("best_ub") && !j["best_ub"].is_null())
            st.best_ub = j["best_ub"].get<double>();
        st.xbar = j.at("xbar").get<std::vector<double>>();
        st.x = j.at("x").get<std::vector<std::vector<double>>>();
        st.w = j.at("w").get<std::vector<std::vector<double>>>();
        if (j.contains("lb_basis"))
            st.lb_basis = detail::bases_from_json(j["lb_basis"]);
        if (j.contains("aug_basis"))
            st.aug_basis = detail::bases_from_json(j["aug_basis"]);
        if (j.contains("inc_basis"))
            st.inc_basis = detail::bases_from_json(j["inc_basis"]);
        if (st.x.size() != st.w.size())
            throw ValidationError("checkpoint value and price blocks disagree on period count");
        for (std::size_t p = 0; p < st.x.size(); ++p)
            if (st.x[p].size() != st.w[p].size())
                throw ValidationError("checkpoint period " + std::to_string(p) +
                                      " values and prices misaligned");
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
}

inline nlohmann::ordered_json to_json(const IterationStat& s)
{
    nlohmann::ordered_json j;
    j["v"] = s.v;
    j["residual"] = s.residual;
    j["lb"] = s.lb > -kInf ? nlohmann::ordered_json(s.lb) : nlohmann::ordered_json(nullptr);
    j["ub"] = s.ub < kInf ? nlohmann::ordered_json(s.ub) : nlohmann::ordered_json(nullptr);
    j["gap"] = s.gap < kInf ? nlohmann::ordered_json(s.gap) : nlohmann::ordered_json(nullptr);
    j["wall_ms"] = s.wall_ms;
    return j;
}

// Runs the full loop: iteration 0 solves the periods unpenalized (which is
// also the first Lagrangian bound, since all prices are zero), then each
// iteration updates prices, re-solves the augmented periods, refreshes the
// bound, aggregates, and evaluates an incumbent. Under the async-incumbent
// policy the incumbent for iteration v is collected at the barrier of v+1, so
// the iterate sequence and the trace stay independent of worker count.
inline PHResult run_ph(const Network& net, const ScenarioPartition& part,
                       const BatteryConfig& batt, const CostConfig& cost,
                       const DeenergizationSchedule& schedule,
                       const std::vector<std::vector<double>>& demand,
                       const PHOptions& opts = {}, WorkPlan plan = {})
{
    opts.validate();
    const int P = static_cast<int>(part.periods.size());
    if (P == 0)
        throw ValidationError("partition has no periods");
    if (plan.owner_of_period.empty())
        plan = WorkPlan::round_robin(P, plan.workers, plan.policy);
    plan.validate(P);

    // Under the async policy the worker pool is split between period solves
    // and incumbent solves, mirroring a dedicated incumbent-finder fleet.
    WorkPlan solve_plan = plan;
    WorkPlan inc_plan = plan;
    if (plan.policy == ExecPolicy::AsyncIncumbent) {
        int inc_workers = std::max(1, plan.workers / 2);
        int slv_workers = std::max(1, plan.workers - inc_workers);
        solve_plan = WorkPlan::round_robin(P, slv_workers, plan.policy);
        inc_plan = WorkPlan::round_robin(P, inc_workers, plan.policy);
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto now_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    std::vector<PeriodSubproblem> subs;
    subs.reserve(P);
    for (const PeriodSlice& s : part.periods)
        subs.push_back(build_period_lp(net, s, batt, cost, schedule, demand));
    const FirstStageMap fs = map_first_stage(subs, net);
    const double rho_x = opts.rho;
    const double rho_e = opts.effective_rho_soc();

    PHResult out;
    PHState st;
    bool resumed = false;
    if (opts.resume) {
        st = *opts.resume;
        if (static_cast<int>(st.x.size()) != P || static_cast<int>(st.w.size()) != P)
            throw ValidationError("checkpoint period count does not match the partition");
        for (int p = 0; p < P; ++p)
            if (st.x[p].size() != fs.owned[p].size())
                throw ValidationError("checkpoint period " + std::to_string(p) +
                                      " does not match the first-stage map");
        if (static_cast<int>(st.xbar.size()) != fs.count())
            throw ValidationError("checkpoint consensus vector has the wrong length");
        if (st.rho != rho_x || st.rho_soc != rho_e)
            throw ValidationError("checkpoint was produced with different price steps");
        resumed = true;
    } else {
        st.rho = rho_x;
        st.rho_soc = rho_e;
        st.w.assign(P, {});
        for (int p = 0; p < P; ++p)
            st.w[p].assign(fs.owned[p].size(), 0.0);
    }

    std::vector<Basis> lb_basis(P), aug_basis(P), inc_basis(P);
    if (resumed) {
        // Shape mismatches (a checkpoint from another instance) just forfeit
        // the warm start; the solver treats an empty basis as a cold one.
        if (static_cast<int>(st.lb_basis.size()) == P)
            lb_basis = std::move(st.lb_basis);
        if (static_cast<int>(st.aug_basis.size()) == P)
            aug_basis = std::move(st.aug_basis);
        if (static_cast<int>(st.inc_basis.size()) == P)
            inc_basis = std::move(st.inc_basis);
    }

    auto run_phase = [&](const std::function<StandardFormLP(int)>& make,
                         std::vector<Basis>& store, const char* what) {
        std::function<LPSolution(int)> task = [&](int p) {
            StandardFormLP lp = make(p);
            SolverOptions so = opts.solver;
            if (!store[p].empty())
                so.warm_basis = &store[p];
            return solve_lp(lp, so);
        };
        std::vector<LPSolution> sols = parallel_map(solve_plan, P, task);
        for (int p = 0; p < P; ++p)
            if (sols[p].status != SolveStatus::Optimal)
                throw SubproblemFailure(p, sols[p].status, what);
        for (int p = 0; p < P; ++p)
            store[p] = sols[p].basis;
        return sols;
    };

    Deferred pending;
    Incumbent pending_result;
    bool pending_active = false;
    auto merge_incumbent = [&](Incumbent&& inc) {
        if (!inc.feasible) {
            ++out.incumbents_rejected;
            return;
        }
        if (inc.ub < st.best_ub || !out.has_incumbent) {
            st.best_ub = std::min(st.best_ub, inc.ub);
            out.incumbent = std::move(inc.solution);
            out.incumbent_report = std::move(inc.report);
            out.has_incumbent = true;
        }
    };
    auto collect_pending = [&] {
        if (!pending_active)
            return;
        pending.wait();
        pending_active = false;
        merge_incumbent(std::move(pending_result));
    };
    auto eval_incumbent = [&](const std::vector<double>& xbar) {
        return incumbent_from_consensus(net, subs, fs, xbar, batt, cost, schedule, demand,
                                        inc_plan, opts.solver, &inc_basis);
    };
    auto schedule_incumbent = [&](const std::vector<double>& xbar) {
        if (plan.policy == ExecPolicy::AsyncIncumbent) {
            pending.launch([&eval_incumbent, &pending_result, snapshot = xbar] {
                pending_result = eval_incumbent(snapshot);
            });
            pending_active = true;
        } else {
            merge_incumbent(eval_incumbent(xbar));
        }
    };
    auto push_row = [&](int v, double res) {
        IterationStat row{v,
                          res,
                          st.best_lb,
                          st.best_ub,
                          detail::relative_gap(st.best_lb, st.best_ub),
                          now_ms()};
        out.trace.push_back(row);
        if (opts.on_iteration)
            opts.on_iteration(row);
    };

    double res = kInf;
    if (!resumed) {
        std::vector<LPSolution> sols =
            run_phase([&](int p) { return subs[p].lp; }, lb_basis, "relaxation");
        st.x.assign(P, {});
        for (int p = 0; p < P; ++p)
            st.x[p] = owned_values(fs.owned[p], sols[p].x);
        st.xbar = aggregate(fs, st.x);
        res = residual(fs, st.x, st.xbar);
        double lb0 = ordered_reduce(sols, 0.0, [](double acc, const LPSolution& s) {
            return acc + s.objective;
        });
        st.best_lb = std::max(st.best_lb, lb0);

        if (P == 1) {
            // A single scenario is already nonanticipative: keep its solution
            // verbatim so the degenerate run reproduces the plain solve.
            PlanningSolution sol = extract_solution(subs[0], sols[0].x, net, batt, cost);
            Incumbent inc;
            inc.ub = sol.cost.total;
            inc.report = check_feasibility(sol, net, batt, cost, schedule, demand);
            inc.feasible = inc.report.clean();
            inc.solution = std::move(sol);
            merge_incumbent(std::move(inc));
        } else {
            schedule_incumbent(st.xbar);
        }
        push_row(0, res);
    } else {
        res = residual(fs, st.x, st.xbar);
    }

    bool converged = res <= opts.tol;
    int v = st.iteration;
    while (!converged && v < opts.max_iterations) {
        ++v;
        price_update(fs, st.x, st.xbar, rho_x, rho_e, st.w);
        out.max_weight_gap = std::max(out.max_weight_gap, weight_conservation_gap(fs, st.w));

        std::vector<LPSolution> sols = run_phase(
            [&](int p) {
                return augment_subproblem(subs[p],
                                          scenario_prices(fs, p, st.w[p], st.xbar, rho_x,
                                                          rho_e),
                                          opts.breakpoints, opts.ladder_depth);
            },
            aug_basis, "augmented");

        double lb_v = lagrangian_lower_bound(subs, fs, st.w, solve_plan, rho_x, rho_e,
                                             opts.solver, &lb_basis);
        st.best_lb = std::max(st.best_lb, lb_v);

        for (int p = 0; p < P; ++p)
            st.x[p] = owned_values(fs.owned[p], sols[p].x);
        st.xbar = aggregate(fs, st.x);
        res = residual(fs, st.x, st.xbar);

        collect_pending();
        if (v % opts.incumbent_cadence == 0)
            schedule_incumbent(st.xbar);

        st.iteration = v;
        push_row(v, res);
        converged = res <= opts.tol;
    }
    collect_pending();
    if (!out.has_incumbent && !st.xbar.empty())
        merge_incumbent(eval_incumbent(st.xbar));

    out.converged = converged;
    out.iterations = v;
    out.residual = res;
    out.lb = st.best_lb;
    out.ub = st.best_ub;
    out.gap = detail::relative_gap(st.best_lb, st.best_ub);
    st.lb_basis = std::move(lb_basis);
    st.aug_basis = std::move(aug_basis);
    st.inc_basis = std::move(inc_basis);
    out.state = std::move(st);
    out.wall_ms = now_ms();
    return out;
}

} // namespace battplan
