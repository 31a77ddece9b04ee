#pragma once

// Bounded-variable revised simplex with a sparse LU basis and product-form
// updates. One logical column is appended per row; equality rows get a
// logical fixed at zero, which doubles as an implicit phase-1 artificial.
// Feasibility from an arbitrary starting basis is restored by a composite
// phase 1 minimizing the total bound violation of the basic variables,
// which is what makes warm starts from stale bases safe. The phase is
// re-selected every iteration, so the solver needs no explicit phase-1 to
// phase-2 handoff.
//
// Determinism: entering ties break toward the lowest column index, leaving
// ties toward the largest pivot magnitude then the lowest variable index,
// and every scan runs in fixed index order, so a given LP and options
// always produce the same pivot sequence bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "battplan/lp.hpp"

namespace battplan {
namespace detail {

struct CompiledLP {
    int m = 0;  // rows
    int n = 0;  // structural columns
    std::vector<int> cptr, cidx;  // structural columns, compressed
    std::vector<double> cval;
    std::vector<double> cost, lo, up;  // size n + m, logicals appended
    std::vector<double> rhs;

    int total() const { return n + m; }
    bool is_logical(int var) const { return var >= n; }
    int logical_row(int var) const { return var - n; }
};

inline CompiledLP compile(const StandardFormLP& lp)
{
    CompiledLP c;
    c.m = lp.rows();
    c.n = lp.cols();

    std::vector<int> count(c.n, 0);
    for (const Triplet& t : lp.matrix)
        ++count[t.col];
    c.cptr.assign(c.n + 1, 0);
    for (int j = 0; j < c.n; ++j)
        c.cptr[j + 1] = c.cptr[j] + count[j];
    std::vector<int> fill(c.cptr.begin(), c.cptr.end() - 1);
    c.cidx.resize(lp.matrix.size());
    c.cval.resize(lp.matrix.size());
    for (const Triplet& t : lp.matrix) {
        int p = fill[t.col]++;
        c.cidx[p] = t.row;
        c.cval[p] = t.value;
    }

    // Sort each column by row and merge duplicate entries.
    std::vector<std::pair<int, double>> buf;
    int write = 0;
    std::vector<int> new_ptr(c.n + 1, 0);
    for (int j = 0; j < c.n; ++j) {
        buf.clear();
        for (int e = c.cptr[j]; e < c.cptr[j + 1]; ++e)
            buf.emplace_back(c.cidx[e], c.cval[e]);
        std::sort(buf.begin(), buf.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k < buf.size();) {
            int row = buf[k].first;
            double v = 0.0;
            while (k < buf.size() && buf[k].first == row)
                v += buf[k++].second;
            if (v != 0.0) {
                c.cidx[write] = row;
                c.cval[write] = v;
                ++write;
            }
        }
        new_ptr[j + 1] = write;
    }
    c.cidx.resize(write);
    c.cval.resize(write);
    c.cptr = std::move(new_ptr);

    c.cost = lp.objective;
    c.lo = lp.col_lower;
    c.up = lp.col_upper;
    c.cost.resize(c.total(), 0.0);
    c.lo.resize(c.total());
    c.up.resize(c.total());
    for (int i = 0; i < c.m; ++i) {
        int v = c.n + i;
        switch (lp.senses[i]) {
        case RowSense::LessEqual:
            c.lo[v] = 0.0;
            c.up[v] = kInf;
            break;
        case RowSense::GreaterEqual:
            c.lo[v] = -kInf;
            c.up[v] = 0.0;
            break;
        case RowSense::Equal:
            c.lo[v] = 0.0;
            c.up[v] = 0.0;
            break;
        }
    }
    c.rhs = lp.rhs;
    return c;
}

// Left-looking sparse LU with partial pivoting. Solves are dense sweeps
// over the factors; positions refer to pivot order, rows to the original
// numbering.
class SparseLU {
public:
    // fetch(j, out) must append column j of the basis as (row, value) pairs.
    template <class Fetch>
    bool factor(int m, Fetch&& fetch)
    {
        m_ = m;
        prow_.assign(m, -1);
        rpos_.assign(m, -1);
        lptr_.assign(1, 0);
        lrow_.clear();
        lval_.clear();
        uptr_.assign(1, 0);
        upos_.clear();
        uval_.clear();
        udiag_.assign(m, 0.0);

        std::vector<double> w(m, 0.0);
        std::vector<char> mark(m, 0);
        std::vector<int> topo, stack_node, stack_edge;
        std::vector<std::pair<int, double>> col;

        for (int j = 0; j < m; ++j) {
            col.clear();
            fetch(j, col);
            topo.clear();
            double colmax = 0.0;
            for (const auto& [r, v] : col) {
                w[r] += v;
                colmax = std::max(colmax, std::abs(v));
                if (mark[r])
                    continue;
                // Depth-first reach through the L pattern, postorder.
                mark[r] = 1;
                stack_node.assign(1, r);
                stack_edge.assign(1, rpos_[r] < 0 ? -1 : lptr_[rpos_[r]]);
                while (!stack_node.empty()) {
                    int node = stack_node.back();
                    int& e = stack_edge.back();
                    int k = rpos_[node];
                    if (e < 0 || e >= lptr_[k + 1]) {
                        topo.push_back(node);
                        stack_node.pop_back();
                        stack_edge.pop_back();
                        continue;
                    }
                    int child = lrow_[e++];
                    if (!mark[child]) {
                        mark[child] = 1;
                        stack_node.push_back(child);
                        stack_edge.push_back(rpos_[child] < 0 ? -1 : lptr_[rpos_[child]]);
                    }
                }
            }

            // Eliminate in topological (reverse postorder) order.
            for (int t = static_cast<int>(topo.size()) - 1; t >= 0; --t) {
                int r = topo[t];
                int k = rpos_[r];
                if (k < 0)
                    continue;
                double xr = w[r];
                if (xr == 0.0)
                    continue;
                for (int e = lptr_[k]; e < lptr_[k + 1]; ++e)
                    w[lrow_[e]] -= lval_[e] * xr;
            }

            int piv = -1;
            double best = 0.0;
            for (int r : topo) {
                if (rpos_[r] >= 0)
                    continue;
                double a = std::abs(w[r]);
                if (a > best || (a == best && piv >= 0 && r < piv)) {
                    best = a;
                    piv = r;
                }
            }
            if (piv < 0 || best <= 1e-11 * std::max(1.0, colmax)) {
                for (int r : topo) {
                    w[r] = 0.0;
                    mark[r] = 0;
                }
                return false;
            }
            double pval = w[piv];
            for (int r : topo) {
                double v = w[r];
                w[r] = 0.0;
                mark[r] = 0;
                int k = rpos_[r];
                if (k >= 0) {
                    if (v != 0.0) {
                        upos_.push_back(k);
                        uval_.push_back(v);
                    }
                } else if (r != piv && v != 0.0) {
                    lrow_.push_back(r);
                    lval_.push_back(v / pval);
                }
            }
            udiag_[j] = pval;
            rpos_[piv] = j;
            prow_[j] = piv;
            lptr_.push_back(static_cast<int>(lrow_.size()));
            uptr_.push_back(static_cast<int>(upos_.size()));
        }
        return true;
    }

    int nnz() const { return static_cast<int>(lval_.size() + uval_.size()) + m_; }

    // In: right-hand side by original row. Out: solution by basis position.
    void ftran(std::vector<double>& v, std::vector<double>& scratch) const
    {
        scratch.resize(m_);
        for (int p = 0; p < m_; ++p)
            scratch[p] = v[prow_[p]];
        for (int k = 0; k < m_; ++k) {
            double xk = scratch[k];
            if (xk == 0.0)
                continue;
            for (int e = lptr_[k]; e < lptr_[k + 1]; ++e)
                scratch[rpos_[lrow_[e]]] -= lval_[e] * xk;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double xk = scratch[k] / udiag_[k];
            scratch[k] = xk;
            if (xk == 0.0)
                continue;
            for (int e = uptr_[k]; e < uptr_[k + 1]; ++e)
                scratch[upos_[e]] -= uval_[e] * xk;
        }
        v.swap(scratch);
    }

    // In: costs by basis position. Out: duals by original row.
    void btran(std::vector<double>& v, std::vector<double>& scratch) const
    {
        for (int k = 0; k < m_; ++k) {
            double s = v[k];
            for (int e = uptr_[k]; e < uptr_[k + 1]; ++e)
                s -= uval_[e] * v[upos_[e]];
            v[k] = s / udiag_[k];
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double s = v[k];
            for (int e = lptr_[k]; e < lptr_[k + 1]; ++e)
                s -= lval_[e] * v[rpos_[lrow_[e]]];
            v[k] = s;
        }
        scratch.resize(m_);
        for (int p = 0; p < m_; ++p)
            scratch[prow_[p]] = v[p];
        v.swap(scratch);
    }

private:
    int m_ = 0;
    std::vector<int> prow_, rpos_;
    std::vector<int> lptr_, lrow_;
    std::vector<double> lval_;
    std::vector<int> uptr_, upos_;
    std::vector<double> uval_;
    std::vector<double> udiag_;
};

class Simplex {
public:
    Simplex(const StandardFormLP& lp, const SolverOptions& opts)
        : lp_(lp), opts_(opts), c_(compile(lp))
    {
        max_iters_ = opts.max_iterations > 0
                         ? opts.max_iterations
                         : 1000 + 50L * (c_.m + c_.n);
    }

    LPSolution run()
    {
        LPSolution out;
        if (!install_basis(opts_.warm_basis, out))
            install_basis(nullptr, out);
        if (!refactor()) {
            // A fresh all-logical basis is the identity; failure here means
            // the warm basis was numerically singular.
            out.warm_start_rejected = true;
            install_basis(nullptr, out);
            refactor();
        }
        compute_basic_values();

        long degen_streak = 0;
        bool bland = false;
        long fresh_at = -1;  // iteration count at the last clean refresh

        // A singular restart rebuilds the initial state; replaying the same
        // pivots from there would just loop, so hold Bland pricing on for a
        // while to force a different trajectory.
        long seen_restarts = 0;
        long bland_hold = -1;
        auto note_restart = [&]() {
            if (restarts_ > seen_restarts) {
                seen_restarts = restarts_;
                bland = true;
                bland_hold = iters_ + 1000;
            }
        };

        while (true) {
            if (iters_ >= max_iters_) {
                out.status = SolveStatus::IterationLimit;
                break;
            }
            if (static_cast<int>(etas_.size()) >= opts_.refactor_interval ||
                eta_nnz_ > 4 * (lu_.nnz() + c_.m)) {
                if (!refresh(out))
                    break;
                note_restart();
                fresh_at = -1;
            }

            bool phase1 = false;
            double worst = 0.0;
            for (int p = 0; p < c_.m; ++p) {
                int b = basic_[p];
                double below = c_.lo[b] - xb_[p];
                double above = xb_[p] - c_.up[b];
                double viol = std::max(below, above);
                if (viol > worst)
                    worst = viol;
            }
            phase1 = worst > opts_.feasibility_tol;

            // Duals for the active phase.
            y_.assign(c_.m, 0.0);
            for (int p = 0; p < c_.m; ++p) {
                int b = basic_[p];
                if (phase1) {
                    if (xb_[p] < c_.lo[b] - opts_.feasibility_tol)
                        y_[p] = -1.0;
                    else if (xb_[p] > c_.up[b] + opts_.feasibility_tol)
                        y_[p] = 1.0;
                } else {
                    y_[p] = c_.cost[b];
                }
            }
            btran_with_etas(y_);

            int enter = -1, dir = 0;
            double best_score = 0.0;
            for (int j = 0; j < c_.total(); ++j) {
                if (vstat_[j] == VarStatus::Basic || c_.lo[j] == c_.up[j])
                    continue;
                double d = (phase1 ? 0.0 : c_.cost[j]) - dot_column(j, y_);
                int cand_dir = 0;
                if (vstat_[j] == VarStatus::AtLower) {
                    bool is_free = c_.lo[j] <= -kInf && c_.up[j] >= kInf;
                    if (d < -opts_.optimality_tol)
                        cand_dir = 1;
                    else if (is_free && d > opts_.optimality_tol)
                        cand_dir = -1;
                } else if (d > opts_.optimality_tol) {
                    cand_dir = -1;
                }
                if (cand_dir == 0)
                    continue;
                if (bland) {
                    enter = j;
                    dir = cand_dir;
                    break;
                }
                double score = std::abs(d);
                if (score > best_score) {
                    best_score = score;
                    enter = j;
                    dir = cand_dir;
                }
            }

            if (enter < 0) {
                // No improving direction. Confirm on a fresh factorization
                // before declaring, to rule out update drift.
                if (fresh_at != iters_) {
                    if (!refresh(out))
                        break;
                    note_restart();
                    fresh_at = iters_;
                    continue;
                }
                out.status = phase1 ? SolveStatus::Infeasible : SolveStatus::Optimal;
                if (phase1)
                    out.note = "phase 1 stalled with max bound violation " + format_double(worst);
                break;
            }

            // Direction of basic values as the entering variable moves.
            spike_.assign(c_.m, 0.0);
            scatter_column(enter, spike_);
            ftran_with_etas(spike_);

            // Ratio test in two passes: first the largest step that keeps
            // every basic variable within the feasibility tolerance, then the
            // numerically strongest pivot among the candidates that block
            // within that step. Trading tolerance-sized bound violations for
            // large pivots keeps the factored basis well conditioned and
            // breaks the exact-ratio ties that make degenerate vertices
            // cycle.
            struct RatioCand {
                double dist = 0.0;   // room to the blocking bound, >= -tol
                double slope = 0.0;  // |d basic value / d step|
                bool to_upper = false;
                double alpha = 0.0;
            };
            auto ratio_candidate = [&](int p, RatioCand& rc) {
                double alpha = spike_[p];
                if (std::abs(alpha) <= 1e-9)
                    return false;
                double rate = -dir * alpha;  // change of basic value per unit step
                int b = basic_[p];
                if (rate < 0.0) {
                    if (phase1 && xb_[p] > c_.up[b] + opts_.feasibility_tol)
                        rc = {xb_[p] - c_.up[b], -rate, true, alpha};  // regains feasibility
                    else if (phase1 && xb_[p] < c_.lo[b] - opts_.feasibility_tol)
                        return false;  // moving deeper below; slope already priced in
                    else if (c_.lo[b] > -kInf)
                        rc = {xb_[p] - c_.lo[b], -rate, false, alpha};
                    else
                        return false;
                } else {
                    if (phase1 && xb_[p] < c_.lo[b] - opts_.feasibility_tol)
                        rc = {c_.lo[b] - xb_[p], rate, false, alpha};
                    else if (phase1 && xb_[p] > c_.up[b] + opts_.feasibility_tol)
                        return false;
                    else if (c_.up[b] < kInf)
                        rc = {c_.up[b] - xb_[p], rate, true, alpha};
                    else
                        return false;
                }
                return true;
            };

            double t_limit = kInf;
            for (int p = 0; p < c_.m; ++p) {
                RatioCand rc;
                if (ratio_candidate(p, rc))
                    t_limit = std::min(t_limit, (rc.dist + opts_.feasibility_tol) / rc.slope);
            }

            double t_best = kInf;
            int leave_pos = -1;
            bool leave_to_upper = false;
            double leave_alpha = 0.0;
            for (int p = 0; p < c_.m; ++p) {
                RatioCand rc;
                if (!ratio_candidate(p, rc))
                    continue;
                double t = rc.dist / rc.slope;
                if (t > t_limit)
                    continue;
                bool better = std::abs(rc.alpha) > std::abs(leave_alpha) ||
                              (std::abs(rc.alpha) == std::abs(leave_alpha) && leave_pos >= 0 &&
                               basic_[p] < basic_[leave_pos]);
                if (better) {
                    t_best = std::max(t, 0.0);
                    leave_pos = p;
                    leave_to_upper = rc.to_upper;
                    leave_alpha = rc.alpha;
                }
            }

            double t_flip = (c_.lo[enter] > -kInf && c_.up[enter] < kInf)
                                ? c_.up[enter] - c_.lo[enter]
                                : kInf;

            if (t_flip <= t_best) {
                if (t_flip >= kInf) {
                    // A ray seen through a stack of updates can be an artifact
                    // of drift; confirm it on a fresh factorization before
                    // declaring anything.
                    if (fresh_at != iters_) {
                        if (!refresh(out))
                            break;
                        note_restart();
                        fresh_at = iters_;
                        continue;
                    }
                    if (!phase1) {
                        out.status = SolveStatus::Unbounded;
                        break;
                    }
                    // A bounded-below phase-1 objective always has a blocking
                    // breakpoint; a fresh ray here is numerical breakdown.
                    out.status = SolveStatus::IterationLimit;
                    out.note = "phase 1 ray without breakpoint (numerical breakdown)";
                    break;
                }
                for (int p = 0; p < c_.m; ++p)
                    xb_[p] -= spike_[p] * (dir * t_flip);
                vstat_[enter] = vstat_[enter] == VarStatus::AtLower ? VarStatus::AtUpper
                                                                    : VarStatus::AtLower;
                ++iters_;
                degen_streak = 0;
                if (iters_ >= bland_hold)
                    bland = false;
                continue;
            }

            double step = dir * t_best;
            double enter_value = nonbasic_value(enter) + step;
            for (int p = 0; p < c_.m; ++p)
                xb_[p] -= spike_[p] * step;
            int leaving = basic_[leave_pos];
            vstat_[leaving] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
            if (c_.lo[leaving] == c_.up[leaving])
                vstat_[leaving] = VarStatus::AtLower;
            vstat_[enter] = VarStatus::Basic;
            basic_[leave_pos] = enter;
            xb_[leave_pos] = enter_value;
            push_eta(leave_pos);
            ++iters_;

            if (t_best <= 1e-10) {
                if (++degen_streak >= opts_.degeneracy_streak_limit)
                    bland = true;
            } else {
                degen_streak = 0;
                if (iters_ >= bland_hold)
                    bland = false;
            }
        }

        finalize(out);
        return out;
    }

private:
    bool install_basis(const Basis* warm, LPSolution& out)
    {
        vstat_.assign(c_.total(), VarStatus::AtLower);
        basic_.clear();
        if (warm && !warm->empty()) {
            if (static_cast<int>(warm->cols.size()) != c_.n ||
                static_cast<int>(warm->rows.size()) != c_.m) {
                out.warm_start_rejected = true;
                out.note = "warm basis has wrong dimensions";
                return false;
            }
            for (int j = 0; j < c_.n; ++j)
                vstat_[j] = warm->cols[j];
            for (int i = 0; i < c_.m; ++i)
                vstat_[c_.n + i] = warm->rows[i];
            for (int j = 0; j < c_.total(); ++j)
                if (vstat_[j] == VarStatus::Basic)
                    basic_.push_back(j);
            if (static_cast<int>(basic_.size()) != c_.m) {
                out.warm_start_rejected = true;
                out.note = "warm basis has wrong basic count";
                return false;
            }
        } else {
            for (int i = 0; i < c_.m; ++i) {
                basic_.push_back(c_.n + i);
                vstat_[c_.n + i] = VarStatus::Basic;
            }
        }
        // Normalize nonbasic rest states toward a finite bound.
        for (int j = 0; j < c_.total(); ++j) {
            if (vstat_[j] == VarStatus::Basic)
                continue;
            if (vstat_[j] == VarStatus::AtUpper && c_.up[j] >= kInf)
                vstat_[j] = VarStatus::AtLower;
            if (vstat_[j] == VarStatus::AtLower && c_.lo[j] <= -kInf && c_.up[j] < kInf)
                vstat_[j] = VarStatus::AtUpper;
        }
        return true;
    }

    void scatter_column(int var, std::vector<double>& dense) const
    {
        if (c_.is_logical(var)) {
            dense[c_.logical_row(var)] += 1.0;
        } else {
            for (int e = c_.cptr[var]; e < c_.cptr[var + 1]; ++e)
                dense[c_.cidx[e]] += c_.cval[e];
        }
    }

    double dot_column(int var, const std::vector<double>& dense) const
    {
        if (c_.is_logical(var))
            return dense[c_.logical_row(var)];
        double s = 0.0;
        for (int e = c_.cptr[var]; e < c_.cptr[var + 1]; ++e)
            s += c_.cval[e] * dense[c_.cidx[e]];
        return s;
    }

    double nonbasic_value(int j) const
    {
        if (vstat_[j] == VarStatus::AtUpper)
            return c_.up[j] < kInf ? c_.up[j] : (c_.lo[j] > -kInf ? c_.lo[j] : 0.0);
        return c_.lo[j] > -kInf ? c_.lo[j] : (c_.up[j] < kInf ? c_.up[j] : 0.0);
    }

    bool refactor()
    {
        bool ok = lu_.factor(c_.m, [&](int p, std::vector<std::pair<int, double>>& col) {
            int var = basic_[p];
            if (c_.is_logical(var)) {
                col.emplace_back(c_.logical_row(var), 1.0);
            } else {
                for (int e = c_.cptr[var]; e < c_.cptr[var + 1]; ++e)
                    col.emplace_back(c_.cidx[e], c_.cval[e]);
            }
        });
        if (ok) {
            etas_.clear();
            eta_nnz_ = 0;
        }
        return ok;
    }

    // Refactor and recompute basic values; on a singular basis, fall back to
    // the all-logical basis so the solve can continue from scratch.
    bool refresh(LPSolution& out)
    {
        if (!refactor()) {
            install_basis(nullptr, out);
            ++restarts_;
            out.note = "basis became singular; restarted from the logical basis";
            if (!refactor()) {
                out.status = SolveStatus::IterationLimit;
                return false;
            }
        }
        compute_basic_values();
        return true;
    }

    void compute_basic_values()
    {
        work_.assign(c_.m, 0.0);
        for (int i = 0; i < c_.m; ++i)
            work_[i] = c_.rhs[i];
        for (int j = 0; j < c_.total(); ++j) {
            if (vstat_[j] == VarStatus::Basic)
                continue;
            double v = nonbasic_value(j);
            if (v == 0.0)
                continue;
            if (c_.is_logical(j)) {
                work_[c_.logical_row(j)] -= v;
            } else {
                for (int e = c_.cptr[j]; e < c_.cptr[j + 1]; ++e)
                    work_[c_.cidx[e]] -= c_.cval[e] * v;
            }
        }
        ftran_with_etas(work_);
        xb_ = work_;
    }

    void ftran_with_etas(std::vector<double>& v)
    {
        lu_.ftran(v, scratch_);
        for (const Eta& e : etas_) {
            double t = v[e.pos] / e.pivot;
            v[e.pos] = t;
            if (t == 0.0)
                continue;
            for (const auto& [i, vi] : e.others)
                v[i] -= vi * t;
        }
    }

    void btran_with_etas(std::vector<double>& v)
    {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->pos];
            for (const auto& [i, vi] : it->others)
                s -= vi * v[i];
            v[it->pos] = s / it->pivot;
        }
        lu_.btran(v, scratch_);
    }

    void push_eta(int pos)
    {
        Eta e;
        e.pos = pos;
        e.pivot = spike_[pos];
        for (int p = 0; p < c_.m; ++p)
            if (p != pos && spike_[p] != 0.0)
                e.others.emplace_back(p, spike_[p]);
        eta_nnz_ += static_cast<long>(e.others.size()) + 1;
        etas_.push_back(std::move(e));
    }

    void finalize(LPSolution& out)
    {
        out.iterations = iters_;
        out.x.assign(c_.n, 0.0);
        std::vector<double> full(c_.total(), 0.0);
        for (int j = 0; j < c_.total(); ++j)
            if (vstat_[j] != VarStatus::Basic)
                full[j] = nonbasic_value(j);
        for (int p = 0; p < c_.m; ++p)
            full[basic_[p]] = xb_[p];
        for (int j = 0; j < c_.n; ++j)
            out.x[j] = full[j];

        out.objective = 0.0;
        for (int j = 0; j < c_.n; ++j)
            out.objective += c_.cost[j] * out.x[j];

        // Duals and reduced costs at the final basis, with true costs.
        y_.assign(c_.m, 0.0);
        for (int p = 0; p < c_.m; ++p)
            y_[p] = c_.cost[basic_[p]];
        btran_with_etas(y_);
        out.duals = y_;
        out.reduced_costs.assign(c_.n, 0.0);
        for (int j = 0; j < c_.n; ++j)
            out.reduced_costs[j] = c_.cost[j] - dot_column(j, y_);

        out.max_dual_residual = 0.0;
        for (int p = 0; p < c_.m; ++p) {
            double d = c_.cost[basic_[p]] - dot_column(basic_[p], y_);
            out.max_dual_residual = std::max(out.max_dual_residual, std::abs(d));
        }

        // Primal residual from the reported point, per row sense and bounds.
        std::vector<double> act(c_.m, 0.0);
        for (int j = 0; j < c_.n; ++j) {
            double v = full[j];
            if (v == 0.0)
                continue;
            for (int e = c_.cptr[j]; e < c_.cptr[j + 1]; ++e)
                act[c_.cidx[e]] += c_.cval[e] * v;
        }
        double res = 0.0;
        for (int i = 0; i < c_.m; ++i) {
            double diff = act[i] - lp_.rhs[i];
            switch (lp_.senses[i]) {
            case RowSense::LessEqual: res = std::max(res, diff); break;
            case RowSense::GreaterEqual: res = std::max(res, -diff); break;
            case RowSense::Equal: res = std::max(res, std::abs(diff)); break;
            }
        }
        for (int j = 0; j < c_.n; ++j) {
            res = std::max(res, c_.lo[j] - full[j]);
            res = std::max(res, full[j] - c_.up[j]);
        }
        out.max_primal_residual = std::max(res, 0.0);

        out.basis.cols.assign(vstat_.begin(), vstat_.begin() + c_.n);
        out.basis.rows.assign(vstat_.begin() + c_.n, vstat_.end());
    }

    struct Eta {
        int pos = 0;
        double pivot = 0.0;
        std::vector<std::pair<int, double>> others;
    };

    const StandardFormLP& lp_;
    SolverOptions opts_;
    CompiledLP c_;
    SparseLU lu_;
    std::vector<Eta> etas_;
    long eta_nnz_ = 0;
    std::vector<int> basic_;
    std::vector<VarStatus> vstat_;
    std::vector<double> xb_, y_, spike_, work_, scratch_;
    long iters_ = 0;
    long max_iters_ = 0;
    long restarts_ = 0;
};

} // namespace detail

inline LPSolution solve_lp(const StandardFormLP& lp, const SolverOptions& opts = {})
{
    lp.validate();
    opts.validate();
    detail::Simplex s(lp, opts);
    return s.run();
}

inline LPSolution warm_solve(const StandardFormLP& lp, const Basis& basis,
                             SolverOptions opts = {})
{
    opts.warm_basis = &basis;
    return solve_lp(lp, opts);
}

} // namespace battplan
