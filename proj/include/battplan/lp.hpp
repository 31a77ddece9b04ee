#pragma once

// Problem container for the bounded-variable simplex solver. Rows carry a
// sense and a single right-hand side; columns carry finite or infinite
// bounds. The matrix is kept as row-major triplets; the solver compiles it
// to column storage.

#include <cmath>
#include <string>
#include <vector>

#include "battplan/errors.hpp"
#include "battplan/util.hpp"

namespace battplan {

enum class RowSense : char { LessEqual = 'L', Equal = 'E', GreaterEqual = 'G' };

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;

    bool operator==(const Triplet&) const = default;
};

struct StandardFormLP {
    std::vector<double> objective;
    std::vector<double> col_lower;
    std::vector<double> col_upper;
    std::vector<std::string> col_names;

    std::vector<RowSense> senses;
    std::vector<double> rhs;
    std::vector<std::string> row_names;

    std::vector<Triplet> matrix;  // row-major

    std::string objective_name = "COST";

    int cols() const { return static_cast<int>(objective.size()); }
    int rows() const { return static_cast<int>(rhs.size()); }

    int add_column(std::string name, double lower, double upper, double obj)
    {
        col_names.push_back(std::move(name));
        col_lower.push_back(lower);
        col_upper.push_back(upper);
        objective.push_back(obj);
        return cols() - 1;
    }

    int add_row(std::string name, RowSense sense, double rhs_value)
    {
        row_names.push_back(std::move(name));
        senses.push_back(sense);
        rhs.push_back(rhs_value);
        return rows() - 1;
    }

    void add_entry(int row, int col, double value)
    {
        if (value != 0.0)
            matrix.push_back({row, col, value});
    }

    void validate() const
    {
        if (col_lower.size() != objective.size() || col_upper.size() != objective.size() ||
            col_names.size() != objective.size())
            throw ValidationError("lp: column arrays have inconsistent sizes");
        if (senses.size() != rhs.size() || row_names.size() != rhs.size())
            throw ValidationError("lp: row arrays have inconsistent sizes");
        for (int j = 0; j < cols(); ++j) {
            if (!std::isfinite(objective[j]))
                throw ValidationError("lp: objective coefficient of column \"" + col_names[j] +
                                      "\" is not finite");
            if (std::isnan(col_lower[j]) || std::isnan(col_upper[j]) ||
                col_lower[j] > col_upper[j])
                throw ValidationError("lp: column \"" + col_names[j] + "\" has bounds [" +
                                      format_double(col_lower[j]) + ", " +
                                      format_double(col_upper[j]) + "]");
        }
        for (const Triplet& t : matrix) {
            if (t.row < 0 || t.row >= rows() || t.col < 0 || t.col >= cols())
                throw ValidationError("lp: matrix entry (" + std::to_string(t.row) + ", " +
                                      std::to_string(t.col) + ") out of range");
            if (!std::isfinite(t.value))
                throw ValidationError("lp: matrix entry (" + std::to_string(t.row) + ", " +
                                      std::to_string(t.col) + ") is not finite");
        }
        for (int i = 0; i < rows(); ++i)
            if (!std::isfinite(rhs[i]))
                throw ValidationError("lp: rhs of row \"" + row_names[i] + "\" is not finite");
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper };

// Snapshot of a simplex basis: one status per structural column and one per
// row logical. Reusable across solves of same-shaped LPs.
struct Basis {
    std::vector<VarStatus> cols;
    std::vector<VarStatus> rows;

    bool empty() const { return cols.empty() && rows.empty(); }
    bool operator==(const Basis&) const = default;
};

struct SolverOptions {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-9;
    long max_iterations = 0;        // 0 means automatic (scales with problem size)
    int refactor_interval = 100;
    int degeneracy_streak_limit = 100;  // consecutive degenerate pivots before Bland pricing
    const Basis* warm_basis = nullptr;

    void validate() const
    {
        if (!(feasibility_tol > 0) || !(optimality_tol > 0))
            throw ValidationError("solver tolerances must be positive");
    }
};

struct LPSolution {
    SolveStatus status = SolveStatus::IterationLimit;
    std::vector<double> x;              // per structural column
    std::vector<double> duals;          // per row
    std::vector<double> reduced_costs;  // per structural column
    double objective = 0.0;
    long iterations = 0;
    double max_primal_residual = 0.0;
    double max_dual_residual = 0.0;
    Basis basis;
    bool warm_start_rejected = false;
    std::string note;  // non-empty on numerical fallback paths
};

// Dual objective for a bounded-variable LP: y^T b plus the contribution of
// every column resting on a finite bound with a sign-correct reduced cost.
// At an optimal basis this matches the primal objective.
inline double dual_objective(const StandardFormLP& lp, const std::vector<double>& duals,
                             const std::vector<double>& reduced_costs)
{
    double v = 0.0;
    for (int i = 0; i < lp.rows(); ++i)
        v += duals[i] * lp.rhs[i];
    for (int j = 0; j < lp.cols(); ++j) {
        double d = reduced_costs[j];
        if (d > 0.0 && lp.col_lower[j] > -kInf)
            v += d * lp.col_lower[j];
        else if (d < 0.0 && lp.col_upper[j] < kInf)
            v += d * lp.col_upper[j];
    }
    return v;
}

} // namespace battplan
