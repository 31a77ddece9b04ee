#include <cstring>
#include <random>

#include "catch_amalgamated.hpp"

#include "battplan/simplex.hpp"

#include "checks.hpp"
#include "oracle.hpp"

using namespace battplan;

TEST_CASE("maximizing a single bounded variable")
{
    StandardFormLP lp;
    int x = lp.add_column("x", 0.0, kInf, -1.0);
    lp.add_row("cap", RowSense::LessEqual, 1.0);
    lp.add_entry(0, x, 1.0);

    LPSolution sol = solve_lp(lp);
    checks::certify_optimal(lp, sol);
    CHECK(sol.x[0] == 1.0);
    CHECK(sol.objective == -1.0);
}

TEST_CASE("minimum over a one-constraint simplex")
{
    StandardFormLP lp;
    int x = lp.add_column("x", 0.0, kInf, 1.0);
    int y = lp.add_column("y", 0.0, kInf, 0.0);
    lp.add_row("sum", RowSense::Equal, 1.0);
    lp.add_entry(0, x, 1.0);
    lp.add_entry(0, y, 1.0);

    LPSolution sol = solve_lp(lp);
    checks::certify_optimal(lp, sol);
    CHECK(sol.x[x] == 0.0);
    CHECK(sol.x[y] == 1.0);
}

TEST_CASE("box-only problems solve by bound flips")
{
    StandardFormLP lp;
    lp.add_column("a", 0.0, 3.0, -1.0);
    lp.add_column("b", -2.0, 5.0, 2.0);

    LPSolution sol = solve_lp(lp);
    checks::certify_optimal(lp, sol);
    CHECK(sol.x[0] == 3.0);
    CHECK(sol.x[1] == -2.0);
    CHECK(sol.objective == -7.0);
}

TEST_CASE("unbounded ray is reported")
{
    StandardFormLP lp;
    lp.add_column("x", 0.0, kInf, -1.0);
    LPSolution sol = solve_lp(lp);
    CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("infeasible systems are certified by phase 1")
{
    SECTION("bound against row")
    {
        StandardFormLP lp;
        int x = lp.add_column("x", 0.0, kInf, 0.0);
        lp.add_row("neg", RowSense::LessEqual, -1.0);
        lp.add_entry(0, x, 1.0);
        CHECK(solve_lp(lp).status == SolveStatus::Infeasible);
    }
    SECTION("contradicting equalities")
    {
        StandardFormLP lp;
        int x = lp.add_column("x", 0.0, kInf, 1.0);
        int y = lp.add_column("y", 0.0, kInf, 1.0);
        lp.add_row("r1", RowSense::Equal, 1.0);
        lp.add_row("r2", RowSense::Equal, 2.0);
        for (int r = 0; r < 2; ++r) {
            lp.add_entry(r, x, 1.0);
            lp.add_entry(r, y, 1.0);
        }
        CHECK(solve_lp(lp).status == SolveStatus::Infeasible);
    }
    SECTION("feasible twin of the contradiction stays optimal")
    {
        StandardFormLP lp;
        int x = lp.add_column("x", 0.0, kInf, 1.0);
        int y = lp.add_column("y", 0.0, kInf, 1.0);
        lp.add_row("r1", RowSense::Equal, 1.0);
        lp.add_row("r2", RowSense::GreaterEqual, 0.5);
        for (int r = 0; r < 2; ++r) {
            lp.add_entry(r, x, 1.0);
            lp.add_entry(r, y, 1.0);
        }
        LPSolution sol = solve_lp(lp);
        checks::certify_optimal(lp, sol);
        CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("free variables can enter in either direction")
{
    StandardFormLP lp;
    int x = lp.add_column("x", -kInf, kInf, 1.0);
    lp.add_row("floor", RowSense::GreaterEqual, -5.0);
    lp.add_entry(0, x, 1.0);

    LPSolution sol = solve_lp(lp);
    checks::certify_optimal(lp, sol);
    CHECK_THAT(sol.x[x], Catch::Matchers::WithinAbs(-5.0, 1e-9));
}

TEST_CASE("classic cycling instance terminates at its optimum")
{
    // Beale's example: Dantzig pricing cycles without safeguards.
    StandardFormLP lp;
    lp.add_column("x1", 0.0, kInf, -0.75);
    lp.add_column("x2", 0.0, kInf, 150.0);
    lp.add_column("x3", 0.0, kInf, -0.02);
    lp.add_column("x4", 0.0, kInf, 6.0);
    lp.add_row("r1", RowSense::LessEqual, 0.0);
    lp.add_row("r2", RowSense::LessEqual, 0.0);
    lp.add_row("r3", RowSense::LessEqual, 1.0);
    lp.add_entry(0, 0, 0.25);
    lp.add_entry(0, 1, -60.0);
    lp.add_entry(0, 2, -0.04);
    lp.add_entry(0, 3, 9.0);
    lp.add_entry(1, 0, 0.5);
    lp.add_entry(1, 1, -90.0);
    lp.add_entry(1, 2, -0.02);
    lp.add_entry(1, 3, 3.0);
    lp.add_entry(2, 2, 1.0);

    LPSolution sol = solve_lp(lp);
    checks::certify_optimal(lp, sol);
    CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(-0.05, 1e-9));

    auto ref = oracle::enumerate_vertices(lp);
    REQUIRE(ref.feasible);
    CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(ref.objective, 1e-9));
}

TEST_CASE("random boxed LPs agree with vertex enumeration")
{
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int optimal_seen = 0, infeasible_seen = 0;
    for (int trial = 0; trial < 160; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int m = 1 + static_cast<int>(rng() % 4);
        StandardFormLP lp;
        for (int j = 0; j < n; ++j)
            lp.add_column("c" + std::to_string(j), 0.0, 1.0 + 2.0 * unit(rng), coef(rng));
        for (int i = 0; i < m; ++i) {
            double r = unit(rng);
            RowSense sense = r < 0.4 ? RowSense::LessEqual
                                     : (r < 0.8 ? RowSense::GreaterEqual : RowSense::Equal);
            lp.add_row("r" + std::to_string(i), sense, coef(rng));
            for (int j = 0; j < n; ++j)
                if (unit(rng) < 0.7)
                    lp.add_entry(i, j, coef(rng));
        }

        LPSolution sol = solve_lp(lp);
        auto ref = oracle::enumerate_vertices(lp);
        INFO("trial " << trial);
        if (ref.feasible) {
            ++optimal_seen;
            checks::certify_optimal(lp, sol);
            REQUIRE_THAT(sol.objective,
                         Catch::Matchers::WithinAbs(ref.objective,
                                                    1e-6 * (1.0 + std::abs(ref.objective))));
        } else {
            ++infeasible_seen;
            REQUIRE(sol.status == SolveStatus::Infeasible);
        }
    }
    // The generator must exercise both outcomes to mean anything.
    CHECK(optimal_seen > 40);
    CHECK(infeasible_seen > 10);
}

TEST_CASE("resolving from the optimal basis takes no pivots")
{
    StandardFormLP lp;
    lp.add_column("x", 0.0, 4.0, -2.0);
    lp.add_column("y", 0.0, 4.0, -1.0);
    lp.add_row("sum", RowSense::LessEqual, 5.0);
    lp.add_entry(0, 0, 1.0);
    lp.add_entry(0, 1, 1.0);

    LPSolution first = solve_lp(lp);
    checks::certify_optimal(lp, first);
    LPSolution again = warm_solve(lp, first.basis);
    checks::certify_optimal(lp, again);
    CHECK(again.iterations == 0);
    CHECK(again.objective == first.objective);
}

TEST_CASE("warm start after a small objective perturbation stays cheap")
{
    // Transportation-shaped instance, dense enough that a cold solve needs
    // a fair number of pivots.
    StandardFormLP lp;
    const int ns = 4, nd = 4;
    for (int s = 0; s < ns; ++s)
        for (int d = 0; d < nd; ++d)
            lp.add_column("f" + std::to_string(s) + std::to_string(d), 0.0, kInf,
                          1.0 + ((s * 7 + d * 3) % 5));
    for (int s = 0; s < ns; ++s) {
        lp.add_row("supply" + std::to_string(s), RowSense::LessEqual, 6.0);
        for (int d = 0; d < nd; ++d)
            lp.add_entry(s, s * nd + d, 1.0);
    }
    for (int d = 0; d < nd; ++d) {
        lp.add_row("demand" + std::to_string(d), RowSense::GreaterEqual, 4.0);
        for (int s = 0; s < ns; ++s)
            lp.add_entry(ns + d, s * nd + d, 1.0);
    }

    LPSolution cold = solve_lp(lp);
    checks::certify_optimal(lp, cold);
    REQUIRE(cold.iterations > 0);

    StandardFormLP perturbed = lp;
    for (int j = 0; j < perturbed.cols(); ++j)
        perturbed.objective[j] += 1e-6 * (j % 3);
    LPSolution warm = warm_solve(perturbed, cold.basis);
    checks::certify_optimal(perturbed, warm);
    CHECK(warm.iterations <= cold.iterations);
    CHECK_FALSE(warm.warm_start_rejected);
}

TEST_CASE("warm start survives a bound change that breaks feasibility")
{
    StandardFormLP lp;
    lp.add_column("x", 0.0, 10.0, -3.0);
    lp.add_column("y", 0.0, 10.0, -2.0);
    lp.add_row("sum", RowSense::LessEqual, 8.0);
    lp.add_entry(0, 0, 1.0);
    lp.add_entry(0, 1, 1.0);

    LPSolution base = solve_lp(lp);
    checks::certify_optimal(lp, base);

    StandardFormLP tightened = lp;
    tightened.col_upper[0] = 2.0;  // previous optimum had x = 8
    LPSolution warm = warm_solve(tightened, base.basis);
    checks::certify_optimal(tightened, warm);
    LPSolution cold = solve_lp(tightened);
    CHECK_THAT(warm.objective, Catch::Matchers::WithinAbs(cold.objective, 1e-9));
}

TEST_CASE("a warm basis of the wrong shape falls back to a cold start")
{
    StandardFormLP lp;
    lp.add_column("x", 0.0, 1.0, -1.0);
    lp.add_row("r", RowSense::LessEqual, 1.0);
    lp.add_entry(0, 0, 1.0);

    Basis wrong;
    wrong.cols = {VarStatus::Basic, VarStatus::Basic};
    wrong.rows = {VarStatus::AtLower};
    LPSolution sol = warm_solve(lp, wrong);
    CHECK(sol.warm_start_rejected);
    checks::certify_optimal(lp, sol);
}

TEST_CASE("identical inputs give bitwise identical solves")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    StandardFormLP lp;
    for (int j = 0; j < 8; ++j)
        lp.add_column("c" + std::to_string(j), 0.0, 5.0, coef(rng));
    for (int i = 0; i < 6; ++i) {
        lp.add_row("r" + std::to_string(i), i % 2 ? RowSense::LessEqual : RowSense::GreaterEqual,
                   coef(rng));
        for (int j = 0; j < 8; ++j)
            lp.add_entry(i, j, coef(rng));
    }

    LPSolution a = solve_lp(lp);
    LPSolution b = solve_lp(lp);
    REQUIRE(a.status == b.status);
    REQUIRE(a.iterations == b.iterations);
    REQUIRE(a.x.size() == b.x.size());
    REQUIRE(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    REQUIRE(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
}

TEST_CASE("iteration cap reports without crashing")
{
    StandardFormLP lp;
    for (int j = 0; j < 6; ++j)
        lp.add_column("c" + std::to_string(j), 0.0, 9.0, -1.0 - j);
    for (int i = 0; i < 4; ++i) {
        lp.add_row("r" + std::to_string(i), RowSense::LessEqual, 10.0);
        for (int j = 0; j < 6; ++j)
            lp.add_entry(i, j, 1.0 + ((i + j) % 3));
    }
    SolverOptions opts;
    opts.max_iterations = 1;
    LPSolution sol = solve_lp(lp, opts);
    CHECK(sol.status == SolveStatus::IterationLimit);
    CHECK(sol.iterations == 1);
}

TEST_CASE("invalid problems are rejected up front")
{
    StandardFormLP lp;
    lp.add_column("x", 1.0, 0.0, 1.0);
    CHECK_THROWS_AS(solve_lp(lp), ValidationError);

    StandardFormLP lp2;
    lp2.add_column("x", 0.0, 1.0, 1.0);
    lp2.add_row("r", RowSense::LessEqual, 1.0);
    lp2.matrix.push_back({5, 0, 1.0});
    CHECK_THROWS_AS(solve_lp(lp2), ValidationError);

    SolverOptions bad;
    bad.feasibility_tol = 0.0;
    StandardFormLP ok;
    ok.add_column("x", 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(solve_lp(ok, bad), ValidationError);
}
