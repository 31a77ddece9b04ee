#!/usr/bin/env python3
"""Cross-check an exported MPS file against scipy's HiGHS-backed solver.

Usage: check_mps.py problem.mps [expected_objective [rel_tol]]

Parses the fixed-format MPS subset produced by this project (ROWS, COLUMNS,
RHS, RANGES, BOUNDS), solves it with scipy.optimize.linprog, and prints the
objective. With an expected objective it exits nonzero on mismatch, which
lets the test suite use any locally available scipy as an independent
reference implementation.
"""

import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

INF = float("inf")


def parse_mps(path):
    obj_row = None
    senses = {}
    row_order = []
    cols = {}
    col_order = []
    objective = {}
    entries = []
    rhs = {}
    ranges = {}
    bounds = {}
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("*"):
                continue
            if line[0] not in " \t":
                section = line.split()[0]
                continue
            toks = line.split()
            if section == "ROWS":
                sense, name = toks
                if sense == "N":
                    obj_row = name
                else:
                    senses[name] = sense
                    row_order.append(name)
            elif section == "COLUMNS":
                col = toks[0]
                if col not in cols:
                    cols[col] = len(col_order)
                    col_order.append(col)
                    bounds[col] = [0.0, INF]
                for row, val in zip(toks[1::2], toks[2::2]):
                    v = float(val)
                    if row == obj_row:
                        objective[col] = objective.get(col, 0.0) + v
                    else:
                        entries.append((row, col, v))
            elif section == "RHS":
                for row, val in zip(toks[1::2], toks[2::2]):
                    rhs[row] = float(val)
            elif section == "RANGES":
                for row, val in zip(toks[1::2], toks[2::2]):
                    ranges[row] = float(val)
            elif section == "BOUNDS":
                btype, _, col = toks[:3]
                if btype == "UP":
                    bounds[col][1] = float(toks[3])
                elif btype == "LO":
                    bounds[col][0] = float(toks[3])
                elif btype == "FX":
                    bounds[col] = [float(toks[3]), float(toks[3])]
                elif btype == "FR":
                    bounds[col] = [-INF, INF]
                elif btype == "MI":
                    bounds[col][0] = -INF
                elif btype == "PL":
                    bounds[col][1] = INF
                else:
                    raise ValueError(f"bound type {btype}")
    for row, rng in ranges.items():
        b = rhs.get(row, 0.0)
        sense = senses[row]
        extra = row + ".range"
        if sense == "L":
            senses[extra], rhs[extra] = "G", b - abs(rng)
        elif sense == "G":
            senses[extra], rhs[extra] = "L", b + abs(rng)
        else:
            senses[row] = "G"
            if rng >= 0:
                senses[extra], rhs[extra] = "L", b + rng
            else:
                rhs[row] = b + rng
                senses[extra], rhs[extra] = "L", b
        row_order.append(extra)
        entries.extend((extra, c, v) for (r, c, v) in list(entries) if r == row)
    return obj_row, senses, row_order, col_order, objective, entries, rhs, bounds


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    _, senses, row_order, col_order, objective, entries, rhs, bounds = parse_mps(path)

    ncol = len(col_order)
    col_of = {c: j for j, c in enumerate(col_order)}
    ub_rows = [r for r in row_order if senses[r] in ("L", "G")]
    eq_rows = [r for r in row_order if senses[r] == "E"]
    ub_of = {r: i for i, r in enumerate(ub_rows)}
    eq_of = {r: i for i, r in enumerate(eq_rows)}

    ub_i, ub_j, ub_v = [], [], []
    eq_i, eq_j, eq_v = [], [], []
    for row, col, val in entries:
        if row in ub_of:
            sign = 1.0 if senses[row] == "L" else -1.0
            ub_i.append(ub_of[row])
            ub_j.append(col_of[col])
            ub_v.append(sign * val)
        else:
            eq_i.append(eq_of[row])
            eq_j.append(col_of[col])
            eq_v.append(val)

    c = np.array([objective.get(col, 0.0) for col in col_order])
    b_ub = np.array([(1.0 if senses[r] == "L" else -1.0) * rhs.get(r, 0.0) for r in ub_rows])
    b_eq = np.array([rhs.get(r, 0.0) for r in eq_rows])
    A_ub = coo_matrix((ub_v, (ub_i, ub_j)), shape=(len(ub_rows), ncol))
    A_eq = coo_matrix((eq_v, (eq_i, eq_j)), shape=(len(eq_rows), ncol))

    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[tuple(bounds[col]) for col in col_order], method="highs")
    if not res.success:
        print(f"reference solver status: {res.status} ({res.message})")
        sys.exit(2)
    print(f"reference objective: {res.fun:.10g}")

    if len(sys.argv) >= 3:
        expected = float(sys.argv[2])
        rel = float(sys.argv[3]) if len(sys.argv) >= 4 else 1e-6
        gap = abs(res.fun - expected) / (1.0 + abs(expected))
        if gap > rel:
            print(f"MISMATCH: expected {expected:.10g}, relative gap {gap:.3e}")
            sys.exit(1)
        print(f"match within {rel:g} (relative gap {gap:.3e})")


if __name__ == "__main__":
    main()
