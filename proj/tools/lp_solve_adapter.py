#!/usr/bin/env python3
"""Solve a CPLEX-LP file and write the solver contract's solution format.

Usage: lp_solve_adapter.py MODEL.lp OUT.sol

The solution file carries "status {optimal|infeasible|timelimit}", one
"objective V" line, "bound V" after a time limit, and one "var NAME V" line
per variable. OVERTPOLY_ADAPTER_TIME_LIMIT (seconds) caps the solve.
"""

import math
import os
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import LinearConstraint, Bounds, milp

SECTIONS = {"minimize", "maximize", "subject to", "bounds", "binaries", "end"}


def strip_comment(line):
    cut = line.find("\\")
    return line if cut < 0 else line[:cut]


def section_of(line):
    flat = line.strip().lower()
    return flat if flat in SECTIONS else None


def parse_float(tok):
    t = tok.lower()
    if t in ("-infinity", "-inf"):
        return -math.inf
    if t in ("infinity", "inf", "+infinity", "+inf"):
        return math.inf
    return float(tok)


def is_number(tok):
    try:
        parse_float(tok)
        return True
    except ValueError:
        return False


def parse_terms(text, coefs):
    """Accumulate `coef * var` terms from an LP linear expression."""
    sign = 1.0
    coef = None
    for tok in text.replace("+", " + ").replace("-", " - ").split():
        if tok == "+":
            continue
        if tok == "-":
            sign = -sign
            continue
        if is_number(tok):
            coef = (coef if coef is not None else 1.0) * parse_float(tok)
            continue
        value = sign * (coef if coef is not None else 1.0)
        coefs[tok] = coefs.get(tok, 0.0) + value
        sign, coef = 1.0, None
    if coef is not None:
        raise ValueError("dangling coefficient in expression: " + text)


def parse_lp(path):
    sense = "minimize"
    objective = {}
    constraints = []  # (coefs, rel, rhs)
    bounds = {}
    binaries = set()

    section = None
    pending = None  # accumulating constraint text across wrapped lines

    def flush():
        nonlocal pending
        if pending is None:
            return
        body = pending.split(":", 1)[1] if ":" in pending else pending
        for rel in ("<=", ">=", "="):
            cut = body.find(rel)
            if cut >= 0:
                coefs = {}
                parse_terms(body[:cut], coefs)
                rhs = parse_float(body[cut + len(rel):].strip())
                if rel == ">=":
                    coefs = {k: -v for k, v in coefs.items()}
                    rhs, rel = -rhs, "<="
                constraints.append((coefs, rel, rhs))
                pending = None
                return
        raise ValueError("constraint without relation: " + pending)

    with open(path) as fh:
        for raw in fh:
            line = strip_comment(raw).rstrip()
            if not line.strip():
                continue
            named = section_of(line)
            if named is not None:
                if section == "subject to":
                    flush()
                section = named
                continue
            if section in ("minimize", "maximize"):
                sense = section
                body = line.split(":", 1)[1] if ":" in line else line
                parse_terms(body, objective)
            elif section == "subject to":
                if ":" in line and pending is not None:
                    flush()
                pending = line if pending is None else pending + " " + line
                if any(rel in pending for rel in ("<=", ">=", "=")):
                    flush()
            elif section == "bounds":
                toks = line.split()
                if len(toks) == 2 and toks[1].lower() == "free":
                    bounds[toks[0]] = (-math.inf, math.inf)
                elif len(toks) == 3 and toks[1] == "=":
                    v = parse_float(toks[2])
                    bounds[toks[0]] = (v, v)
                elif len(toks) == 3 and toks[1] == ">=":
                    bounds[toks[0]] = (parse_float(toks[2]), math.inf)
                elif len(toks) == 3 and toks[1] == "<=":
                    bounds[toks[0]] = (0.0, parse_float(toks[2]))
                elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                    bounds[toks[2]] = (parse_float(toks[0]), parse_float(toks[4]))
                else:
                    raise ValueError("unrecognized bound line: " + line)
            elif section == "binaries":
                binaries.update(line.split())
            elif section == "end":
                break
            else:
                raise ValueError("content before any section: " + line)
    if section == "subject to":
        flush()
    return sense, objective, constraints, bounds, binaries


def main():
    if len(sys.argv) != 3:
        sys.exit("usage: lp_solve_adapter.py MODEL.lp OUT.sol")
    sense, objective, constraints, var_bounds, binaries = parse_lp(sys.argv[1])

    names = []
    index = {}

    def touch(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)

    for name in objective:
        touch(name)
    for coefs, _, _ in constraints:
        for name in coefs:
            touch(name)
    for name in var_bounds:
        touch(name)
    for name in binaries:
        touch(name)

    n = len(names)
    sign = -1.0 if sense == "maximize" else 1.0
    c = np.zeros(n)
    for name, v in objective.items():
        c[index[name]] = sign * v

    lo = np.zeros(n)
    hi = np.full(n, math.inf)
    for name, (a, b) in var_bounds.items():
        lo[index[name]], hi[index[name]] = a, b
    integrality = np.zeros(n)
    for name in binaries:
        j = index[name]
        integrality[j] = 1
        lo[j] = max(lo[j], 0.0)
        hi[j] = min(hi[j], 1.0)

    rows, cols, vals, clb, cub = [], [], [], [], []
    for r, (coefs, rel, rhs) in enumerate(constraints):
        for name, v in coefs.items():
            rows.append(r)
            cols.append(index[name])
            vals.append(v)
        clb.append(rhs if rel == "=" else -math.inf)
        cub.append(rhs)
    kwargs = {}
    limit = os.environ.get("OVERTPOLY_ADAPTER_TIME_LIMIT")
    if limit:
        kwargs["options"] = {"time_limit": float(limit)}
    lincon = []
    if constraints:
        mat = sparse.csr_matrix((vals, (rows, cols)), shape=(len(constraints), n))
        lincon.append(LinearConstraint(mat, clb, cub))
    res = milp(c=c, constraints=lincon, integrality=integrality, bounds=Bounds(lo, hi), **kwargs)

    lines = []
    if res.status == 0:
        lines.append("status optimal")
    elif res.status == 2:
        lines.append("status infeasible")
    elif res.status == 1:
        lines.append("status timelimit")
    else:
        sys.exit("solver failed: " + str(res.message))

    if res.status != 2:
        lines.append("objective %.17g" % (sign * res.fun))
        if res.status == 1:
            bound = getattr(res, "mip_dual_bound", None)
            if bound is None:
                sys.exit("time limit hit but no dual bound available")
            lines.append("bound %.17g" % (sign * bound))
        for name in names:
            lines.append("var %s %.17g" % (name, res.x[index[name]]))

    with open(sys.argv[2], "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
