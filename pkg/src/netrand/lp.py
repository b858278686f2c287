"""Linear programs: representation, solving, export, and verification.

Programs are built once and then treated as immutable.  The in-process
solver is HiGHS via :func:`scipy.optimize.linprog`; every reported optimum
is re-verified against the stored rows, independently of solver internals.
Large instances can be exported to a free-format MPS file and solved
externally, with :func:`import_solution` re-verifying the result.

For infeasibility claims that must survive exact scrutiny there is a small
rational-arithmetic phase-1 simplex (:func:`exact_equality_feasibility`)
that produces either an exact feasible point or an exact Farkas certificate.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import SolutionShapeMismatch

FEASIBILITY_TOL = 1e-8
IMPORT_TOL = 1e-7

_STATUS_FROM_SCIPY = {
    0: "Optimal",
    1: "IterationLimit",
    2: "Infeasible",
    3: "Unbounded",
    4: "Numerical",
}


class LinearProgram:
    """Sparse LP: objective sense, equality/inequality rows, [lo, hi] bounds.

    Rows are stored in insertion order, which fixes the MPS row order and
    makes exports byte-reproducible.
    """

    def __init__(self, num_vars: int, sense: str = "min"):
        if sense not in ("min", "max", "feasibility"):
            raise ValueError(f"unknown sense {sense!r}")
        self.num_vars = int(num_vars)
        self.sense = sense
        self.obj_idx = np.zeros(0, dtype=np.int64)
        self.obj_coef = np.zeros(0, dtype=float)
        self._blocks = []  # (rows, cols, data, nrows) COO triplets per block
        self._relations = []
        self._rhs = []
        self.num_rows = 0
        self.bounds_lo = np.zeros(num_vars, dtype=float)
        self.bounds_hi = np.full(num_vars, np.inf, dtype=float)
        self._A = None

    # -- construction -------------------------------------------------------

    def set_objective(self, indices, coeffs):
        self.obj_idx = np.asarray(indices, dtype=np.int64)
        self.obj_coef = np.asarray(coeffs, dtype=float)
        if np.any(self.obj_idx >= self.num_vars) or np.any(self.obj_idx < 0):
            raise IndexError("objective index out of range")
        if not np.all(np.isfinite(self.obj_coef)):
            raise ValueError("objective coefficients must be finite")

    def add_row(self, indices, coeffs, relation: str, rhs: float):
        idx = np.asarray(indices, dtype=np.int64)
        self.add_rows(np.zeros(len(idx), dtype=np.int64), idx,
                      np.asarray(coeffs, dtype=float), [relation], [rhs])

    def add_rows(self, rows, cols, data, relations, rhs):
        """Append a block of rows given as COO triplets.

        ``rows`` are 0-based within the block; ``relations`` is a sequence
        over the block's rows with entries '=', '<=' or '>='.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        data = np.asarray(data, dtype=float)
        if np.any(cols >= self.num_vars) or np.any(cols < 0):
            raise IndexError("constraint index out of range")
        if not np.all(np.isfinite(data)):
            raise ValueError("constraint coefficients must be finite")
        nrows = len(relations)
        if rows.size and rows.max() >= nrows:
            raise IndexError("row index exceeds block size")
        self._blocks.append((rows + self.num_rows, cols, data))
        self._relations.extend(relations)
        self._rhs.extend(float(v) for v in rhs)
        self.num_rows += nrows
        self._A = None

    def set_bounds(self, index: int, lo: float, hi: float):
        self.bounds_lo[index] = lo
        self.bounds_hi[index] = hi

    # -- assembled views ----------------------------------------------------

    @property
    def matrix(self) -> sp.csr_matrix:
        if self._A is None or self._A.shape[0] != self.num_rows:
            if self._blocks:
                rows = np.concatenate([b[0] for b in self._blocks])
                cols = np.concatenate([b[1] for b in self._blocks])
                data = np.concatenate([b[2] for b in self._blocks])
            else:
                rows = cols = np.zeros(0, dtype=np.int64)
                data = np.zeros(0, dtype=float)
            self._A = sp.coo_matrix(
                (data, (rows, cols)), shape=(self.num_rows, self.num_vars)
            ).tocsr()
        return self._A

    @property
    def relations(self) -> np.ndarray:
        return np.asarray(self._relations, dtype=object)

    @property
    def rhs(self) -> np.ndarray:
        return np.asarray(self._rhs, dtype=float)

    def objective_value(self, x) -> float:
        return float(np.dot(self.obj_coef, np.asarray(x)[self.obj_idx]))


@dataclass
class SolveResult:
    status: str
    optimum: float | None = None
    assignment: np.ndarray | None = None
    max_residual: float | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class ResidualReport:
    max_residual: float
    per_constraint: np.ndarray
    max_bound_violation: float
    worst_row: int


def verify_assignment(program, assignment, tol: float = FEASIBILITY_TOL):
    """Recompute every constraint residual of ``program`` at ``assignment``.

    Works for :class:`LinearProgram` and for
    :class:`netrand.bilinear.BilinearProgram` (duck-typed via a
    ``residuals`` method).  Entirely independent of any solver state.
    """
    if hasattr(program, "residuals"):
        per = program.residuals(assignment)
        worst = int(np.argmax(per)) if per.size else 0
        bound_v = program.bound_violation(assignment)
        return ResidualReport(
            max_residual=float(max(per.max() if per.size else 0.0, bound_v)),
            per_constraint=per,
            max_bound_violation=bound_v,
            worst_row=worst,
        )
    x = np.asarray(assignment, dtype=float)
    if x.shape != (program.num_vars,):
        raise SolutionShapeMismatch(
            f"assignment has length {x.size}, expected {program.num_vars}"
        )
    ax = program.matrix @ x
    rel = program.relations
    rhs = program.rhs
    per = np.zeros(program.num_rows, dtype=float)
    eq = rel == "="
    per[eq] = np.abs(ax[eq] - rhs[eq])
    le = rel == "<="
    per[le] = np.maximum(ax[le] - rhs[le], 0.0)
    ge = rel == ">="
    per[ge] = np.maximum(rhs[ge] - ax[ge], 0.0)
    bound_v = float(
        max(
            np.max(np.maximum(program.bounds_lo - x, 0.0), initial=0.0),
            np.max(
                np.maximum(x - program.bounds_hi, 0.0),
                initial=0.0,
                where=np.isfinite(program.bounds_hi),
            ),
        )
    )
    worst = int(np.argmax(per)) if per.size else 0
    return ResidualReport(
        max_residual=float(max(per.max() if per.size else 0.0, bound_v)),
        per_constraint=per,
        max_bound_violation=bound_v,
        worst_row=worst,
    )


def solve_lp(lp: LinearProgram, feas_tol: float = FEASIBILITY_TOL) -> SolveResult:
    """Solve an LP; the reported optimum is re-verified, never trusted.

    Failures surface through the ``status`` field, never as exceptions.
    """
    if lp.sense == "max":
        c = np.zeros(lp.num_vars)
        c[lp.obj_idx] = -lp.obj_coef
    elif lp.sense == "min":
        c = np.zeros(lp.num_vars)
        c[lp.obj_idx] = lp.obj_coef
    else:
        c = np.zeros(lp.num_vars)
    A = lp.matrix
    rel = lp.relations
    rhs = lp.rhs
    eq = rel == "="
    le = rel == "<="
    ge = rel == ">="
    A_eq = A[eq] if eq.any() else None
    b_eq = rhs[eq] if eq.any() else None
    ub_parts, ub_rhs = [], []
    if le.any():
        ub_parts.append(A[le])
        ub_rhs.append(rhs[le])
    if ge.any():
        ub_parts.append(-A[ge])
        ub_rhs.append(-rhs[ge])
    A_ub = sp.vstack(ub_parts).tocsr() if ub_parts else None
    b_ub = np.concatenate(ub_rhs) if ub_parts else None
    bounds = np.column_stack([lp.bounds_lo, lp.bounds_hi])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9},
    )
    status = _STATUS_FROM_SCIPY.get(res.status, "Numerical")
    if status != "Optimal":
        return SolveResult(status=status, meta={"message": res.message})
    x = np.asarray(res.x, dtype=float)
    report = verify_assignment(lp, x)
    optimum = lp.objective_value(x) if lp.sense != "feasibility" else 0.0
    if report.max_residual > feas_tol:
        return SolveResult(
            status="Numerical",
            optimum=optimum,
            assignment=x,
            max_residual=report.max_residual,
            meta={"message": "solution violates feasibility tolerance"},
        )
    return SolveResult(
        status="Optimal",
        optimum=optimum,
        assignment=x,
        max_residual=report.max_residual,
        meta={"iterations": int(getattr(res, "nit", -1))},
    )


# -- MPS export / import ------------------------------------------------------
#
# Free-format MPS, sections NAME, ROWS, COLUMNS, RHS, BOUNDS, ENDATA.  The
# objective row always encodes the *minimization* form (maximization
# objectives are negated on write, since the subset carries no OBJSENSE).
# Rows are named R1, R2, ... in insertion order and columns C1, C2, ... in
# variable order; coefficients carry 17 significant digits, making exports
# byte-identical across runs.


def export_mps(lp: LinearProgram, path, name: str = "NETRAND") -> None:
    rel_tag = {"=": "E", "<=": "L", ">=": "G"}
    lines = [f"NAME {name}", "ROWS", " N OBJ"]
    rel = lp.relations
    for i in range(lp.num_rows):
        lines.append(f" {rel_tag[rel[i]]} R{i + 1}")
    lines.append("COLUMNS")
    obj = np.zeros(lp.num_vars)
    sign = -1.0 if lp.sense == "max" else 1.0
    obj[lp.obj_idx] = sign * lp.obj_coef
    A = lp.matrix.tocsc()
    for j in range(lp.num_vars):
        if obj[j] != 0.0:
            lines.append(f" C{j + 1} OBJ {obj[j]:.17g}")
        start, end = A.indptr[j], A.indptr[j + 1]
        order = np.argsort(A.indices[start:end], kind="stable")
        for k in order:
            i = A.indices[start + k]
            v = A.data[start + k]
            if v != 0.0:
                lines.append(f" C{j + 1} R{i + 1} {v:.17g}")
    lines.append("RHS")
    rhs = lp.rhs
    for i in range(lp.num_rows):
        if rhs[i] != 0.0:
            lines.append(f" RHS R{i + 1} {rhs[i]:.17g}")
    lines.append("BOUNDS")
    for j in range(lp.num_vars):
        lo, hi = lp.bounds_lo[j], lp.bounds_hi[j]
        if lo == 0.0 and np.isposinf(hi):
            continue  # MPS default
        if np.isneginf(lo) and np.isposinf(hi):
            lines.append(f" FR BND C{j + 1}")
            continue
        if lo != 0.0:
            if np.isneginf(lo):
                lines.append(f" MI BND C{j + 1}")
            else:
                lines.append(f" LO BND C{j + 1} {lo:.17g}")
        if not np.isposinf(hi):
            lines.append(f" UP BND C{j + 1} {hi:.17g}")
    lines.append("ENDATA")
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def import_solution(lp: LinearProgram, path, tol: float = IMPORT_TOL) -> SolveResult:
    """Read one decimal per line in variable order and re-verify it.

    Feasibility within ``tol`` yields status Optimal (optimality itself is
    the external solver's claim); larger residuals yield status Numerical.
    """
    with open(path, "r", encoding="utf-8") as fh:
        vals = [line.strip() for line in fh if line.strip()]
    if len(vals) != lp.num_vars:
        raise SolutionShapeMismatch(
            f"solution file has {len(vals)} values, expected {lp.num_vars}"
        )
    try:
        x = np.array([float(v) for v in vals])
    except ValueError as exc:
        raise SolutionShapeMismatch(f"bad value in solution file: {exc}") from exc
    report = verify_assignment(lp, x, tol)
    optimum = lp.objective_value(x) if lp.sense != "feasibility" else 0.0
    status = "Optimal" if report.max_residual <= tol else "Numerical"
    return SolveResult(
        status=status,
        optimum=optimum,
        assignment=x,
        max_residual=report.max_residual,
    )


# -- exact rational feasibility ------------------------------------------------


@dataclass
class ExactFeasibility:
    feasible: bool
    point: list | None = None     # exact Fractions when feasible
    farkas: list | None = None    # exact Fractions: y with A^T y <= 0, b^T y > 0

    def check(self, rows, rhs):
        """Re-verify the certificate against the exact system."""
        if self.feasible:
            for row, b in zip(rows, rhs):
                acc = Fraction(0)
                for j, a in row:
                    acc += a * self.point[j]
                if acc != b:
                    return False
            return all(v >= 0 for v in self.point)
        combo = {}
        for y, row in zip(self.farkas, rows):
            for j, a in row:
                combo[j] = combo.get(j, Fraction(0)) + y * a
        if any(v > 0 for v in combo.values()):
            return False
        return sum(y * b for y, b in zip(self.farkas, rhs)) > 0


def exact_equality_feasibility(rows, rhs, num_vars, max_cells=2_000_000):
    """Exact phase-1 simplex for {Ax = b, x >= 0} in rational arithmetic.

    ``rows`` is a list of sparse rows [(col, Fraction), ...] and ``rhs`` a
    list of Fractions.  Uses Bland's rule, so it terminates on degenerate
    systems.  Returns an :class:`ExactFeasibility` whose certificate has
    been re-checked exactly before being handed back.
    """
    m = len(rows)
    n = int(num_vars)
    if m * (n + m + 1) > max_cells:
        raise ValueError("system too large for exact rational verification")
    # Tableau over columns [x | artificials | rhs]; flip rows so b >= 0.
    T = [[Fraction(0)] * (n + m + 1) for _ in range(m)]
    for i, (row, b) in enumerate(zip(rows, rhs)):
        flip = -1 if b < 0 else 1
        for j, a in row:
            T[i][j] += flip * a
        T[i][n + i] = Fraction(1)
        T[i][n + m] = flip * b
    basis = [n + i for i in range(m)]
    # Reduced-cost row for phase-1 objective (sum of artificials).
    z = [Fraction(0)] * (n + m + 1)
    for i in range(m):
        for j in range(n + m + 1):
            z[j] += T[i][j]
    # z[j] currently holds sum of column entries; reduced cost of column j
    # is c_j - that sum for artificial cost vector (0...0,1...1).
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    red = [cost[j] - z[j] for j in range(n + m)]

    while True:
        enter = -1
        for j in range(n + m):
            if red[j] < 0:
                enter = j
                break  # Bland: smallest index
        if enter < 0:
            break
        leave, best = -1, None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][n + m] / T[i][enter]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best, leave = ratio, i
        if leave < 0:
            break  # phase-1 objective is bounded; cannot happen, guard anyway
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [v - f * w for v, w in zip(T[i], T[leave])]
        f = red[enter]
        if f != 0:
            red = [v - f * w for v, w in zip(red, T[leave][: n + m])]
        basis[leave] = enter

    total = sum(T[i][n + m] for i in range(m) if basis[i] >= n)
    if total == 0:
        point = [Fraction(0)] * n
        for i, bvar in enumerate(basis):
            if bvar < n:
                point[bvar] = T[i][n + m]
        result = ExactFeasibility(feasible=True, point=point)
    else:
        # y_i = 1 - reduced cost of artificial i gives a Farkas certificate
        # for the flipped system; undo the flips afterwards.
        y = [Fraction(1) - red[n + i] for i in range(m)]
        y = [yi if rhs[i] >= 0 else -yi for i, yi in enumerate(y)]
        result = ExactFeasibility(feasible=False, farkas=y)
    if not result.check(rows, rhs):
        raise AssertionError("exact certificate failed its own re-check")
    return result


def lp_to_exact_rows(lp: LinearProgram):
    """Convert an equality-only LP with default bounds to exact form."""
    if not np.all(lp.relations == "="):
        raise ValueError("exact verification supports equality rows only")
    if np.any(lp.bounds_lo != 0.0) or np.any(np.isfinite(lp.bounds_hi)):
        raise ValueError("exact verification supports x >= 0 bounds only")
    A = lp.matrix.tocsr()
    rows = []
    for i in range(lp.num_rows):
        start, end = A.indptr[i], A.indptr[i + 1]
        rows.append(
            [(int(j), Fraction(float(v)))
             for j, v in zip(A.indices[start:end], A.data[start:end])]
        )
    rhs = [Fraction(float(v)) for v in lp.rhs]
    return rows, rhs
