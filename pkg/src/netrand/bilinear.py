"""Bilinear feasibility programs and an alternating-LP search heuristic.

A program has two variable blocks; every product couples one variable from
each block, so fixing either block turns all rows linear.  The search
alternates slack-minimizing LPs between the blocks, restarting from mixed
random/corner initializations.  A returned feasible point is always
re-verified by exact recomputation; failure to find one is reported as
Inconclusive and proves nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, solve_lp


@dataclass
class BilinearRow:
    """lin_a . x_a + lin_b . x_b + sum coef * x_a[i] * x_b[j] (rel) rhs"""

    lin_a_idx: np.ndarray
    lin_a_coef: np.ndarray
    lin_b_idx: np.ndarray
    lin_b_coef: np.ndarray
    bil_a: np.ndarray
    bil_b: np.ndarray
    bil_coef: np.ndarray
    relation: str
    rhs: float


class BilinearProgram:
    def __init__(self, n_a: int, n_b: int):
        self.n_a = int(n_a)
        self.n_b = int(n_b)
        self.rows: list[BilinearRow] = []
        self.bounds_a = [(0.0, np.inf)] * self.n_a
        self.bounds_b = [(0.0, np.inf)] * self.n_b

    def add_row(
        self,
        lin_a=((), ()),
        lin_b=((), ()),
        bilinear=((), (), ()),
        relation="=",
        rhs=0.0,
    ):
        ba, bb, bc = bilinear
        row = BilinearRow(
            lin_a_idx=np.asarray(lin_a[0], dtype=np.int64),
            lin_a_coef=np.asarray(lin_a[1], dtype=float),
            lin_b_idx=np.asarray(lin_b[0], dtype=np.int64),
            lin_b_coef=np.asarray(lin_b[1], dtype=float),
            bil_a=np.asarray(ba, dtype=np.int64),
            bil_b=np.asarray(bb, dtype=np.int64),
            bil_coef=np.asarray(bc, dtype=float),
            relation=relation,
            rhs=float(rhs),
        )
        if row.bil_a.size and (row.bil_a.max() >= self.n_a or row.bil_b.max() >= self.n_b):
            raise IndexError("bilinear term index out of range")
        self.rows.append(row)

    # -- exact recomputation ------------------------------------------------

    def row_value(self, row: BilinearRow, xa, xb) -> float:
        v = float(
            np.dot(row.lin_a_coef, xa[row.lin_a_idx])
            + np.dot(row.lin_b_coef, xb[row.lin_b_idx])
        )
        if row.bil_a.size:
            v += float(np.dot(row.bil_coef, xa[row.bil_a] * xb[row.bil_b]))
        return v

    def residuals(self, assignment) -> np.ndarray:
        x = np.asarray(assignment, dtype=float)
        xa, xb = x[: self.n_a], x[self.n_a :]
        out = np.zeros(len(self.rows))
        for i, row in enumerate(self.rows):
            v = self.row_value(row, xa, xb) - row.rhs
            if row.relation == "=":
                out[i] = abs(v)
            elif row.relation == "<=":
                out[i] = max(v, 0.0)
            else:
                out[i] = max(-v, 0.0)
        return out

    def bound_violation(self, assignment) -> float:
        x = np.asarray(assignment, dtype=float)
        worst = 0.0
        for v, (lo, hi) in zip(x, self.bounds_a + self.bounds_b):
            worst = max(worst, lo - v, v - hi if np.isfinite(hi) else 0.0)
        return max(worst, 0.0)


@dataclass
class FeasibleResult:
    assignment_a: np.ndarray
    assignment_b: np.ndarray
    max_residual: float
    restart_index: int
    rounds: int

    @property
    def assignment(self) -> np.ndarray:
        return np.concatenate([self.assignment_a, self.assignment_b])


@dataclass
class Inconclusive:
    best_residual: float
    restarts: int
    linear_relaxation_infeasible: bool = False
    meta: dict = field(default_factory=dict)


def _phase_lp(bp: BilinearProgram, fix_b: bool, fixed: np.ndarray) -> LinearProgram:
    """LP over the free block minimizing total violation of all rows."""
    n_free = bp.n_a if fix_b else bp.n_b
    n_rows = len(bp.rows)
    # one violation variable per inequality, a pair per equality
    lp = LinearProgram(n_free + 2 * n_rows, sense="min")
    bounds = bp.bounds_a if fix_b else bp.bounds_b
    for j, (lo, hi) in enumerate(bounds):
        lp.set_bounds(j, lo, hi)
    obj_idx, obj_coef = [], []
    for i, row in enumerate(bp.rows):
        if fix_b:
            idx = list(row.lin_a_idx)
            coef = list(row.lin_a_coef)
            const = float(np.dot(row.lin_b_coef, fixed[row.lin_b_idx]))
            for ia, ib, c in zip(row.bil_a, row.bil_b, row.bil_coef):
                idx.append(int(ia))
                coef.append(float(c) * float(fixed[ib]))
        else:
            idx = list(row.lin_b_idx)
            coef = list(row.lin_b_coef)
            const = float(np.dot(row.lin_a_coef, fixed[row.lin_a_idx]))
            for ia, ib, c in zip(row.bil_a, row.bil_b, row.bil_coef):
                idx.append(int(ib))
                coef.append(float(c) * float(fixed[ia]))
        rhs = row.rhs - const
        s_plus = n_free + 2 * i
        s_minus = n_free + 2 * i + 1
        if row.relation == "=":
            lp.add_row(idx + [s_plus, s_minus], coef + [1.0, -1.0], "=", rhs)
            obj_idx += [s_plus, s_minus]
            obj_coef += [1.0, 1.0]
        elif row.relation == "<=":
            lp.add_row(idx + [s_plus], coef + [-1.0], "<=", rhs)
            obj_idx.append(s_plus)
            obj_coef.append(1.0)
        else:
            lp.add_row(idx + [s_plus], coef + [1.0], ">=", rhs)
            obj_idx.append(s_plus)
            obj_coef.append(1.0)
    lp.set_objective(obj_idx, obj_coef)
    return lp


def _linear_relaxation_feasible(bp: BilinearProgram) -> bool:
    """Feasibility of the purely linear rows over both blocks jointly."""
    lp = LinearProgram(bp.n_a + bp.n_b, sense="feasibility")
    for j, (lo, hi) in enumerate(bp.bounds_a):
        lp.set_bounds(j, lo, hi)
    for j, (lo, hi) in enumerate(bp.bounds_b):
        lp.set_bounds(bp.n_a + j, lo, hi)
    for row in bp.rows:
        if row.bil_a.size:
            continue
        idx = list(row.lin_a_idx) + [bp.n_a + j for j in row.lin_b_idx]
        coef = list(row.lin_a_coef) + list(row.lin_b_coef)
        lp.add_row(idx, coef, row.relation, row.rhs)
    return solve_lp(lp).status == "Optimal"


def _initial_b(bp: BilinearProgram, rng: np.random.Generator, restart: int):
    xb = np.empty(bp.n_b)
    for j, (lo, hi) in enumerate(bp.bounds_b):
        hi_eff = hi if np.isfinite(hi) else 1.0
        if restart == 0:
            xb[j] = 0.5 * (lo + hi_eff)
        elif restart % 2 == 1:
            xb[j] = lo + (hi_eff - lo) * rng.random()
        else:
            xb[j] = lo if rng.random() < 0.5 else hi_eff  # corner start
    return xb


def solve_bilinear(
    bp: BilinearProgram,
    restarts: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
    max_rounds: int = 30,
):
    """Alternating search for a feasible point of a bilinear program.

    Deterministic given ``seed``; the lowest restart index reaching
    feasibility wins.  A FeasibleResult is a sound certificate (re-verified
    at ``tol``); Inconclusive is not a proof of infeasibility.
    """
    lin_ok = _linear_relaxation_feasible(bp)
    best = np.inf
    if lin_ok:
        for restart in range(restarts):
            rng = np.random.default_rng([seed, restart])
            xb = _initial_b(bp, rng, restart)
            xa = np.zeros(bp.n_a)
            prev = np.inf
            for rnd in range(max_rounds):
                res_a = solve_lp(_phase_lp(bp, fix_b=True, fixed=xb))
                if res_a.status != "Optimal":
                    break
                xa = res_a.assignment[: bp.n_a]
                res_b = solve_lp(_phase_lp(bp, fix_b=False, fixed=xa))
                if res_b.status != "Optimal":
                    break
                xb = res_b.assignment[: bp.n_b]
                resid = bp.residuals(np.concatenate([xa, xb]))
                cur = float(resid.max()) if resid.size else 0.0
                cur = max(cur, bp.bound_violation(np.concatenate([xa, xb])))
                best = min(best, cur)
                if cur <= tol:
                    return FeasibleResult(
                        assignment_a=xa.copy(),
                        assignment_b=xb.copy(),
                        max_residual=cur,
                        restart_index=restart,
                        rounds=rnd + 1,
                    )
                if prev - cur < 1e-12:  # stagnated; try the next restart
                    break
                prev = cur
    else:
        # report the least-violation point of the linear rows alone
        res = solve_lp(_phase_lp(bp, fix_b=True, fixed=np.zeros(bp.n_b)))
        if res.status == "Optimal":
            x = np.concatenate([res.assignment[: bp.n_a], np.zeros(bp.n_b)])
            best = float(bp.residuals(x).max())
    return Inconclusive(
        best_residual=float(best),
        restarts=restarts,
        linear_relaxation_infeasible=not lin_ok,
    )
