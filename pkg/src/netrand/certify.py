"""End-to-end certification programs.

Presence of randomness: upper bounds on the eavesdropper's guessing
probability via the inflation relaxation (an LP whose optimum bounds the
true beyond-quantum guessing probability from above; randomness is
certified whenever the worst-case bound is < 1).

Absence of randomness: explicit feasibility programs.  A party fed only by
classical sources is fully predictable, so a feasible classical-parents
model is a sound no-randomness certificate; embedded-Bell models extend
this to parties that need one nonclassical parent.  Every certificate is
re-verified by exact recomputation before being returned.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .bilinear import BilinearProgram, FeasibleResult, Inconclusive, solve_bilinear
from .errors import ShapeMismatch, SignalingError, SolverFailure
from .inflate import constraint_system_for
from .lp import (
    LinearProgram,
    exact_equality_feasibility,
    export_mps,
    import_solution,
    lp_to_exact_rows,
    solve_lp,
    verify_assignment,
)
from .networks import Network, attach_eavesdropper, interrupt
from .tables import ProbTable

CERT_TOL = 1e-8


@dataclass
class RandomnessBound:
    """Upper bound on the guessing probability for the target parties."""

    targets: tuple[str, ...]
    x_assign: tuple[int, ...] | None  # None marks a worst-case bound
    level: tuple[int, ...]
    joint: bool
    bound: float
    inflations_used: int
    meta: dict = field(default_factory=dict)


@dataclass
class NoRandomnessCertificate:
    """A verified feasible model proving full predictability of ``parties``."""

    kind: str
    parties: tuple[str, ...]
    d: int | None
    assignment: np.ndarray
    max_residual: float
    recovery_residual: float
    meta: dict = field(default_factory=dict)


@dataclass
class DisprovenByLP:
    """The classical-parents LP is infeasible: no such model exists."""

    exact_confirmed: bool
    farkas: list | None = None
    meta: dict = field(default_factory=dict)


# -- shared helpers ------------------------------------------------------------


def _check_dist_network(dist: ProbTable, network: Network):
    if dist.outcome_cards != network.outcome_cards():
        raise ShapeMismatch(
            f"distribution outcomes {dist.outcome_cards} do not match the "
            f"network's {network.outcome_cards()}"
        )
    if dist.setting_cards != network.setting_cards():
        raise ShapeMismatch(
            f"distribution settings {dist.setting_cards} do not match the "
            f"network's {network.setting_cards()}"
        )
    party, dev = dist.signaling_deviation()
    if dev > 1e-10:
        raise SignalingError(
            f"input distribution signals through party {party}", party, dev
        )


def _eve_encode(grid_vals, base_names, targets, outcome_cards):
    """Per-row Eve index matching the target parties' outcomes."""
    enc = np.zeros(grid_vals[0].shape[0] if grid_vals else 1, dtype=np.int64)
    for t in targets:  # targets are sorted; first target is the major digit
        enc = enc * outcome_cards[base_names.index(t)] + grid_vals[base_names.index(t)]
    return enc


def _compose_guessing_lp(cs, dist: ProbTable):
    """Inflation system plus the observed-marginal pin, objective left unset."""
    lp = LinearProgram(cs.num_vars, sense="max")
    rows, cols, data, rhs = cs.coo
    lp.add_rows(rows, cols, data, ["="] * cs.num_rows, rhs)
    base_names = cs.base_names
    n_base = len(base_names)
    grid_cards = list(dist.setting_cards) + list(dist.outcome_cards)
    total = int(np.prod(grid_cards))
    vals = np.array(np.unravel_index(np.arange(total), grid_cards))
    fixed = {}
    for i, p in enumerate(base_names):
        fixed[cs.p_axis_of_setting(p)] = vals[i]
    for i, p in enumerate(base_names):
        fixed[cs.p_axis_of_outcome(p)] = vals[n_base + i]
    summed = [
        cs.p_axis_of_outcome(n) for n in cs.node_names if n not in base_names
    ]
    cols_p = cs.p_cols(fixed, summed)
    ids = np.repeat(np.arange(total, dtype=np.int64), cols_p.shape[1])
    lp.add_rows(
        ids, cols_p.ravel(), np.ones(cols_p.size), ["="] * total, dist.flat()
    )
    return lp


def _set_guessing_objective(lp, cs, dist, x_assign, targets):
    base_names = cs.base_names
    out_cards = list(dist.outcome_cards)
    total = int(np.prod(out_cards))
    vals = np.array(np.unravel_index(np.arange(total), out_cards))
    grid = [vals[i] for i in range(len(base_names))]
    fixed = {}
    for i, p in enumerate(base_names):
        fixed[cs.p_axis_of_setting(p)] = np.full(total, x_assign[i], dtype=np.int64)
        fixed[cs.p_axis_of_outcome(p)] = grid[i]
    enc = _eve_encode(grid, base_names, targets, dist.outcome_cards)
    for n in cs.node_names:
        if n not in base_names:
            fixed[cs.p_axis_of_outcome(n)] = enc
    cols = cs.p_cols(fixed, [])
    lp.set_objective(cols[:, 0], np.ones(total))


def _modal_probability(dist: ProbTable, network: Network, targets, x_assign) -> float:
    names = network.party_names()
    block = dist.values[tuple(x_assign)]
    sum_axes = tuple(i for i, nm in enumerate(names) if nm not in targets)
    marg = block.sum(axis=sum_axes) if sum_axes else block
    return float(marg.max())


def _scenario_for(network, targets, joint):
    return interrupt(attach_eavesdropper(network, targets, joint))


def guessing_bound(
    dist: ProbTable,
    network: Network,
    targets,
    x_assign,
    level,
    joint: bool = False,
) -> RandomnessBound:
    """LP upper bound on Eve's probability of guessing the targets' outcomes
    at a fixed setting assignment, subject to the inflation relaxation and
    the observed-marginal pin.
    """
    _check_dist_network(dist, network)
    targets = tuple(sorted(targets))
    x_assign = tuple(int(v) for v in x_assign)
    if len(x_assign) != len(network.parties):
        raise ShapeMismatch("x_assign needs one entry per party")
    for v, card in zip(x_assign, network.setting_cards()):
        if not 0 <= v < card:
            raise ShapeMismatch(f"setting value {v} out of range for card {card}")
    scenario = _scenario_for(network, targets, joint)
    t0 = time.perf_counter()
    cs = constraint_system_for(scenario, level)
    lp = _compose_guessing_lp(cs, dist)
    _set_guessing_objective(lp, cs, dist, x_assign, targets)
    res = solve_lp(lp)
    if res.status != "Optimal":
        raise SolverFailure(f"guessing LP ended with status {res.status}", res.status)
    bound = float(res.optimum)
    floor = _modal_probability(dist, network, targets, x_assign)
    if bound < floor - 1e-6 or bound > 1.0 + 1e-6:
        raise SolverFailure(
            f"bound {bound} escapes [{floor}, 1] beyond tolerance", res.status
        )
    return RandomnessBound(
        targets=targets,
        x_assign=x_assign,
        level=tuple(level),
        joint=joint,
        bound=bound,
        inflations_used=len(cs.inflations),
        meta={
            "status": res.status,
            "backend": "reference",
            "num_vars": cs.num_vars,
            "num_rows": lp.num_rows,
            "large_instance": cs.num_vars > 200_000,
            "wall_time_s": time.perf_counter() - t0,
            "max_residual": res.max_residual,
        },
    )


def worst_guess_bound(
    dist: ProbTable,
    network: Network,
    targets,
    level,
    joint: bool = False,
) -> RandomnessBound:
    """Minimum of the fixed-setting bounds over all setting assignments.

    Randomness is certified for the targets exactly when the returned bound
    is < 1.
    """
    _check_dist_network(dist, network)
    targets = tuple(sorted(targets))
    scenario = _scenario_for(network, targets, joint)
    t0 = time.perf_counter()
    cs = constraint_system_for(scenario, level)
    lp = _compose_guessing_lp(cs, dist)
    best = None
    best_x = None
    for x_assign in np.ndindex(*network.setting_cards()):
        _set_guessing_objective(lp, cs, dist, x_assign, targets)
        res = solve_lp(lp)
        if res.status != "Optimal":
            raise SolverFailure(
                f"guessing LP ended with status {res.status}", res.status
            )
        if best is None or res.optimum < best:
            best = float(res.optimum)
            best_x = tuple(int(v) for v in x_assign)
    return RandomnessBound(
        targets=targets,
        x_assign=best_x,
        level=tuple(level),
        joint=joint,
        bound=best,
        inflations_used=len(cs.inflations),
        meta={
            "status": "Optimal",
            "backend": "reference",
            "num_vars": cs.num_vars,
            "num_rows": lp.num_rows,
            "large_instance": cs.num_vars > 200_000,
            "wall_time_s": time.perf_counter() - t0,
            "worst_case": True,
        },
    )


def export_guessing_lp(
    dist, network, targets, x_assign, level, path, joint: bool = False
) -> dict:
    """Write the guessing LP as a free-format MPS file for an external solver."""
    _check_dist_network(dist, network)
    targets = tuple(sorted(targets))
    scenario = _scenario_for(network, targets, joint)
    cs = constraint_system_for(scenario, level)
    lp = _compose_guessing_lp(cs, dist)
    _set_guessing_objective(lp, cs, dist, tuple(x_assign), targets)
    export_mps(lp, path)
    return {
        "path": str(path),
        "num_vars": lp.num_vars,
        "num_rows": lp.num_rows,
        "sense": "max",
        "note": "MPS encodes the minimization form; negate the optimum",
    }


def import_guessing_solution(
    dist, network, targets, x_assign, level, sol_path, joint: bool = False
) -> RandomnessBound:
    """Re-verify an externally computed solution of an exported guessing LP."""
    _check_dist_network(dist, network)
    targets = tuple(sorted(targets))
    scenario = _scenario_for(network, targets, joint)
    cs = constraint_system_for(scenario, level)
    lp = _compose_guessing_lp(cs, dist)
    _set_guessing_objective(lp, cs, dist, tuple(x_assign), targets)
    res = import_solution(lp, sol_path)
    if res.status != "Optimal":
        raise SolverFailure(f"imported solution status {res.status}", res.status)
    return RandomnessBound(
        targets=targets,
        x_assign=tuple(x_assign),
        level=tuple(level),
        joint=joint,
        bound=float(res.optimum),
        inflations_used=len(cs.inflations),
        meta={"status": res.status, "backend": "export", "max_residual": res.max_residual},
    )


# -- unpacked-variable utilities ----------------------------------------------


def _cbar_card(c_card: int, slots: int) -> int:
    return c_card**slots


def _cbar_tuples(c_card: int, slots: int) -> np.ndarray:
    """(n, slots) array of unpacked outcome tuples, slot 0 as major digit."""
    n = _cbar_card(c_card, slots)
    return np.array(np.unravel_index(np.arange(n), (c_card,) * slots)).T


def _q_index(shape, x, a, b, cbar):
    return ((x * shape[1] + a) * shape[2] + b) * shape[3] + cbar


def _classical_parents_rows(lp, q_shape, p_a_given_x, family):
    """Rows shared by the classical-parents programs: unit normalization,
    setting independence of the (B, unpacked-C) marginal, and independence
    of A from the unpacked block (factorization, linearized through the
    fixed A-marginal)."""
    X, A, B, CBAR = q_shape
    for x in range(X):
        idx = [
            _q_index(q_shape, x, a, b, cb)
            for a in range(A)
            for b in range(B)
            for cb in range(CBAR)
        ]
        lp.add_row(idx, np.ones(len(idx)), "=", 1.0)
    family["normalization"] = family.get("normalization", 0) + X
    for b in range(B):
        for cb in range(CBAR):
            base = [_q_index(q_shape, 0, a, b, cb) for a in range(A)]
            for x in range(1, X):
                cur = [_q_index(q_shape, x, a, b, cb) for a in range(A)]
                lp.add_row(
                    cur + base, [1.0] * A + [-1.0] * A, "=", 0.0
                )
    family["marginal-independence"] = family.get("marginal-independence", 0) + B * CBAR * (X - 1)
    for x in range(X):
        for a in range(A):
            for cb in range(CBAR):
                lhs = [_q_index(q_shape, x, a, b, cb) for b in range(B)]
                rhs_idx = [
                    _q_index(q_shape, 0, ap, bp, cb)
                    for ap in range(A)
                    for bp in range(B)
                ]
                coef = [1.0] * B + [-p_a_given_x[x, a]] * (A * B)
                lp.add_row(lhs + rhs_idx, coef, "=", 0.0)
    family["factorization"] = family.get("factorization", 0) + X * A * CBAR


def no_randomness_biloc_charlie(dist: ProbTable):
    """Classical-parents LP for the end party of the chain network.

    Feasible: the outcomes of party C are fully predictable by a listening
    eavesdropper (certificate returned).  Infeasible: no model with a
    classical C-side source exists; the claim is re-confirmed by an exact
    rational Farkas certificate whenever the system is small enough.
    """
    if dist.num_parties != 3:
        raise ShapeMismatch("expected a three-party distribution")
    if dist.setting_cards[1] != 1:
        raise ShapeMismatch("the middle party must be settingless")
    A, B, C = dist.outcome_cards
    X, _, Z = dist.setting_cards
    CBAR = _cbar_card(C, Z)
    q_shape = (X, A, B, CBAR)
    lp = LinearProgram(X * A * B * CBAR, sense="feasibility")
    families = {}
    # A-marginal is pinned by the recovery constraint, making factorization linear
    p_a_given_x = dist.values.sum(axis=(4, 5))[:, 0, 0, :]  # (X, A)
    _classical_parents_rows(lp, q_shape, p_a_given_x, families)
    tuples = _cbar_tuples(C, Z)
    recovery_start = lp.num_rows
    for x in range(X):
        for z in range(Z):
            for a in range(A):
                for b in range(B):
                    for c in range(C):
                        idx = [
                            _q_index(q_shape, x, a, b, cb)
                            for cb in range(CBAR)
                            if tuples[cb, z] == c
                        ]
                        lp.add_row(
                            idx,
                            np.ones(len(idx)),
                            "=",
                            dist.values[x, 0, z, a, b, c],
                        )
    recovery_end = lp.num_rows
    res = solve_lp(lp)
    if res.status == "Optimal":
        report = verify_assignment(lp, res.assignment)
        rec = float(
            report.per_constraint[recovery_start:recovery_end].max()
        )
        return NoRandomnessCertificate(
            kind="biloc-classical-parents",
            parties=("C",),
            d=None,
            assignment=res.assignment,
            max_residual=report.max_residual,
            recovery_residual=rec,
            meta={"q_shape": q_shape, "families": families},
        )
    if res.status == "Infeasible":
        confirmed = False
        farkas = None
        try:
            rows, rhs = lp_to_exact_rows(lp)
            exact = exact_equality_feasibility(rows, rhs, lp.num_vars)
            if exact.feasible:
                # float solver was wrong; fall through as inconclusive
                return Inconclusive(best_residual=float("nan"), restarts=0,
                                    meta={"note": "exact arithmetic found a point"})
            confirmed = True
            farkas = exact.farkas
        except ValueError:
            pass
        return DisprovenByLP(exact_confirmed=confirmed, farkas=farkas)
    return Inconclusive(
        best_residual=float("nan"), restarts=0, meta={"status": res.status}
    )


def no_randomness_triangle_classical_parents(
    dist: ProbTable,
    d: int,
    placement: str = "C",
    restarts: int = 50,
    seed: int = 0,
):
    """Bilinear classical-parents search for a settingless triangle party.

    The hidden-setting cardinality ``d`` bounds the model search space; a
    feasible point is a verified certificate, while failure to find one is
    Inconclusive (a larger ``d`` may still admit a model).
    """
    if dist.num_parties != 3 or dist.setting_cards != (1, 1, 1):
        raise ShapeMismatch("expected a settingless three-party distribution")
    if d < 1:
        raise ShapeMismatch("hidden cardinality d must be >= 1")
    order = {"A": (1, 2, 0), "B": (0, 2, 1), "C": (0, 1, 2)}
    if placement not in order:
        raise ShapeMismatch(f"placement must be one of A, B, C, not {placement!r}")
    work = dist.permute_parties(order[placement])
    A, B, C = work.outcome_cards
    CBAR = _cbar_card(C, d)
    bp, families = _triangle_parent_rows(work, d, A, B, C, CBAR)
    result = solve_bilinear(bp, restarts=restarts, seed=seed, tol=CERT_TOL)
    if isinstance(result, FeasibleResult):
        report = verify_assignment(bp, result.assignment)
        lo, hi = families["recovery"]
        return NoRandomnessCertificate(
            kind="triangle-classical-parents",
            parties=(placement,),
            d=d,
            assignment=result.assignment,
            max_residual=report.max_residual,
            recovery_residual=float(report.per_constraint[lo:hi].max()),
            meta={
                "restart_index": result.restart_index,
                "rounds": result.rounds,
            },
        )
    return result


def _triangle_parent_rows(work, d, A, B, C, CBAR):
    """Rows of the triangle classical-parents program.

    Block 1 holds the unpacked chain distribution Q(a, b, cbar | x); block 2
    holds the hidden-setting weights and a copy of the unpacked-C marginal
    used to keep the factorization bilinear."""
    q_shape = (d, A, B, CBAR)
    n_q = d * A * B * CBAR
    bp = BilinearProgram(n_q, d + CBAR)
    r_off = d
    families = {}
    row = 0
    for x in range(d):  # normalization of Q
        idx = [
            _q_index(q_shape, x, a, b, cb)
            for a in range(A)
            for b in range(B)
            for cb in range(CBAR)
        ]
        bp.add_row(lin_a=(idx, np.ones(len(idx))), rhs=1.0)
        row += 1
    bp.add_row(lin_b=(list(range(d)), np.ones(d)), rhs=1.0)  # sum of weights
    row += 1
    for b in range(B):  # setting independence of the (B, cbar) marginal
        for cb in range(CBAR):
            base = [_q_index(q_shape, 0, a, b, cb) for a in range(A)]
            for x in range(1, d):
                cur = [_q_index(q_shape, x, a, b, cb) for a in range(A)]
                bp.add_row(
                    lin_a=(cur + base, [1.0] * A + [-1.0] * A), rhs=0.0
                )
                row += 1
    for cb in range(CBAR):  # tie the marginal copy to Q
        idx = [
            _q_index(q_shape, 0, a, b, cb) for a in range(A) for b in range(B)
        ]
        bp.add_row(
            lin_a=(idx, [-1.0] * len(idx)),
            lin_b=([r_off + cb], [1.0]),
            rhs=0.0,
        )
        row += 1
    for x in range(d):  # factorization of A against the unpacked block
        for a in range(A):
            for cb in range(CBAR):
                lhs = [_q_index(q_shape, x, a, b, cb) for b in range(B)]
                prod_a = [
                    _q_index(q_shape, x, a, bp_, cbp)
                    for bp_ in range(B)
                    for cbp in range(CBAR)
                ]
                bp.add_row(
                    lin_a=(lhs, np.ones(B)),
                    bilinear=(
                        prod_a,
                        [r_off + cb] * len(prod_a),
                        [-1.0] * len(prod_a),
                    ),
                    rhs=0.0,
                )
                row += 1
    tuples = _cbar_tuples(C, d)
    rec_start = row
    for a in range(A):  # mixing recovery of the observed distribution
        for b in range(B):
            for c in range(C):
                bil_a, bil_b, bil_c = [], [], []
                for z in range(d):
                    for cb in range(CBAR):
                        if tuples[cb, z] == c:
                            bil_a.append(_q_index(q_shape, z, a, b, cb))
                            bil_b.append(z)
                            bil_c.append(1.0)
                bp.add_row(
                    bilinear=(bil_a, bil_b, bil_c),
                    rhs=work.values[0, 0, 0, a, b, c],
                )
                row += 1
    families["recovery"] = (rec_start, row)
    return bp, families


# -- embedded-Bell programs -----------------------------------------------------


def _qp_index(shape, x, y, s, a, b, e):
    return ((((x * shape[1] + y) * shape[2] + s) * shape[3] + a) * shape[4] + b) * shape[
        5
    ] + e


def _eve_components(cover, A, B, Y, nx):
    """Alphabet layout of Eve's composite guess, in party order.

    A-guesses are tuples over A's settings (one compact digit per setting),
    a B-guess is a single outcome, and a C-guess names a whole unpacked
    tuple; the composite index is mixed-radix over the covered parties.
    """
    cards = {}
    if "A" in cover:
        cards["A"] = A**nx
    if "B" in cover:
        cards["B"] = B
    if "C" in cover:
        cards["C"] = Y
    order = [p for p in ("A", "B", "C") if p in cover]
    e_card = 1
    for p in order:
        e_card *= cards[p]
    return order, cards, e_card


def _decode_eve(e, order, cards):
    out = {}
    for p in reversed(order):
        out[p] = e % cards[p]
        e //= cards[p]
    return out


def _embedded_program(work, flavor, d, cover, A, B, C):
    """Bilinear system coupling the unpacked chain model with a tripartite
    no-signaling box in which Eve, once her hidden setting matches the
    middle party's, reproduces every covered party's outcome exactly."""
    nx = work.setting_cards[0] if flavor == "biloc" else d
    slots = work.setting_cards[2] if flavor == "biloc" else d
    CBAR = _cbar_card(C, slots)
    Y = S = CBAR
    order, cards, E = _eve_components(cover, A, B, Y, nx)
    a_digits = None
    if "A" in cover:
        a_digits = _cbar_tuples(A, nx)  # guess tuple per composite A-guess
    q_shape = (nx, A, B, CBAR)
    n_q = nx * A * B * CBAR
    qp_shape = (nx, Y, S, A, B, E)
    n_qp = nx * Y * S * A * B * E
    families = {}
    if flavor == "biloc":
        n_b = n_qp
        qp_off = 0
        bp = BilinearProgram(n_q, n_b)
    else:
        n_b = d + CBAR + n_qp
        qp_off = d + CBAR
        bp = BilinearProgram(n_q, n_b)

    row = 0
    p_b = work.values.sum(axis=(3, 5))[0, 0, 0]  # settingless middle marginal

    if flavor == "biloc":
        # linear chain rows: normalization, independence, factorization, recovery
        X, _, Z = work.setting_cards
        p_a_given_x = work.values.sum(axis=(4, 5))[:, 0, 0, :]
        for x in range(X):
            idx = [
                _q_index(q_shape, x, a, b, cb)
                for a in range(A)
                for b in range(B)
                for cb in range(CBAR)
            ]
            bp.add_row(lin_a=(idx, np.ones(len(idx))), rhs=1.0)
            row += 1
        for b in range(B):
            for cb in range(CBAR):
                base = [_q_index(q_shape, 0, a, b, cb) for a in range(A)]
                for x in range(1, X):
                    cur = [_q_index(q_shape, x, a, b, cb) for a in range(A)]
                    bp.add_row(lin_a=(cur + base, [1.0] * A + [-1.0] * A), rhs=0.0)
                    row += 1
        for x in range(X):
            for a in range(A):
                for cb in range(CBAR):
                    lhs = [_q_index(q_shape, x, a, b, cb) for b in range(B)]
                    rhs_idx = [
                        _q_index(q_shape, 0, ap, bq, cb)
                        for ap in range(A)
                        for bq in range(B)
                    ]
                    bp.add_row(
                        lin_a=(
                            lhs + rhs_idx,
                            [1.0] * B + [-p_a_given_x[x, a]] * (A * B),
                        ),
                        rhs=0.0,
                    )
                    row += 1
        tuples = _cbar_tuples(C, Z)
        rec_start = row
        for x in range(X):
            for z in range(Z):
                for a in range(A):
                    for b in range(B):
                        for c in range(C):
                            idx = [
                                _q_index(q_shape, x, a, b, cb)
                                for cb in range(CBAR)
                                if tuples[cb, z] == c
                            ]
                            bp.add_row(
                                lin_a=(idx, np.ones(len(idx))),
                                rhs=work.values[x, 0, z, a, b, c],
                            )
                            row += 1
        families["recovery"] = (rec_start, row)
    else:
        # triangle rows as in the classical-parents program
        for x in range(d):
            idx = [
                _q_index(q_shape, x, a, b, cb)
                for a in range(A)
                for b in range(B)
                for cb in range(CBAR)
            ]
            bp.add_row(lin_a=(idx, np.ones(len(idx))), rhs=1.0)
            row += 1
        bp.add_row(lin_b=(list(range(d)), np.ones(d)), rhs=1.0)
        row += 1
        for b in range(B):
            for cb in range(CBAR):
                base = [_q_index(q_shape, 0, a, b, cb) for a in range(A)]
                for x in range(1, d):
                    cur = [_q_index(q_shape, x, a, b, cb) for a in range(A)]
                    bp.add_row(lin_a=(cur + base, [1.0] * A + [-1.0] * A), rhs=0.0)
                    row += 1
        for cb in range(CBAR):
            idx = [
                _q_index(q_shape, 0, a, b, cb) for a in range(A) for b in range(B)
            ]
            bp.add_row(
                lin_a=(idx, [-1.0] * len(idx)), lin_b=([d + cb], [1.0]), rhs=0.0
            )
            row += 1
        for x in range(d):
            for a in range(A):
                for cb in range(CBAR):
                    lhs = [_q_index(q_shape, x, a, b, cb) for b in range(B)]
                    prod_a = [
                        _q_index(q_shape, x, a, bq, cbp)
                        for bq in range(B)
                        for cbp in range(CBAR)
                    ]
                    bp.add_row(
                        lin_a=(lhs, np.ones(B)),
                        bilinear=(
                            prod_a,
                            [d + cb] * len(prod_a),
                            [-1.0] * len(prod_a),
                        ),
                        rhs=0.0,
                    )
                    row += 1
        tuples = _cbar_tuples(C, d)
        rec_start = row
        for a in range(A):
            for b in range(B):
                for c in range(C):
                    bil_a, bil_b, bil_c = [], [], []
                    for z in range(d):
                        for cb in range(CBAR):
                            if tuples[cb, z] == c:
                                bil_a.append(_q_index(q_shape, z, a, b, cb))
                                bil_b.append(z)
                                bil_c.append(1.0)
                    bp.add_row(
                        bilinear=(bil_a, bil_b, bil_c),
                        rhs=work.values[0, 0, 0, a, b, c],
                    )
                    row += 1
        families["recovery"] = (rec_start, row)

    # -- tripartite box rows ------------------------------------------------
    def qp(x, y, s, a, b, e):
        return qp_off + _qp_index(qp_shape, x, y, s, a, b, e)

    for x in range(nx):  # box normalization
        for y in range(Y):
            for s in range(S):
                idx = [
                    qp(x, y, s, a, b, e)
                    for a in range(A)
                    for b in range(B)
                    for e in range(E)
                ]
                bp.add_row(lin_b=(idx, np.ones(len(idx))), rhs=1.0)
                row += 1
    for y in range(Y):  # box no-signaling: (middle, Eve) marginal free of x
        for s in range(S):
            for b in range(B):
                for e in range(E):
                    base = [qp(0, y, s, a, b, e) for a in range(A)]
                    for x in range(1, nx):
                        cur = [qp(x, y, s, a, b, e) for a in range(A)]
                        bp.add_row(
                            lin_b=(cur + base, [1.0] * A + [-1.0] * A), rhs=0.0
                        )
                        row += 1
    for x in range(nx):  # (A-party, Eve) marginal free of the hidden setting y
        for s in range(S):
            for a in range(A):
                for e in range(E):
                    base = [qp(x, 0, s, a, b, e) for b in range(B)]
                    for y in range(1, Y):
                        cur = [qp(x, y, s, a, b, e) for b in range(B)]
                        bp.add_row(
                            lin_b=(cur + base, [1.0] * B + [-1.0] * B), rhs=0.0
                        )
                        row += 1
    for x in range(nx):  # honest pair marginal free of Eve's setting s
        for y in range(Y):
            for a in range(A):
                for b in range(B):
                    base = [qp(x, y, 0, a, b, e) for e in range(E)]
                    for s in range(1, S):
                        cur = [qp(x, y, s, a, b, e) for e in range(E)]
                        bp.add_row(
                            lin_b=(cur + base, [1.0] * E + [-1.0] * E), rhs=0.0
                        )
                        row += 1

    # agreement at s = y: every covered party's outcome is reproduced exactly
    agree_start = row
    for x in range(nx):
        for y in range(Y):
            for a in range(A):
                for b in range(B):
                    for e in range(E):
                        comp = _decode_eve(e, order, cards)
                        bad = False
                        if "A" in cover and a_digits[comp["A"], x] != a:
                            bad = True
                        if "B" in cover and comp["B"] != b:
                            bad = True
                        if "C" in cover and comp["C"] != y:
                            bad = True
                        if bad:
                            bp.add_row(lin_b=([qp(x, y, y, a, b, e)], [1.0]), rhs=0.0)
                            row += 1
    if "B" in cover:
        for y in range(Y):
            for b in range(B):
                for eb in range(B):
                    idx = [
                        qp(0, y, y, a, b, e)
                        for a in range(A)
                        for e in range(E)
                        if _decode_eve(e, order, cards)["B"] == eb
                    ]
                    bp.add_row(
                        lin_b=(idx, np.ones(len(idx))),
                        rhs=float(p_b[b]) * (1.0 if b == eb else 0.0),
                    )
                    row += 1
    families["agreement"] = (agree_start, row)

    # reinterpretation: the box's honest pair, at the hidden setting named by
    # an unpacked tuple, times that tuple's weight, reproduces the chain model
    couple_start = row
    for x in range(nx):
        for a in range(A):
            for b in range(B):
                for cb in range(CBAR):
                    bil_b_idx = [
                        qp(x, cb, 0, a, b, e) for e in range(E)
                    ]
                    q_marg = [
                        _q_index(q_shape, 0, ap, bq, cb)
                        for ap in range(A)
                        for bq in range(B)
                    ]
                    bil_a, bil_bb, bil_c = [], [], []
                    for qe in bil_b_idx:
                        for qm in q_marg:
                            bil_a.append(qm)
                            bil_bb.append(qe)
                            bil_c.append(1.0)
                    bp.add_row(
                        lin_a=([_q_index(q_shape, x, a, b, cb)], [-1.0]),
                        bilinear=(bil_a, bil_bb, bil_c),
                        rhs=0.0,
                    )
                    row += 1
    families["reinterpretation"] = (couple_start, row)
    return bp, families


def _run_embedded(work, flavor, d, cover, restarts, seed, kind):
    A, B, C = work.outcome_cards
    bp, families = _embedded_program(work, flavor, d, cover, A, B, C)
    result = solve_bilinear(bp, restarts=restarts, seed=seed, tol=CERT_TOL)
    if isinstance(result, FeasibleResult):
        report = verify_assignment(bp, result.assignment)
        lo, hi = families["recovery"]
        return NoRandomnessCertificate(
            kind=kind,
            parties=tuple(sorted(cover)),
            d=d if flavor == "triangle" else None,
            assignment=result.assignment,
            max_residual=report.max_residual,
            recovery_residual=float(report.per_constraint[lo:hi].max()),
            meta={
                "restart_index": result.restart_index,
                "rounds": result.rounds,
            },
        )
    return result


def no_randomness_biloc_bob_embedded(
    dist: ProbTable, restarts: int = 50, seed: int = 0
):
    """Embedded-Bell no-randomness search for the settingless middle party
    of the chain network; the hidden setting ranges over the unpacked
    end-party tuples."""
    if dist.num_parties != 3 or dist.setting_cards[1] != 1:
        raise ShapeMismatch("expected a chain with a settingless middle party")
    return _run_embedded(
        dist, "biloc", None, {"B"}, restarts, seed, "biloc-embedded-bell"
    )


def no_randomness_triangle_bob_embedded(
    dist: ProbTable, d: int, restarts: int = 50, seed: int = 0
):
    """Embedded-Bell no-randomness search for a settingless triangle party."""
    if dist.num_parties != 3 or dist.setting_cards != (1, 1, 1):
        raise ShapeMismatch("expected a settingless three-party distribution")
    if d < 1:
        raise ShapeMismatch("hidden cardinality d must be >= 1")
    return _run_embedded(
        dist, "triangle", d, {"B"}, restarts, seed, "triangle-embedded-bell"
    )


def multiparty_extension(
    dist: ProbTable,
    cover,
    kind: str = "biloc-embedded-bell",
    d: int | None = None,
    restarts: int = 50,
    seed: int = 0,
):
    """Embedded-Bell certification of several parties at once.

    Eve's alphabet is enlarged to the product of the covered parties'
    guess alphabets and an agreement constraint is added per covered party.
    """
    cover = set(cover)
    if not cover or not cover <= {"A", "B", "C"}:
        raise ShapeMismatch("cover must be a nonempty subset of {A, B, C}")
    if kind == "biloc-embedded-bell":
        if dist.setting_cards[1] != 1:
            raise ShapeMismatch("expected a chain with a settingless middle party")
        return _run_embedded(dist, "biloc", None, cover, restarts, seed, kind)
    if kind == "triangle-embedded-bell":
        if dist.setting_cards != (1, 1, 1):
            raise ShapeMismatch("expected a settingless three-party distribution")
        if d is None or d < 1:
            raise ShapeMismatch("hidden cardinality d must be >= 1")
        return _run_embedded(dist, "triangle", d, cover, restarts, seed, kind)
    raise ShapeMismatch(f"unknown embedded program kind {kind!r}")


# -- reporting -------------------------------------------------------------------


def distribution_fingerprint(table: ProbTable) -> str:
    buf = io.StringIO()
    buf.write(json.dumps(list(table.outcome_cards)))
    buf.write(json.dumps(list(table.setting_cards)))
    buf.write(",".join(f"{v:.17g}" for v in table.flat()))
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def write_report(path, payload: dict) -> None:
    """Atomically write a certification report with stable field names."""
    keys = {
        "program",
        "fingerprint",
        "level",
        "d",
        "status",
        "bound",
        "residual",
        "wall_time_s",
        "backend",
        "seed",
    }
    extra = set(payload) - keys
    if extra:
        raise ValueError(f"unexpected report fields: {sorted(extra)}")
    doc = {k: payload.get(k) for k in sorted(keys)}
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)

