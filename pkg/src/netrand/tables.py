"""Probability tables and the benchmark correlations.

A :class:`ProbTable` stores a dense conditional distribution P(outcomes |
settings) for all parties at once.  The array layout is settings-outermost:
``values[x_1, ..., x_n, a_1, ..., a_n]`` with the last party's outcome
varying fastest in the flattened order.

Conventions used throughout:

* binary +/-1 outcomes are stored at indices {0 -> +1, 1 -> -1};
* composite outputs (pairs) are packed as ``index = 2 * first + second``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompleteProjectorSet,
    InvalidCorrelators,
    NormalizationError,
    ParseError,
    ShapeMismatch,
    SignalingError,
)

NORMALIZATION_TOL = 1e-12
NOSIGNALING_TOL = 1e-10

SQRT2 = math.sqrt(2.0)


class ProbTable:
    """Dense multiparty conditional distribution with validity checks."""

    def __init__(self, outcome_cards, setting_cards, values, validate=True):
        self.outcome_cards = tuple(int(c) for c in outcome_cards)
        self.setting_cards = tuple(int(c) for c in setting_cards)
        if len(self.outcome_cards) != len(self.setting_cards):
            raise ShapeMismatch("outcome_cards and setting_cards differ in length")
        shape = self.setting_cards + self.outcome_cards
        arr = np.asarray(values, dtype=float)
        if arr.size != int(np.prod(shape)):
            raise ShapeMismatch(
                f"expected {int(np.prod(shape))} values, got {arr.size}"
            )
        self.values = arr.reshape(shape)
        if validate:
            self.check_valid()

    # -- basic properties ---------------------------------------------------

    @property
    def num_parties(self) -> int:
        return len(self.outcome_cards)

    def prob(self, settings, outcomes) -> float:
        return float(self.values[tuple(settings) + tuple(outcomes)])

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __eq__(self, other):
        return (
            isinstance(other, ProbTable)
            and self.outcome_cards == other.outcome_cards
            and self.setting_cards == other.setting_cards
            and np.array_equal(self.values, other.values)
        )

    # -- validity -----------------------------------------------------------

    def check_valid(self):
        if np.any(self.values < 0):
            raise NormalizationError("negative probability entry")
        n = self.num_parties
        sums = self.values.sum(axis=tuple(range(n, 2 * n)))
        if np.max(np.abs(sums - 1.0)) > NORMALIZATION_TOL:
            raise NormalizationError(
                f"conditional sums deviate from 1 by up to {np.max(np.abs(sums - 1.0)):.3e}"
            )
        party, dev = self.signaling_deviation()
        if dev > NOSIGNALING_TOL:
            raise SignalingError(
                f"marginal over the other parties depends on party {party}'s "
                f"setting (deviation {dev:.3e})",
                party=party,
                deviation=dev,
            )

    def signaling_deviation(self):
        """Worst no-signaling violation: (party index, deviation).

        For each party, the marginal over everyone else's outcomes must not
        depend on that party's setting; this single-party family generates
        all subset no-signaling conditions.
        """
        n = self.num_parties
        worst = (None, 0.0)
        for i in range(n):
            if self.setting_cards[i] == 1:
                continue
            marg = self.values.sum(axis=n + i)
            ref = marg.take(0, axis=i)
            dev = 0.0
            for v in range(1, self.setting_cards[i]):
                dev = max(dev, float(np.max(np.abs(marg.take(v, axis=i) - ref))))
            if dev > worst[1]:
                worst = (i, dev)
        return worst

    # -- manipulation ---------------------------------------------------

    def permute_parties(self, perm) -> "ProbTable":
        """Relabel parties: new party i is old party perm[i]."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.num_parties)):
            raise ShapeMismatch("perm must be a permutation of the party indices")
        n = self.num_parties
        axes = tuple(perm) + tuple(n + p for p in perm)
        return ProbTable(
            tuple(self.outcome_cards[p] for p in perm),
            tuple(self.setting_cards[p] for p in perm),
            np.transpose(self.values, axes),
        )


# -- Born-rule kernel --------------------------------------------------------


def _check_projectors(projs, dim):
    acc = np.zeros((dim, dim), dtype=complex)
    for pi in projs:
        pi = np.asarray(pi, dtype=complex)
        if pi.shape != (dim, dim):
            raise DimensionMismatch(
                f"projector has shape {pi.shape}, expected {(dim, dim)}"
            )
        if np.max(np.abs(pi - pi.conj().T)) > 1e-12:
            raise IncompleteProjectorSet("projector is not self-adjoint")
        if np.max(np.abs(pi @ pi - pi)) > 1e-12:
            raise IncompleteProjectorSet("projector is not idempotent")
        acc += pi
    if np.max(np.abs(acc - np.eye(dim))) > 1e-12:
        raise IncompleteProjectorSet("projectors do not sum to the identity")


def born_probability(state, projectors_per_party) -> np.ndarray:
    """Joint outcome probabilities Tr[(P_1 x P_2 x ...) rho].

    ``state`` is a ket vector or a density matrix on the tensor product of
    the parties' local spaces; ``projectors_per_party`` lists, per party, one
    projector per outcome.  Returns an array indexed by the outcome tuple.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        rho = np.outer(state, state.conj())
    elif state.ndim == 2 and state.shape[0] == state.shape[1]:
        rho = state
    else:
        raise DimensionMismatch("state must be a vector or a square matrix")
    dims = []
    for projs in projectors_per_party:
        if not projs:
            raise IncompleteProjectorSet("a party has no projectors")
        d = np.asarray(projs[0]).shape[0]
        _check_projectors(projs, d)
        dims.append(d)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionMismatch(
            f"state dimension {rho.shape[0]} != product of local dimensions {total}"
        )
    cards = tuple(len(p) for p in projectors_per_party)
    out = np.empty(cards, dtype=float)
    for idx in np.ndindex(*cards):
        op = np.array([[1.0 + 0.0j]])
        for party, k in enumerate(idx):
            op = np.kron(op, np.asarray(projectors_per_party[party][k], dtype=complex))
        out[idx] = float(np.real(np.trace(op @ rho)))
    return out


# -- standard qubit objects used by the generators ----------------------------

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / SQRT2
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / SQRT2


def eigenprojectors(observable) -> list[np.ndarray]:
    """Projectors of a +/-1 observable, outcome 0 for eigenvalue +1."""
    obs = np.asarray(observable, dtype=complex)
    eye = np.eye(obs.shape[0])
    return [(eye + obs) / 2, (eye - obs) / 2]


# -- benchmark correlations ---------------------------------------------------


def fritz_bilocality() -> ProbTable:
    """Chained correlation where the end party's output doubles as the
    middle party's input and the first two parties maximally violate CHSH.

    Parties A, B, C with binary outcomes; A and C have binary settings and B
    is settingless.  P(a,b,c|x,z) = 1/2 * (2+sqrt2)/8 when a XOR b = x*c and
    1/2 * (2-sqrt2)/8 otherwise, independent of z.
    """
    w_hit = (2 + SQRT2) / 8
    w_miss = (2 - SQRT2) / 8
    vals = np.empty((2, 1, 2, 2, 2, 2))
    for x in range(2):
        for z in range(2):
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        w = w_hit if (a ^ b) == (x & c) else w_miss
                        vals[x, 0, z, a, b, c] = 0.5 * w
    return ProbTable((2, 2, 2), (2, 1, 2), vals)


def entanglement_swapping() -> ProbTable:
    """Two singlet-fidelity sources with a coarse-grained joint measurement
    in the middle.

    Both sources emit |phi+>.  B projects its two qubits onto |psi+> (outcome
    0) or its complement (outcome 1); A measures sigma_Z / sigma_X, C measures
    (sigma_Z +/- sigma_X)/sqrt2.
    """
    state = np.kron(PHI_PLUS, PHI_PLUS)  # qubit order: A, B1, B2, C
    a_meas = [eigenprojectors(SIGMA_Z), eigenprojectors(SIGMA_X)]
    c_meas = [
        eigenprojectors((SIGMA_Z + SIGMA_X) / SQRT2),
        eigenprojectors((SIGMA_Z - SIGMA_X) / SQRT2),
    ]
    psi = np.outer(PSI_PLUS, PSI_PLUS.conj())
    b_projs = [psi, np.eye(4) - psi]
    vals = np.empty((2, 1, 2, 2, 2, 2))
    for x in range(2):
        for z in range(2):
            joint = born_probability(state, [a_meas[x], b_projs, c_meas[z]])
            vals[x, 0, z] = joint
    return ProbTable((2, 2, 2), (2, 1, 2), vals)


def fritz_triangle() -> ProbTable:
    """Settingless three-party correlation with four outcomes per party.

    Two parties run the maximal CHSH strategy on a shared |phi+>, each using
    the classical source it shares with the third party as its input, and
    append that input to its output; the third party outputs both classical
    values.  Pairs are packed as index = 2*first + second.
    """
    w_hit = (2 + SQRT2) / 8
    w_miss = (2 - SQRT2) / 8
    vals = np.zeros((1, 1, 1, 4, 4, 4))
    for lam_ac in range(2):
        for lam_bc in range(2):
            for a in range(2):
                for b in range(2):
                    w = w_hit if (a ^ b) == (lam_ac & lam_bc) else w_miss
                    ia = 2 * a + lam_ac
                    ib = 2 * b + lam_bc
                    ic = 2 * lam_ac + lam_bc
                    vals[0, 0, 0, ia, ib, ic] = 0.25 * w
    return ProbTable((4, 4, 4), (1, 1, 1), vals)


def pr_triangle(e1: float = 0.0, e2: float = SQRT2 - 1, e3: float = 0.0) -> ProbTable:
    """Settingless three-party +/-1 correlation from its correlators.

    P(a,b,c) = [1 + (a+b+c)e1 + (ab+ac+bc)e2 + abc*e3] / 8 with outcomes
    +/-1 stored at indices {0 -> +1, 1 -> -1}.  The defaults give the
    fully symmetric beyond-quantum point e2 = sqrt2 - 1.
    """
    vals = np.empty((1, 1, 1, 2, 2, 2))
    for ia in range(2):
        for ib in range(2):
            for ic in range(2):
                a, b, c = 1 - 2 * ia, 1 - 2 * ib, 1 - 2 * ic
                p = (1 + (a + b + c) * e1 + (a * b + a * c + b * c) * e2 + a * b * c * e3) / 8
                if p < 0:
                    raise InvalidCorrelators(
                        f"P({a},{b},{c}) = {p:.6f} < 0 for correlators "
                        f"({e1}, {e2}, {e3})"
                    )
                vals[0, 0, 0, ia, ib, ic] = p
    return ProbTable((2, 2, 2), (1, 1, 1), vals)


GENERATORS = {
    "fritz-bilocality": fritz_bilocality,
    "entanglement-swapping": entanglement_swapping,
    "fritz-triangle": fritz_triangle,
    "pr-triangle": pr_triangle,
}


# -- witnesses ----------------------------------------------------------------


def chsh_value(table: ProbTable) -> float:
    """CHSH combination E00 + E01 + E10 - E11 of a binary bipartite table."""
    if table.num_parties != 2:
        raise ShapeMismatch("chsh_value needs a two-party table")
    if table.outcome_cards != (2, 2) or table.setting_cards != (2, 2):
        raise ShapeMismatch("chsh_value needs binary outcomes and settings")
    sign = np.array([1.0, -1.0])
    corr = np.einsum("xyab,a,b->xy", table.values, sign, sign)
    return float(corr[0, 0] + corr[0, 1] + corr[1, 0] - corr[1, 1])


# -- file format ---------------------------------------------------------------
#
# A distribution file is JSON with keys:
#   outcome_cards: [int, ...]
#   setting_cards: [int, ...]
#   values: flat list of decimals, settings outermost, last party's outcome
#           varying fastest
#   labels: optional list of party names
# The writer emits 17 significant digits so that load(save(t)) == t exactly.


def save_distribution(table: ProbTable, path, labels=None) -> None:
    lines = ["{"]
    lines.append(f'  "outcome_cards": {json.dumps(list(table.outcome_cards))},')
    lines.append(f'  "setting_cards": {json.dumps(list(table.setting_cards))},')
    if labels is not None:
        lines.append(f'  "labels": {json.dumps(list(labels))},')
    body = ", ".join(f"{v:.17g}" for v in table.flat())
    lines.append(f'  "values": [{body}]')
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_distribution(path) -> ProbTable:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read distribution file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("distribution file must hold a JSON object")
    extra = set(doc) - {"outcome_cards", "setting_cards", "values", "labels"}
    if extra:
        raise ParseError(f"unknown keys: {sorted(extra)}")
    for key in ("outcome_cards", "setting_cards", "values"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    return ProbTable(doc["outcome_cards"], doc["setting_cards"], doc["values"])
