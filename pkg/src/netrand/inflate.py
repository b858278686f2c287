"""Nonfanout inflations of an interrupted eavesdropper scenario.

An inflation at level (n_1, ..., n_k) makes n_i copies of source i and
min-over-parents copies of every observed node; a wiring assigns each node
copy one copy of each parent source, injectively per (node, source), so no
source copy feeds two copies of the same node.  Wirings are enumerated
exhaustively and deduplicated up to relabeling of source copies and node
copies.

Three families of equalities are emitted for the joint distributions over
the inflated graphs:

* no-signaling within each inflated graph;
* compatibility of maximal injectable sets with the (symbolic) extended
  distribution over the original parties plus the eavesdropper, with the
  eavesdropper's interrupted settings pinned to the originals;
* marginal equality across (or within) inflations on maximal node sets
  whose wiring patterns match.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IncompatibleInflations, LevelTooLarge, ShapeMismatch
from .networks import EVE_NAME, EveScenario

MAX_RAW_WIRINGS = 500_000
MAX_RELABEL_GROUP = 50_000


@dataclass(frozen=True)
class LevelVector:
    """Copies per source, aligned with the canonical source order."""

    copies_per_source: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "copies_per_source", tuple(int(c) for c in self.copies_per_source)
        )
        if any(c < 1 for c in self.copies_per_source):
            raise ShapeMismatch("inflation levels must be >= 1")

    def __iter__(self):
        return iter(self.copies_per_source)

    def __len__(self):
        return len(self.copies_per_source)


@dataclass(frozen=True)
class Inflation:
    """A nonfanout wiring of a scenario at a given level.

    ``wiring[i][k][slot]`` is the copy of the slot-th parent source read by
    copy k of node i, with nodes in canonical name order and parent slots in
    canonical source order.  Stored wirings are canonical representatives of
    their isomorphism class.
    """

    scenario: EveScenario
    level: LevelVector
    wiring: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def node_names(self) -> tuple[str, ...]:
        return self.scenario.node_names()

    def parents(self, name: str) -> tuple[str, ...]:
        return self.scenario.parent_sources(name)

    def copies(self, name: str) -> int:
        return len(self.wiring[self.node_names.index(name)])

    def nodes(self) -> tuple[tuple[str, int], ...]:
        return tuple(
            (name, k)
            for name in self.node_names
            for k in range(self.copies(name))
        )

    def reads(self, name: str, copy: int, source: str):
        """Copy of ``source`` read by (name, copy), or None when unrelated."""
        slots = self.parents(name)
        if source not in slots:
            return None
        return self.wiring[self.node_names.index(name)][copy][slots.index(source)]

    def is_trivial(self) -> bool:
        return self.wiring == _identity_wiring(self.scenario, self.level)

    def signature(self) -> str:
        """Canonical wiring string, e.g. ``A:[1],[2];E:[1,2],[2,1]``."""
        parts = []
        for name, per_copy in zip(self.node_names, self.wiring):
            copies = ",".join(
                "[" + ",".join(str(c + 1) for c in reads) + "]" for reads in per_copy
            )
            parts.append(f"{name}:{copies}")
        return ";".join(parts)


@dataclass(frozen=True)
class InjectableSet:
    """Inflated nodes whose induced wiring embeds into the original scenario."""

    nodes: tuple[tuple[str, int], ...]

    @property
    def embedding(self) -> dict:
        return {node: node[0] for node in self.nodes}

    def signature(self) -> str:
        return "+".join(f"{name}{k + 1}" for name, k in self.nodes)


@dataclass(frozen=True)
class CrossPair:
    """Node sets of two inflations matched by a wiring-pattern isomorphism."""

    nodes_a: tuple[tuple[str, int], ...]
    nodes_b: tuple[tuple[str, int], ...]


# -- enumeration ---------------------------------------------------------------


def _source_names(scenario: EveScenario) -> tuple[str, ...]:
    return tuple(s.name for s in scenario.base.sources)


def _copy_counts(scenario: EveScenario, level: LevelVector) -> dict:
    srcs = _source_names(scenario)
    lev = dict(zip(srcs, level))
    out = {}
    for name in scenario.node_names():
        parents = scenario.parent_sources(name)
        if not parents:
            raise ShapeMismatch(f"node {name} has no parent source")
        out[name] = min(lev[s] for s in parents)
    return out


def _identity_wiring(scenario: EveScenario, level: LevelVector):
    counts = _copy_counts(scenario, level)
    return tuple(
        tuple(
            tuple(k for _ in scenario.parent_sources(name))
            for k in range(counts[name])
        )
        for name in scenario.node_names()
    )


def _canonical_wiring(scenario, level, wiring, group, slot_sources):
    """Lexicographically smallest relabeling under source-copy permutations
    combined with per-node copy sorting."""
    best = None
    for sigma in group:
        relabeled = tuple(
            tuple(
                sorted(
                    tuple(sigma[s][c] for s, c in zip(slots, reads))
                    for reads in per_copy
                )
            )
            for slots, per_copy in zip(slot_sources, wiring)
        )
        if best is None or relabeled < best:
            best = relabeled
    return tuple(tuple(tuple(r) for r in per_copy) for per_copy in best)


def enumerate_inflations(
    scenario: EveScenario,
    level,
    max_wirings: int = MAX_RAW_WIRINGS,
) -> list[Inflation]:
    """All nonfanout inflations at ``level``, up to isomorphism.

    The scenario must be interrupted first; the disjoint-copies (trivial)
    inflation comes first in the returned list, the rest follow in canonical
    signature order.
    """
    if not scenario.interrupted:
        raise ShapeMismatch("interrupt the scenario before inflating it")
    if not isinstance(level, LevelVector):
        level = LevelVector(tuple(level))
    srcs = _source_names(scenario)
    if len(level) != len(srcs):
        raise ShapeMismatch(
            f"level vector has {len(level)} entries for {len(srcs)} sources"
        )
    lev = dict(zip(srcs, level))
    counts = _copy_counts(scenario, level)
    names = scenario.node_names()

    group_size = math.prod(math.factorial(l) for l in level)
    if group_size > MAX_RELABEL_GROUP:
        raise LevelTooLarge(
            f"relabeling group of size {group_size} exceeds {MAX_RELABEL_GROUP}"
        )
    raw = 1
    for name in names:
        for s in scenario.parent_sources(name):
            raw *= math.perm(lev[s], counts[name])
    if raw > max_wirings:
        raise LevelTooLarge(f"{raw} raw wirings exceed the cap of {max_wirings}")

    src_index = {s: i for i, s in enumerate(srcs)}
    slot_sources = tuple(
        tuple(src_index[s] for s in scenario.parent_sources(name)) for name in names
    )
    group = [
        tuple(perm)
        for perm in itertools.product(
            *[list(itertools.permutations(range(l))) for l in level]
        )
    ]

    per_node = []
    for name in names:
        slots = scenario.parent_sources(name)
        injections = [
            list(itertools.permutations(range(lev[s]), counts[name])) for s in slots
        ]
        node_wirings = [
            tuple(
                tuple(combo[slot][k] for slot in range(len(slots)))
                for k in range(counts[name])
            )
            for combo in itertools.product(*injections)
        ]
        per_node.append(node_wirings)

    seen = {}
    for full in itertools.product(*per_node):
        canon = _canonical_wiring(scenario, level, full, group, slot_sources)
        if canon not in seen:
            seen[canon] = Inflation(scenario=scenario, level=level, wiring=canon)
    result = sorted(seen.values(), key=lambda i: i.signature())
    trivial = [i for i in result if i.is_trivial()]
    rest = [i for i in result if not i.is_trivial()]
    return trivial + rest


# -- injectable sets -----------------------------------------------------------


def _shared_sources(scenario, name_a, name_b) -> tuple[str, ...]:
    pa = set(scenario.parent_sources(name_a))
    pb = set(scenario.parent_sources(name_b))
    return tuple(sorted(pa & pb))


def _is_injectable(infl: Inflation, nodes) -> bool:
    names = [n for n, _ in nodes]
    if len(set(names)) != len(names):
        return False
    for (n1, k1), (n2, k2) in itertools.combinations(nodes, 2):
        for s in _shared_sources(infl.scenario, n1, n2):
            if infl.reads(n1, k1, s) != infl.reads(n2, k2, s):
                return False
    return True


def injectable_sets(infl: Inflation) -> list[InjectableSet]:
    """Maximal injectable sets of an inflation.

    A set of node copies is injectable when, for every pair sharing a source
    in the original scenario, both members read the same copy of it; its
    marginal must then match the corresponding marginal of the extended
    distribution.  Every injectable set is a subset of a returned one.
    """
    names = infl.node_names
    options = [[None] + list(range(infl.copies(n))) for n in names]
    valid = []
    for choice in itertools.product(*options):
        nodes = tuple(
            (n, k) for n, k in zip(names, choice) if k is not None
        )
        if not nodes:
            continue
        if _is_injectable(infl, nodes):
            valid.append(frozenset(nodes))
    maximal = [s for s in valid if not any(s < t for t in valid)]
    return sorted(
        (InjectableSet(nodes=tuple(sorted(s))) for s in maximal),
        key=lambda i: i.signature(),
    )


# -- cross-inflation matchings ---------------------------------------------------


def _pair_consistent(a, b, pair1, pair2) -> bool:
    (n1a, k1a), (n1b, k1b) = pair1
    (n2a, k2a), (n2b, k2b) = pair2
    shared = (
        a.parents(n1a)
        if n1a == n2a
        else _shared_sources(a.scenario, n1a, n2a)
    )
    for s in shared:
        same_a = a.reads(n1a, k1a, s) == a.reads(n2a, k2a, s)
        same_b = b.reads(n1b, k1b, s) == b.reads(n2b, k2b, s)
        if same_a != same_b:
            return False
    return True


def cross_inflation_sets(a: Inflation, b: Inflation) -> list[CrossPair]:
    """Maximal matched node sets with identical wiring patterns.

    Pairs whose two sides are both injectable are omitted: their marginals
    are already tied together through the extended distribution.  For
    ``a is b`` the matchings are the nontrivial automorphism-induced
    symmetries.
    """
    if a.scenario != b.scenario or a.level != b.level:
        raise IncompatibleInflations(
            "cross-inflation sets need a common scenario and level"
        )
    self_pair = a.wiring == b.wiring
    # Vertices of the compatibility graph are candidate matches; maximal
    # matchings are exactly its maximal cliques (consistency is pairwise and
    # two matches sharing a node are never adjacent).
    vertices = [
        ((name, ka), (name, kb))
        for name in a.node_names
        for ka in range(a.copies(name))
        for kb in range(b.copies(name))
    ]
    nv = len(vertices)
    adj = [set() for _ in range(nv)]
    for i in range(nv):
        for j in range(i + 1, nv):
            (xa, xb), (ya, yb) = vertices[i], vertices[j]
            if xa == ya or xb == yb:
                continue
            if _pair_consistent(a, b, vertices[i], vertices[j]):
                adj[i].add(j)
                adj[j].add(i)

    cliques = []

    def bron_kerbosch(r, p, x):
        if not p and not x:
            cliques.append(sorted(r))
            return
        pivot_pool = p | x
        pivot = max(pivot_pool, key=lambda v: len(adj[v] & p))
        for v in sorted(p - adj[pivot]):
            bron_kerbosch(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bron_kerbosch(set(), set(range(nv)), set())

    found = set()
    for clique in cliques:
        pairs = tuple(sorted(vertices[i] for i in clique))
        if self_pair:
            if all(x == y for x, y in pairs):
                continue
            mirrored = tuple(sorted((y, x) for x, y in pairs))
            pairs = min(pairs, mirrored)
        found.add(pairs)

    out = []
    for pairs in sorted(found):
        sa = tuple(x for x, _ in pairs)
        sb = tuple(y for _, y in pairs)
        if _is_injectable(a, sa) and _is_injectable(b, sb):
            continue
        out.append(CrossPair(nodes_a=sa, nodes_b=sb))
    return out


# -- constraint emission ---------------------------------------------------------


class _Layout:
    """Axis layout of one inflated joint distribution.

    Axes are all setting axes (node-major, settings within a node in the
    scenario's declared order) followed by all outcome axes, C-order; the
    flattened index is therefore lexicographic over (settings, outcomes).
    """

    def __init__(self, infl: Inflation, offset: int):
        self.offset = offset
        scenario = infl.scenario
        self.setting_axes = []  # (node, base_party, card)
        self.outcome_axes = []  # (node, card)
        for node in infl.nodes():
            name = node[0]
            for label, card in scenario.setting_vars(name):
                base = label[label.index("[") + 1 : -1]
                self.setting_axes.append((node, base, card))
        for node in infl.nodes():
            self.outcome_axes.append((node, scenario.outcome_card(node[0])))
        self.dims = tuple(c for _, _, c in self.setting_axes) + tuple(
            c for _, c in self.outcome_axes
        )
        self.size = int(np.prod(self.dims))
        self.strides = _strides(self.dims)
        self.setting_axes_of = {}
        for ax, (node, base, card) in enumerate(self.setting_axes):
            self.setting_axes_of.setdefault(node, []).append((ax, base, card))
        self.outcome_axis_of = {
            node: len(self.setting_axes) + i
            for i, (node, _) in enumerate(self.outcome_axes)
        }


def _strides(dims):
    strides = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


def _flat_cols(dims, strides, offset, fixed, summed):
    """(n_rows, n_terms) flat indices; every axis is fixed or summed.

    ``fixed`` maps axis -> per-row value array; ``summed`` axes are expanded
    into the term dimension.
    """
    n_rows = 1
    for vals in fixed.values():
        n_rows = max(n_rows, np.asarray(vals).shape[0] if np.ndim(vals) else 1)
    base = np.full(n_rows, offset, dtype=np.int64)
    for ax, vals in fixed.items():
        base = base + np.asarray(vals, dtype=np.int64) * strides[ax]
    if summed:
        sdims = [dims[ax] for ax in summed]
        total = int(np.prod(sdims))
        sidx = np.array(np.unravel_index(np.arange(total), sdims))
        offs = np.zeros(total, dtype=np.int64)
        for i, ax in enumerate(summed):
            offs += sidx[i] * strides[ax]
    else:
        offs = np.zeros(1, dtype=np.int64)
    return base[:, None] + offs[None, :]


def _grid(cards):
    """Per-axis value arrays enumerating the C-order product of ``cards``."""
    total = int(np.prod(cards)) if cards else 1
    if not cards:
        return total, []
    vals = np.array(np.unravel_index(np.arange(total), cards))
    return total, [vals[i] for i in range(len(cards))]


class _Rows:
    """COO accumulator for equality rows."""

    def __init__(self):
        self.rows = []
        self.cols = []
        self.data = []
        self.rhs = []
        self.n = 0
        self.family_counts = {}

    def add_marginal_equality(self, cols_plus, cols_minus, rhs, family):
        n_rows = cols_plus.shape[0]
        ids = np.arange(self.n, self.n + n_rows, dtype=np.int64)
        self.rows.append(np.repeat(ids, cols_plus.shape[1]))
        self.cols.append(cols_plus.ravel())
        self.data.append(np.ones(cols_plus.size))
        if cols_minus is not None:
            self.rows.append(np.repeat(ids, cols_minus.shape[1]))
            self.cols.append(cols_minus.ravel())
            self.data.append(-np.ones(cols_minus.size))
        self.rhs.append(np.broadcast_to(np.asarray(rhs, dtype=float), (n_rows,)))
        self.n += n_rows
        self.family_counts[family] = self.family_counts.get(family, 0) + n_rows

    def assembled(self):
        rows = np.concatenate(self.rows) if self.rows else np.zeros(0, np.int64)
        cols = np.concatenate(self.cols) if self.cols else np.zeros(0, np.int64)
        data = np.concatenate(self.data) if self.data else np.zeros(0)
        rhs = np.concatenate(self.rhs) if self.rhs else np.zeros(0)
        return rows, cols, data, rhs


class ConstraintSystem:
    """Variables and equalities of a bundle of inflations.

    The variable vector is [Q_1 | Q_2 | ... | P] where each Q_i is the joint
    distribution over inflation i's graph and P is the symbolic extended
    distribution over the original parties plus the eavesdropper.  All
    variables are nonnegative; equalities cover normalization, no-signaling,
    injectable-set compatibility and cross-inflation matching.
    """

    def __init__(self, inflations):
        if not inflations:
            raise IncompatibleInflations("need at least one inflation")
        first = inflations[0]
        for infl in inflations[1:]:
            if infl.scenario != first.scenario or infl.level != first.level:
                raise IncompatibleInflations(
                    "all inflations must share a scenario and level"
                )
        self.scenario = first.scenario
        self.level = first.level
        self.inflations = list(inflations)

        self.layouts = []
        offset = 0
        for infl in self.inflations:
            layout = _Layout(infl, offset)
            self.layouts.append(layout)
            offset += layout.size

        base = self.scenario.base
        self.base_names = base.party_names()
        self.node_names = self.scenario.node_names()
        self.p_setting_cards = base.setting_cards()
        self.p_outcome_cards = tuple(
            self.scenario.outcome_card(n) for n in self.node_names
        )
        self.p_offset = offset
        self.p_dims = self.p_setting_cards + self.p_outcome_cards
        self.p_strides = _strides(self.p_dims)
        self.p_size = int(np.prod(self.p_dims))
        self.num_vars = offset + self.p_size

        self._rows = _Rows()
        self._emit_all()
        self.coo = self._rows.assembled()
        self.num_rows = self._rows.n
        self.family_counts = dict(self._rows.family_counts)

    # -- P-space helpers (shared with the certification layer) -------------

    def p_axis_of_setting(self, base_party: str) -> int:
        return self.base_names.index(base_party)

    def p_axis_of_outcome(self, node_name: str) -> int:
        return len(self.base_names) + self.node_names.index(node_name)

    def p_cols(self, fixed, summed):
        return _flat_cols(self.p_dims, self.p_strides, self.p_offset, fixed, summed)

    # -- emission -----------------------------------------------------------

    def _emit_all(self):
        for infl, layout in zip(self.inflations, self.layouts):
            self._emit_normalization(layout)
            self._emit_nosignaling(layout)
            for iset in injectable_sets(infl):
                self._emit_compatibility(infl, layout, iset)
        for i in range(len(self.inflations)):
            for j in range(i, len(self.inflations)):
                a, la = self.inflations[i], self.layouts[i]
                b, lb = self.inflations[j], self.layouts[j]
                for pair in cross_inflation_sets(a, b):
                    self._emit_cross(a, la, b, lb, pair, self_pair=(i == j))
        self._emit_p_normalization()

    def _emit_normalization(self, layout):
        set_axes = list(range(len(layout.setting_axes)))
        out_axes = list(range(len(layout.setting_axes), len(layout.dims)))
        cards = [layout.dims[ax] for ax in set_axes]
        n_rows, vals = _grid(cards)
        fixed = {ax: vals[i] for i, ax in enumerate(set_axes)}
        cols = _flat_cols(layout.dims, layout.strides, layout.offset, fixed, out_axes)
        self._rows.add_marginal_equality(cols, None, 1.0, "normalization")

    def _emit_nosignaling(self, layout):
        n_axes = len(layout.dims)
        for t, (node, _base, card) in enumerate(layout.setting_axes):
            if card < 2:
                continue
            u = layout.outcome_axis_of[node]
            others = [ax for ax in range(n_axes) if ax not in (t, u)]
            cards = [layout.dims[ax] for ax in others]
            n_rows, vals = _grid(cards)
            fixed0 = {ax: vals[i] for i, ax in enumerate(others)}
            for v in range(1, card):
                hi = dict(fixed0)
                hi[t] = np.full(n_rows, v, dtype=np.int64)
                lo = dict(fixed0)
                lo[t] = np.zeros(n_rows, dtype=np.int64)
                cols_hi = _flat_cols(layout.dims, layout.strides, layout.offset, hi, [u])
                cols_lo = _flat_cols(layout.dims, layout.strides, layout.offset, lo, [u])
                self._rows.add_marginal_equality(cols_hi, cols_lo, 0.0, "no-signaling")

    def _emit_compatibility(self, infl, layout, iset):
        member_names = [n for n, _ in iset.nodes]
        # row grid: all original settings, then member outcomes
        grid_cards = list(self.p_setting_cards) + [
            self.scenario.outcome_card(n) for n in member_names
        ]
        n_rows, vals = _grid(grid_cards)
        x_vals = {p: vals[i] for i, p in enumerate(self.base_names)}
        o_vals = {
            node: vals[len(self.base_names) + i] for i, node in enumerate(iset.nodes)
        }

        member_set = set(iset.nodes)
        fixed_q = {}
        summed_q = []
        for node in infl.nodes():
            out_ax = layout.outcome_axis_of[node]
            if node in member_set:
                fixed_q[out_ax] = o_vals[node]
                for ax, base, card in layout.setting_axes_of.get(node, []):
                    fixed_q[ax] = x_vals[base]
            else:
                summed_q.append(out_ax)
                for ax, _base, _card in layout.setting_axes_of.get(node, []):
                    fixed_q[ax] = np.zeros(n_rows, dtype=np.int64)
        cols_q = _flat_cols(layout.dims, layout.strides, layout.offset, fixed_q, summed_q)

        fixed_p = {}
        summed_p = []
        for p in self.base_names:
            fixed_p[self.p_axis_of_setting(p)] = x_vals[p]
        for name in self.node_names:
            ax = self.p_axis_of_outcome(name)
            if name in member_names:
                node = iset.nodes[member_names.index(name)]
                fixed_p[ax] = o_vals[node]
            else:
                summed_p.append(ax)
        cols_p = self.p_cols(fixed_p, summed_p)
        self._rows.add_marginal_equality(cols_q, cols_p, 0.0, "compatibility")

    def _emit_cross(self, a, la, b, lb, pair, self_pair):
        # row grid: member settings (side a) then member outcomes
        grid_cards = []
        setting_slots = []  # (node_a_index, axis_in_a)
        for idx, node in enumerate(pair.nodes_a):
            for ax, _base, card in la.setting_axes_of.get(node, []):
                grid_cards.append(card)
                setting_slots.append((idx, ax))
        for node in pair.nodes_a:
            grid_cards.append(a.scenario.outcome_card(node[0]))
        n_rows, vals = _grid(grid_cards)

        def side_cols(infl, layout, members):
            fixed = {}
            summed = []
            member_map = dict(zip(pair.nodes_a, members))
            # settings of matched nodes share the row-grid values
            for gi, (idx, ax_a) in enumerate(setting_slots):
                node_b = member_map[pair.nodes_a[idx]]
                axes_b = layout.setting_axes_of.get(node_b, [])
                ax_here = axes_b[
                    [x[0] for x in la.setting_axes_of[pair.nodes_a[idx]]].index(ax_a)
                ][0]
                fixed[ax_here] = vals[gi]
            off = len(setting_slots)
            for i, node_a in enumerate(pair.nodes_a):
                node_here = member_map[node_a]
                fixed[layout.outcome_axis_of[node_here]] = vals[off + i]
            members_set = set(members)
            for node in infl.nodes():
                if node in members_set:
                    continue
                summed.append(layout.outcome_axis_of[node])
                for ax, _base, _card in layout.setting_axes_of.get(node, []):
                    fixed[ax] = np.zeros(n_rows, dtype=np.int64)
            return _flat_cols(layout.dims, layout.strides, layout.offset, fixed, summed)

        cols_a = side_cols(a, la, pair.nodes_a)
        cols_b = side_cols(b, lb, pair.nodes_b)
        if self_pair and cols_a.shape[1] == 1 and cols_b.shape[1] == 1:
            keep = cols_a[:, 0] < cols_b[:, 0]
            cols_a, cols_b = cols_a[keep], cols_b[keep]
            if cols_a.size == 0:
                return
        self._rows.add_marginal_equality(cols_a, cols_b, 0.0, "cross-inflation")

    def _emit_p_normalization(self):
        n_rows, vals = _grid(list(self.p_setting_cards))
        fixed = {
            self.p_axis_of_setting(p): vals[i] for i, p in enumerate(self.base_names)
        }
        summed = [self.p_axis_of_outcome(n) for n in self.node_names]
        cols = self.p_cols(fixed, summed)
        self._rows.add_marginal_equality(cols, None, 1.0, "normalization")


@lru_cache(maxsize=16)
def _cached_system(scenario: EveScenario, level: LevelVector) -> ConstraintSystem:
    return ConstraintSystem(enumerate_inflations(scenario, level))


def build_constraints(inflations) -> ConstraintSystem:
    """Assemble the full equality system for a bundle of inflations."""
    return ConstraintSystem(list(inflations))


def constraint_system_for(scenario: EveScenario, level) -> ConstraintSystem:
    """Enumerate inflations and build (and cache) their constraint system."""
    if not isinstance(level, LevelVector):
        level = LevelVector(tuple(level))
    return _cached_system(scenario, level)
