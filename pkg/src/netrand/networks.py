"""Exogenous network scenarios and their eavesdropper extensions.

A network is a two-layer DAG: latent sources at the root, observed parties
below, each party fed by one or more sources and by its own setting variable.
Settingless parties carry a setting of cardinality 1 so that every operation
can iterate uniformly over settings.

The eavesdropper extension adds a single observed node ``E`` that reads a
share of every source and all setting values.  Interrupting the extension
replaces Eve's read of each original setting by an independent duplicate of
equal cardinality, which is the first rung of the inflation hierarchy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import AlreadyInterrupted, ParseError, UnknownParty

EVE_NAME = "E"


@dataclass(frozen=True)
class Party:
    name: str
    outcome_card: int
    setting_card: int = 1


@dataclass(frozen=True)
class Source:
    name: str
    children: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(sorted(self.children)))


@dataclass(frozen=True)
class Network:
    """Immutable exogenous network; parties and sources are kept in
    lexicographic name order so downstream variable indexing is reproducible.
    """

    parties: tuple[Party, ...]
    sources: tuple[Source, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "parties", tuple(sorted(self.parties, key=lambda p: p.name))
        )
        object.__setattr__(
            self, "sources", tuple(sorted(self.sources, key=lambda s: s.name))
        )

    def party(self, name: str) -> Party:
        for p in self.parties:
            if p.name == name:
                return p
        raise UnknownParty(f"no party named {name!r}")

    def party_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    def sources_of(self, name: str) -> tuple[str, ...]:
        return tuple(s.name for s in self.sources if name in s.children)

    def outcome_cards(self) -> tuple[int, ...]:
        return tuple(p.outcome_card for p in self.parties)

    def setting_cards(self) -> tuple[int, ...]:
        return tuple(p.setting_card for p in self.parties)


def validate(network: Network) -> list[str]:
    """Return every invariant violation as a human-readable string.

    An empty list means the network is valid.  Violations are data, not
    errors: callers decide whether to raise.
    """
    violations = []
    names = [p.name for p in network.parties]
    for p in network.parties:
        if p.outcome_card < 1:
            violations.append(f"party {p.name} has outcome cardinality {p.outcome_card} < 1")
        if p.setting_card < 1:
            violations.append(f"party {p.name} has setting cardinality {p.setting_card} < 1")
    dupes = {n for n in names if names.count(n) > 1}
    for n in sorted(dupes):
        violations.append(f"party name {n} is not unique")
    src_names = [s.name for s in network.sources]
    for n in sorted({n for n in src_names if src_names.count(n) > 1}):
        violations.append(f"source name {n} is not unique")
    for s in network.sources:
        if len(s.children) < 2:
            violations.append(f"source {s.name} has fewer than two children")
        if len(set(s.children)) != len(s.children):
            violations.append(f"source {s.name} lists a child more than once")
        for c in s.children:
            if c not in names:
                violations.append(f"source {s.name} feeds unknown party {c}")
    fed = {c for s in network.sources for c in s.children}
    for p in network.parties:
        if p.name not in fed:
            violations.append(f"party {p.name} has no source")
    return violations


@dataclass(frozen=True)
class EveScenario:
    """A network extended with a listening eavesdropper.

    Eve reads a share of every source and, before interruption, the value of
    every party's setting.  After interruption each original setting feeds
    only its own party while Eve measures the sources according to an
    independent duplicate of equal cardinality.
    """

    base: Network
    targets: tuple[str, ...]
    joint: bool
    eve_outcome_card: int
    interrupted: bool = False
    eve_setting_cards: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.eve_setting_cards:
            object.__setattr__(
                self, "eve_setting_cards", self.base.setting_cards()
            )

    # -- node-level view used by the inflation machinery ------------------

    def node_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.base.party_names() + (EVE_NAME,)))

    def outcome_card(self, name: str) -> int:
        if name == EVE_NAME:
            return self.eve_outcome_card
        return self.base.party(name).outcome_card

    def parent_sources(self, name: str) -> tuple[str, ...]:
        if name == EVE_NAME:
            return tuple(s.name for s in self.base.sources)
        return self.base.sources_of(name)

    def setting_vars(self, name: str) -> tuple[tuple[str, int], ...]:
        """Setting variables read by a node, as (label, cardinality) pairs.

        Unit-cardinality settings are kept so that axis layouts stay uniform.
        Eve's labels carry a tilde to mark the interrupted duplicates.
        """
        if name != EVE_NAME:
            p = self.base.party(name)
            return ((f"X[{p.name}]", p.setting_card),)
        if self.interrupted:
            return tuple(
                (f"X~[{p.name}]", c)
                for p, c in zip(self.base.parties, self.eve_setting_cards)
            )
        return tuple(
            (f"X[{p.name}]", c)
            for p, c in zip(self.base.parties, self.eve_setting_cards)
        )


def attach_eavesdropper(
    network: Network, target_parties, joint: bool = False
) -> EveScenario:
    """Extend a network with a listening Eve aimed at the given parties.

    Eve's outcome alphabet matches the single target's alphabet, or the
    product alphabet when ``joint`` is set.
    """
    targets = tuple(sorted(target_parties))
    if not targets:
        raise UnknownParty("target party set is empty")
    names = network.party_names()
    for t in targets:
        if t not in names:
            raise UnknownParty(f"target {t!r} is not a party of the network")
    if EVE_NAME in names:
        raise UnknownParty(f"network already contains a party named {EVE_NAME}")
    if joint:
        card = 1
        for t in targets:
            card *= network.party(t).outcome_card
    else:
        if len(targets) != 1:
            raise UnknownParty(
                "per-party mode takes exactly one target; pass joint=True "
                "to guess several parties at once"
            )
        card = network.party(targets[0]).outcome_card
    return EveScenario(
        base=network,
        targets=targets,
        joint=joint,
        eve_outcome_card=card,
        interrupted=False,
    )


def interrupt(scenario: EveScenario) -> EveScenario:
    """Duplicate every setting for Eve's exclusive use.

    The duplicates range over the same cardinalities as the originals; when
    there is nothing of nonunit cardinality to duplicate the operation only
    flips the flag.
    """
    if scenario.interrupted:
        raise AlreadyInterrupted("scenario is already interrupted")
    return EveScenario(
        base=scenario.base,
        targets=scenario.targets,
        joint=scenario.joint,
        eve_outcome_card=scenario.eve_outcome_card,
        interrupted=True,
        eve_setting_cards=scenario.eve_setting_cards,
    )


# -- built-in scenarios ----------------------------------------------------


def bell_network(outcome_cards=(2, 2), setting_cards=(2, 2)) -> Network:
    return Network(
        parties=(
            Party("A", outcome_cards[0], setting_cards[0]),
            Party("B", outcome_cards[1], setting_cards[1]),
        ),
        sources=(Source("L[AB]", ("A", "B")),),
    )


def bilocality_network(outcome_cards=(2, 2, 2), setting_cards=(2, 1, 2)) -> Network:
    return Network(
        parties=(
            Party("A", outcome_cards[0], setting_cards[0]),
            Party("B", outcome_cards[1], setting_cards[1]),
            Party("C", outcome_cards[2], setting_cards[2]),
        ),
        sources=(
            Source("L[AB]", ("A", "B")),
            Source("L[BC]", ("B", "C")),
        ),
    )


def triangle_network(outcome_cards=(2, 2, 2), setting_cards=(1, 1, 1)) -> Network:
    return Network(
        parties=(
            Party("A", outcome_cards[0], setting_cards[0]),
            Party("B", outcome_cards[1], setting_cards[1]),
            Party("C", outcome_cards[2], setting_cards[2]),
        ),
        sources=(
            Source("L[AB]", ("A", "B")),
            Source("L[AC]", ("A", "C")),
            Source("L[BC]", ("B", "C")),
        ),
    )


BUILTIN_NETWORKS = {
    "bell": bell_network,
    "bilocality": bilocality_network,
    "triangle": triangle_network,
}


# -- file format -----------------------------------------------------------
#
# A network file is JSON with exactly two top-level keys:
#   parties: list of {"name": str, "outcomes": int, "settings": int}
#   sources: list of {"name": str, "children": [str, ...]}
# Unknown keys anywhere are rejected.


def load_network(path) -> Network:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read network file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("network file must hold a JSON object")
    extra = set(doc) - {"parties", "sources"}
    if extra:
        raise ParseError(f"unknown top-level keys: {sorted(extra)}")
    if "parties" not in doc or "sources" not in doc:
        raise ParseError("network file needs both 'parties' and 'sources'")
    parties = []
    for entry in doc["parties"]:
        extra = set(entry) - {"name", "outcomes", "settings"}
        if extra:
            raise ParseError(f"unknown party keys: {sorted(extra)}")
        parties.append(
            Party(
                str(entry["name"]),
                int(entry["outcomes"]),
                int(entry.get("settings", 1)),
            )
        )
    sources = []
    for entry in doc["sources"]:
        extra = set(entry) - {"name", "children"}
        if extra:
            raise ParseError(f"unknown source keys: {sorted(extra)}")
        sources.append(Source(str(entry["name"]), tuple(entry["children"])))
    return Network(parties=tuple(parties), sources=tuple(sources))


def save_network(network: Network, path) -> None:
    doc = {
        "parties": [
            {"name": p.name, "outcomes": p.outcome_card, "settings": p.setting_card}
            for p in network.parties
        ],
        "sources": [
            {"name": s.name, "children": list(s.children)} for s in network.sources
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
