"""Command-line front end.

Subcommands: gen-dist, certify-randomness, certify-no-randomness,
list-inflations, export-lp.  All flags are long-form; reports are JSON with
stable field names, written atomically, and reproducible byte-for-byte for
a fixed seed up to the wall_time_s field.

Exit codes: 0 for a completed run (including Inconclusive certification
outcomes), 2 for input errors, 1 for solver failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import certify
from .bilinear import Inconclusive
from .certify import (
    DisprovenByLP,
    NoRandomnessCertificate,
    distribution_fingerprint,
    write_report,
)
from .errors import NetrandError, SolverFailure
from .inflate import enumerate_inflations
from .networks import BUILTIN_NETWORKS, attach_eavesdropper, interrupt, load_network
from .tables import GENERATORS, load_distribution, pr_triangle, save_distribution


def _network_from(spec: str):
    if spec in BUILTIN_NETWORKS:
        return BUILTIN_NETWORKS[spec]()
    return load_network(spec)


def _parse_level(text: str) -> tuple:
    return tuple(int(v) for v in text.split(","))


def _emit(report: dict, out_path):
    if out_path:
        write_report(out_path, report)
    else:
        print(json.dumps({k: report.get(k) for k in sorted(report)}, indent=2))


def cmd_gen_dist(args) -> int:
    name = args.name
    if name not in GENERATORS:
        print(f"error: unknown distribution {name!r}; choose from "
              f"{sorted(GENERATORS)}", file=sys.stderr)
        return 2
    try:
        if name == "pr-triangle" and args.params:
            e1, e2, e3 = (float(v) for v in args.params.split(","))
            table = pr_triangle(e1, e2, e3)
        else:
            table = GENERATORS[name]()
    except (NetrandError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    save_distribution(table, args.out)
    return 0


def cmd_list_inflations(args) -> int:
    network = _network_from(args.network)
    target = args.target.split(",") if args.target else [network.parties[0].name]
    scenario = interrupt(attach_eavesdropper(network, target, joint=args.joint))
    for infl in enumerate_inflations(scenario, _parse_level(args.level)):
        print(infl.signature())
    return 0


def cmd_export_lp(args) -> int:
    network = _network_from(args.network)
    dist = load_distribution(args.dist)
    targets = args.target.split(",")
    setting = (
        tuple(int(v) for v in args.setting.split(","))
        if args.setting
        else tuple(0 for _ in network.parties)
    )
    info = certify.export_guessing_lp(
        dist, network, targets, setting, _parse_level(args.level),
        args.out, joint=args.joint,
    )
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_certify_randomness(args) -> int:
    network = _network_from(args.network)
    dist = load_distribution(args.dist)
    targets = args.target.split(",")
    level = _parse_level(args.level)
    t0 = time.perf_counter()
    if args.setting:
        setting = tuple(int(v) for v in args.setting.split(","))
        bound = certify.guessing_bound(
            dist, network, targets, setting, level, joint=args.joint
        )
    else:
        bound = certify.worst_guess_bound(
            dist, network, targets, level, joint=args.joint
        )
    report = {
        "program": "guessing-bound",
        "fingerprint": distribution_fingerprint(dist),
        "level": list(level),
        "d": None,
        "status": "Optimal",
        "bound": round(bound.bound, 6),
        "residual": None,
        "wall_time_s": time.perf_counter() - t0,
        "backend": args.backend,
        "seed": args.seed,
    }
    _emit(report, args.out)
    return 0


_NO_RANDOMNESS_PROGRAMS = (
    "biloc-classical-parents",
    "triangle-classical-parents",
    "biloc-embedded-bell",
    "triangle-embedded-bell",
)


def cmd_certify_no_randomness(args) -> int:
    dist = load_distribution(args.dist)
    program = args.program
    if program not in _NO_RANDOMNESS_PROGRAMS:
        print(f"error: unknown program {program!r}; choose from "
              f"{_NO_RANDOMNESS_PROGRAMS}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    cover = set(args.cover.split(",")) if args.cover else None
    if program == "biloc-classical-parents":
        result = certify.no_randomness_biloc_charlie(dist)
    elif program == "triangle-classical-parents":
        result = certify.no_randomness_triangle_classical_parents(
            dist, args.hidden_card, restarts=args.restarts, seed=args.seed
        )
    elif program == "biloc-embedded-bell":
        if cover:
            result = certify.multiparty_extension(
                dist, cover, kind=program, restarts=args.restarts, seed=args.seed
            )
        else:
            result = certify.no_randomness_biloc_bob_embedded(
                dist, restarts=args.restarts, seed=args.seed
            )
    else:
        if cover:
            result = certify.multiparty_extension(
                dist, cover, kind=program, d=args.hidden_card,
                restarts=args.restarts, seed=args.seed,
            )
        else:
            result = certify.no_randomness_triangle_bob_embedded(
                dist, args.hidden_card, restarts=args.restarts, seed=args.seed
            )
    if isinstance(result, NoRandomnessCertificate):
        status = "Feasible"
        residual = round(result.max_residual, 6)
    elif isinstance(result, DisprovenByLP):
        status = "DisprovenByLP"
        residual = None
    elif isinstance(result, Inconclusive):
        status = "Inconclusive"
        residual = (
            None if result.best_residual != result.best_residual
            else round(result.best_residual, 6)
        )
    else:
        print(f"error: solver returned {result}", file=sys.stderr)
        return 1
    report = {
        "program": program,
        "fingerprint": distribution_fingerprint(dist),
        "level": None,
        "d": args.hidden_card,
        "status": status,
        "bound": None,
        "residual": residual,
        "wall_time_s": time.perf_counter() - t0,
        "backend": args.backend,
        "seed": args.seed,
    }
    _emit(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netrand",
        description="Certify the presence or absence of intrinsic randomness "
        "in network causal scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dist", help="write a built-in distribution file")
    p.add_argument("name")
    p.add_argument("--out", required=True)
    p.add_argument("--params", help="comma-separated generator parameters")
    p.set_defaults(func=cmd_gen_dist)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", required=True,
                        help="builtin name (bell/bilocality/triangle) or file")
    common.add_argument("--joint", action="store_true")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--backend", choices=("reference", "export"),
                        default="reference")
    common.add_argument("--out")
    common.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("list-inflations", parents=[common],
                       help="print canonical wiring signatures")
    p.add_argument("--level", required=True)
    p.add_argument("--target", help="comma-separated target parties")
    p.set_defaults(func=cmd_list_inflations)

    p = sub.add_parser("export-lp", parents=[common],
                       help="write the guessing LP as a free MPS file")
    p.add_argument("--dist", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--level", required=True)
    p.add_argument("--setting", help="comma-separated setting assignment")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("certify-randomness", parents=[common],
                       help="upper-bound the guessing probability")
    p.add_argument("--dist", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--level", required=True)
    p.add_argument("--setting", help="fixed setting assignment; omit for worst case")
    p.set_defaults(func=cmd_certify_randomness)

    p = sub.add_parser("certify-no-randomness", parents=[common],
                       help="search for an explicit no-randomness model")
    p.add_argument("--dist", required=True)
    p.add_argument("--program", required=True)
    p.add_argument("--hidden-card", type=int, default=2, dest="hidden_card")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--cover", help="comma-separated parties for joint coverage")
    p.set_defaults(func=cmd_certify_no_randomness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except NetrandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
