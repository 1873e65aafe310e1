"""Batch front door: load structures, run constructions and verifications,
emit machine-readable reports.

JSON reports go to stdout (or a human summary with --format summary);
diagnostics go to stderr.  Exit codes: 0 success with all checks passing,
1 some check failed (the report carries a counterexample), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import exhaustive_digraphs, random_digraph
from .groups import GroupError, automorphism_group, pointwise_stabilizer
from .interpretation import (
    SchemeError,
    negate_translation,
    redirect_bijection,
    scheme_to_json_dict,
    validate_scheme,
    weaken_equivalence,
)
from .lifting import (
    LiftConfig,
    LiftError,
    PaddingAssignment,
    build_lift,
    continuity_witness,
    direct_induced,
    generate_scheme,
    limit_elements,
    padding_triples,
    project_automorphism,
)
from .stability import (
    StabilityError,
    qf_type_census,
    stability_report,
    stabilizer_orbits,
)
from .structures import (
    StructureError,
    Structure,
    relational_companion,
    structure_from_json,
    structure_to_dict,
)

import random

DEFAULT_SIZE_GUARD = 6


class InputError(Exception):
    pass


class CheckFailure(Exception):
    def __init__(self, report: dict):
        super().__init__("check failed")
        self.report = report


def _load_structure(path: str, max_size: int) -> Structure:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    try:
        M = structure_from_json(text)
    except StructureError as e:
        raise InputError(f"{path}: {e}") from e
    if M.size > max_size:
        raise InputError(
            f"{path}: domain size {M.size} exceeds the guard {max_size} "
            "(raise it with --max-size)"
        )
    return M


def _parse_padding(text: str, M: Structure, k: int) -> PaddingAssignment | None:
    if text == "auto":
        return None
    if text.startswith("explicit:"):
        try:
            widths = [int(x) for x in text[len("explicit:"):].split(",") if x]
        except ValueError as e:
            raise InputError(f"bad padding list: {e}") from e
        triples = padding_triples(M.sig, k)
        if len(widths) != len(triples):
            raise InputError(
                f"padding list needs {len(triples)} widths (one per relation/copy pair)"
            )
        pads = {}
        for (rel, i), m in zip(triples, widths):
            pads[(rel, i)] = m - M.sig.relation_arity(rel)
        padding = PaddingAssignment(pads)
        try:
            padding.validate(M.sig, k)
        except LiftError as e:
            raise InputError(str(e)) from e
        return padding
    raise InputError("--padding must be 'auto' or 'explicit:<m1,m2,...>'")


def _lift_config(args, M: Structure) -> LiftConfig:
    padding = _parse_padding(args.padding, M, args.k)
    return LiftConfig(
        k=args.k,
        include_repetition_tuples=args.include_repetitions,
        padding=padding,
    )


def _parse_elements(text: str) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as e:
        raise InputError(f"bad element list {text!r}: {e}") from e


# -- subcommands -----------------------------------------------------------------


def _cmd_lift(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    N = build_lift(M, _lift_config(args, M))
    report = N.to_report_dict()
    summary = [
        f"lift: {M.size} source elements -> {N.structure.size} lift elements",
    ]
    return report, summary


def _cmd_aut(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    G = automorphism_group(M)
    report = G.to_json_dict()
    return report, [f"automorphism group of order {report['order']}"]


def _cmd_verify_iso(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    N = build_lift(M, _lift_config(args, M))
    GM = automorphism_group(M)
    GN = automorphism_group(N.structure)
    order_M, order_N = GM.order(), GN.order()

    bijective = order_M == order_N
    for g in GM.generators:
        if project_automorphism(N, direct_induced(N, g)) != g:
            bijective = False
    for g in GN.generators:
        if direct_induced(N, project_automorphism(N, g)) != g:
            bijective = False

    continuity = "pass"
    singletons = [()] + [(b,) for b in range(N.structure.size)]
    members_M = GM.elements()
    for B in singletons:
        A = continuity_witness(N, B)
        for pi in members_M:
            if all(pi(a) == a for a in A):
                pihat = direct_induced(N, pi)
                if any(pihat(b) != b for b in B):
                    continuity = "fail"
    for a in range(M.size):
        stab_N = pointwise_stabilizer(GN, (N.base_id(a),))
        for g in stab_N.generators:
            if project_automorphism(N, g)(a) != a:
                continuity = "fail"

    report = {
        "order_M": order_M,
        "order_N": order_N,
        "bijective": bijective,
        "continuity_witnesses": continuity,
    }
    summary = [f"|Aut(M)| = {order_M}, |Aut(lift)| = {order_N}"]
    if not (bijective and continuity == "pass"):
        raise CheckFailure(report)
    return report, summary


def _cmd_scheme_check(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    N = build_lift(M, _lift_config(args, M))
    scheme, bijections = generate_scheme(M, N)
    if args.mutate == "negate-relformula":
        scheme = negate_translation(scheme, 0)
    elif args.mutate == "break-ep":
        idx = next(
            (i for i, s in enumerate(scheme.sorts) if s.width > 1), 0
        )
        scheme = weaken_equivalence(scheme, idx)
    elif args.mutate == "break-fp":
        key = next(
            (k for k, fmap in sorted(
                bijections.maps.items(), key=lambda kv: kv[0].key
            ) if len(fmap) >= 2),
            None,
        )
        if key is None:
            raise InputError("no sort with two elements; cannot break the bijection")
        bijections = redirect_bijection(bijections, key)
    companion = relational_companion(N.structure)
    validation = validate_scheme(M, companion, scheme, bijections)
    report = {
        "validation": validation.to_json_dict(),
        "scheme": scheme_to_json_dict(scheme, bijections),
        "mutation": args.mutate,
    }
    summary = [
        f"scheme over {M.size}-element structure: "
        + ("all conditions pass" if validation.passed else "FAILED")
    ]
    for c in validation.failures():
        summary.append(f"  failed {c.condition}: {c.witness}")
    if not validation.passed:
        raise CheckFailure(report)
    return report, summary


def _cmd_limit(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    N = build_lift(M, _lift_config(args, M))
    rels = [args.relation] if args.relation else [n for n, _ in M.sig.relations]
    table = {}
    for rel in rels:
        if not M.sig.has_relation(rel):
            raise InputError(f"unknown relation {rel!r}")
        elems = limit_elements(N, rel)
        table[rel] = [
            {"id": e, "coords": list(N.provenance[e].coords)} for e in elems
        ]
    report = {"limit_elements": table}
    summary = [f"{rel}: {len(v)} limit elements" for rel, v in table.items()]
    return report, summary


def _cmd_census(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    A = _parse_elements(args.parameters)
    classes = stabilizer_orbits(M, A)
    census = qf_type_census(M, A, depth=args.depth)
    report = {
        "A": sorted(set(A)),
        "classes": [list(c) for c in classes],
        "class_count": len(classes),
        "qf_types": {
            "depth": args.depth,
            "count": census.count,
            "representatives": list(census.representatives),
        },
    }
    summary = [
        f"{len(classes)} stabilizer classes, {census.count} quantifier-free types"
    ]
    return report, summary


def _cmd_report(args) -> tuple[dict, list[str]]:
    M = _load_structure(args.infile, args.max_size)
    ks = [int(x) for x in args.ks.split(",") if x]
    As = [_parse_elements(a) for a in (args.parameters or [""])]
    census = stability_report(M, ks, As, structure_id=args.infile)
    report = census.to_json_dict()
    summary = [
        f"k={e['k']} A={e['A']}: total {e['total']} ({e['growth_law']})"
        for e in census.entries
    ]
    if not census.all_pass:
        raise CheckFailure(report)
    return report, summary


def _cmd_corpus(args) -> tuple[dict, list[str]]:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create {out_dir}: {e}") from e
    structures: list[tuple[str, Structure]] = []
    if args.exhaustive is not None:
        if args.exhaustive > 3:
            raise InputError("exhaustive corpus is guarded to size <= 3")
        structures.extend(exhaustive_digraphs(args.exhaustive))
    if args.random:
        if args.size > DEFAULT_SIZE_GUARD:
            raise InputError(f"random corpus size guarded to <= {DEFAULT_SIZE_GUARD}")
        rng = random.Random(args.seed)
        for i in range(args.random):
            structures.append((f"random_s{args.seed}_{i}", random_digraph(rng, args.size)))
    if not structures:
        raise InputError("nothing to generate: pass --exhaustive N and/or --random COUNT")
    files = []
    for name, M in structures:
        path = out_dir / f"{name}.json"
        path.write_text(
            json.dumps(structure_to_dict(M), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        files.append(path.name)
    report = {"count": len(files), "files": files}
    return report, [f"wrote {len(files)} structures to {out_dir}"]


# -- driver ------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, with_lift: bool = False) -> None:
    p.add_argument("--in", dest="infile", required=True, help="structure JSON file")
    p.add_argument("--max-size", type=int, default=DEFAULT_SIZE_GUARD,
                   help="domain size guard (default %(default)s)")
    p.add_argument("--format", choices=("json", "summary"), default="json")
    if with_lift:
        p.add_argument("--k", type=int, default=1, help="copy bound (default 1)")
        p.add_argument("--include-repetitions", action="store_true",
                       help="fibers range over all tuples, not just repetition-free ones")
        p.add_argument("--padding", default="auto",
                       help="'auto' or 'explicit:<m1,m2,...>' widths in canonical order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablelift",
        description="Stabilized lifts of finite relational structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lift", help="construct a lift and report its elements")
    _add_common(p, with_lift=True)
    p.set_defaults(func=_cmd_lift)

    p = sub.add_parser("aut", help="automorphism group of a structure")
    _add_common(p)
    p.set_defaults(func=_cmd_aut)

    p = sub.add_parser("verify-iso", help="verify the automorphism-group transfer")
    _add_common(p, with_lift=True)
    p.set_defaults(func=_cmd_verify_iso)

    p = sub.add_parser("scheme-check", help="generate and validate the lift's scheme")
    _add_common(p, with_lift=True)
    p.add_argument("--mutate", choices=("negate-relformula", "break-ep", "break-fp"),
                   default=None, help="plant a defect before validating")
    p.set_defaults(func=_cmd_scheme_check)

    p = sub.add_parser("limit", help="limit elements of a lift")
    _add_common(p, with_lift=True)
    p.add_argument("--relation", default=None)
    p.set_defaults(func=_cmd_limit)

    p = sub.add_parser("census", help="stabilizer classes and type counts")
    _add_common(p)
    p.add_argument("--A", dest="parameters", default="",
                   help="comma-separated parameter elements")
    p.add_argument("--depth", type=int, default=1)
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("report", help="stability census across copy bounds")
    _add_common(p)
    p.add_argument("--ks", default="1,2", help="comma-separated copy bounds")
    p.add_argument("--A", dest="parameters", action="append",
                   help="parameter set (repeatable; comma-separated source elements)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("corpus", help="write a deterministic structure corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--exhaustive", type=int, default=None,
                   help="all digraphs of exactly this size (max 3)")
    p.add_argument("--random", type=int, default=0, help="number of random digraphs")
    p.add_argument("--size", type=int, default=4, help="random digraph size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "summary"), default="json")
    p.set_defaults(func=_cmd_corpus)

    return parser


def _emit(report: dict, summary: list[str], fmt: str) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    if fmt == "json":
        sys.stdout.write(text + "\n")
        for line in summary:
            sys.stderr.write(line + "\n")
    else:
        for line in summary:
            sys.stdout.write(line + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, summary = args.func(args)
    except CheckFailure as e:
        _emit(e.report, ["check failed"], args.format)
        return 1
    except (
        InputError,
        StructureError,
        LiftError,
        SchemeError,
        GroupError,
        StabilityError,
    ) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    _emit(report, summary, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
