"""Interpretation schemes between finite relational structures.

A scheme presents one structure sort-by-sort inside another: each sort (an
atomic one-variable type of the target) gets a definable set with an
equivalence relation over the host, a bijection onto the quotient, and each
target relation gets a translation formula.  A validated scheme transports
every host automorphism to a target automorphism.

Variable blocks: a sort of width m uses host variables x0..x(m-1); its
equivalence formula uses x0..x(2m-1) with the second block as the partner
tuple; a translation formula for a relation over sorts of widths m0..m(k-1)
uses consecutive blocks of those widths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .formulas import (
    AtomicType,
    Formula,
    definable_set,
    eval_formula,
    format_formula,
    free_variables,
    sort_partition,
)
from .groups import Permutation, automorphism_group, is_automorphism
from .structures import Structure

__all__ = [
    "SchemeError",
    "SchemeSort",
    "SchemeRel",
    "InterpretationScheme",
    "SortBijections",
    "ValidationReport",
    "CheckResult",
    "definable_quotient",
    "validate_scheme",
    "induced_automorphism",
    "check_classical_interpretation",
    "negate_translation",
    "weaken_equivalence",
    "redirect_bijection",
    "scheme_to_json_dict",
]


class SchemeError(ValueError):
    """Structural problems: unknown sort keys, width mismatches, bad blocks."""


@dataclass(frozen=True)
class SchemeSort:
    """One sort of the target: definable set plus equivalence over the host."""

    key: AtomicType
    width: int
    domain_formula: Formula
    equiv_formula: Formula

    def __post_init__(self) -> None:
        if self.width < 1:
            raise SchemeError("sort width must be positive")
        if free_variables(self.domain_formula) != frozenset(range(self.width)):
            raise SchemeError(
                f"sort domain formula must use exactly x0..x{self.width - 1}"
            )
        if free_variables(self.equiv_formula) != frozenset(range(2 * self.width)):
            raise SchemeError(
                f"sort equivalence formula must use exactly x0..x{2 * self.width - 1}"
            )


@dataclass(frozen=True)
class SchemeRel:
    """Translation formula for one target relation at one tuple of sorts."""

    rel: str
    sort_keys: tuple[AtomicType, ...]
    formula: Formula


@dataclass(frozen=True)
class InterpretationScheme:
    sorts: tuple[SchemeSort, ...]
    rels: tuple[SchemeRel, ...]

    def __post_init__(self) -> None:
        keys = [s.key for s in self.sorts]
        if len(set(keys)) != len(keys):
            raise SchemeError("sort keys must be distinct")
        widths = {s.key: s.width for s in self.sorts}
        for sr in self.rels:
            for k in sr.sort_keys:
                if k not in widths:
                    raise SchemeError(f"unknown sort key in translation for {sr.rel!r}")
            total = sum(widths[k] for k in sr.sort_keys)
            if free_variables(sr.formula) != frozenset(range(total)):
                raise SchemeError(
                    f"translation formula for {sr.rel!r} must use exactly x0..x{total - 1}"
                )

    def sort(self, key: AtomicType) -> SchemeSort:
        for s in self.sorts:
            if s.key == key:
                return s
        raise SchemeError("unknown sort key")

    def translation(self, rel: str, sort_keys: tuple[AtomicType, ...]) -> SchemeRel | None:
        for sr in self.rels:
            if sr.rel == rel and sr.sort_keys == sort_keys:
                return sr
        return None


@dataclass(frozen=True)
class SortBijections:
    """Per sort, the map from target elements of that sort to representative
    host tuples (each representative names its equivalence class; the
    canonical choice is the lexicographically least class member)."""

    maps: dict[AtomicType, dict[int, tuple[int, ...]]] = field(default_factory=dict)

    def __getitem__(self, key: AtomicType) -> dict[int, tuple[int, ...]]:
        return self.maps[key]


@dataclass(frozen=True)
class CheckResult:
    condition: str
    passed: bool
    witness: str | None = None


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"condition": c.condition, "passed": c.passed, "witness": c.witness}
                for c in self.checks
            ],
        }


# -- quotients ----------------------------------------------------------------


class _Quotient:
    """r(M)/E with class lookup; verifies E is an equivalence on r(M)."""

    def __init__(self, M: Structure, r: Formula, E: Formula):
        self.width = len(free_variables(r))
        dom = definable_set(M, r)
        if free_variables(E) != frozenset(range(2 * self.width)):
            raise SchemeError(
                f"equivalence formula must use exactly x0..x{2 * self.width - 1}"
            )

        def related(s: tuple, t: tuple) -> bool:
            v = dict(enumerate(s))
            v.update({self.width + i: x for i, x in enumerate(t)})
            return eval_formula(M, E, v)

        rows: dict[tuple, set[tuple]] = {s: set() for s in dom}
        for s in dom:
            for t in dom:
                if related(s, t):
                    rows[s].add(t)
        for s in dom:
            if s not in rows[s]:
                raise SchemeError(f"not an equivalence relation: not reflexive at {s}")
            for t in rows[s]:
                if s not in rows[t]:
                    raise SchemeError(
                        f"not an equivalence relation: not symmetric at ({s}, {t})"
                    )
        # group into tentative classes, then confirm rows match the grouping;
        # a mismatch yields an explicit transitivity witness
        self.class_of: dict[tuple, int] = {}
        self.classes: list[tuple[tuple, ...]] = []
        for s in dom:
            if s in self.class_of:
                continue
            members = set()
            queue = [s]
            while queue:
                u = queue.pop()
                if u in members:
                    continue
                members.add(u)
                queue.extend(rows[u] - members)
            idx = len(self.classes)
            self.classes.append(tuple(sorted(members)))
            for u in members:
                self.class_of[u] = idx
        for s in dom:
            for t in dom:
                if (self.class_of[s] == self.class_of[t]) != (t in rows[s]):
                    u = next(x for x in rows[s] if t in rows[x])
                    raise SchemeError(
                        "not an equivalence relation: not transitive at "
                        f"({s}, {u}, {t})"
                    )
        self.domain = dom
        self.representatives = tuple(c[0] for c in self.classes)


# Quotients are pure functions of (structure, formulas); validation sweeps
# and induced-automorphism transport hit the same ones repeatedly, so cache
# them keyed by formula pair with identity comparison on the structure.
_QUOTIENT_CACHE: dict[tuple[Formula, Formula], list[tuple[Structure, _Quotient]]] = {}


def _quotient_for(M: Structure, r: Formula, E: Formula) -> _Quotient:
    entries = _QUOTIENT_CACHE.setdefault((r, E), [])
    for ref, q in entries:
        if ref is M:
            return q
    q = _Quotient(M, r, E)
    entries.append((M, q))
    return q


def definable_quotient(
    M: Structure, r: Formula, E: Formula
) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """The classes of r(M) under E, each sorted, ordered by least member.

    Raises SchemeError with a witness if E is not an equivalence on r(M).
    """
    q = _Quotient(M, r, E)
    return tuple(sorted(q.classes, key=lambda c: c[0]))


# -- scheme validation ---------------------------------------------------------


def _realized_sorts(M2: Structure) -> dict[AtomicType, tuple[int, ...]]:
    return sort_partition(M2)


def _require_relational(M: Structure, label: str) -> None:
    if not M.is_relational():
        raise SchemeError(
            f"{label} must be purely relational (use relational_companion first)"
        )


def validate_scheme(
    M1: Structure,
    M2: Structure,
    scheme: InterpretationScheme,
    bijections: SortBijections,
    *,
    include: tuple[str, ...] = ("sorts", "bijections", "cover", "agreement"),
    relations: set[str] | None = None,
    representative_independence: bool = False,
    early_exit: bool = False,
) -> ValidationReport:
    """Check every scheme condition, reporting pass/fail with witnesses.

    ``include`` selects condition families (used to focus mutation tests);
    ``relations`` restricts the agreement scan to the named target relations.
    ``representative_independence`` additionally re-checks relation agreement
    over every class member rather than just the stored representative
    (quadratic in class sizes; meant for small hosts).
    """
    _require_relational(M1, "host structure")
    _require_relational(M2, "target structure")
    report = ValidationReport()

    def record(condition: str, passed: bool, witness: str | None = None) -> bool:
        report.checks.append(CheckResult(condition, passed, witness))
        return early_exit and not passed

    realized = _realized_sorts(M2)
    scheme_keys = {s.key for s in scheme.sorts}
    if "cover" in include:
        missing = set(realized) - scheme_keys
        extra = scheme_keys - set(realized)
        if record(
            "sort-cover",
            not missing and not extra,
            None
            if not missing and not extra
            else f"missing={len(missing)} extra={len(extra)} sort keys",
        ):
            return report

    quotients: dict[AtomicType, _Quotient | None] = {}
    for idx, s in enumerate(scheme.sorts):
        try:
            quotients[s.key] = _quotient_for(M1, s.domain_formula, s.equiv_formula)
        except SchemeError as e:
            quotients[s.key] = None
            if "sorts" in include:
                if record(f"sort-quotient[{idx}]", False, str(e)):
                    return report
            continue
        if "sorts" in include:
            nonempty = bool(quotients[s.key].domain) or s.key not in realized
            if record(
                f"sort-quotient[{idx}]",
                nonempty,
                None if nonempty else "definable set empty for a realized sort",
            ):
                return report

    element_sort: dict[int, AtomicType] = {}
    for key, block in realized.items():
        for b in block:
            element_sort[b] = key

    if "bijections" in include:
        for idx, s in enumerate(scheme.sorts):
            q = quotients.get(s.key)
            if q is None:
                continue
            block = realized.get(s.key, ())
            fmap = bijections.maps.get(s.key, {})
            problems: list[str] = []
            if set(fmap) != set(block):
                problems.append("map not total on the sort's elements")
            assigned: dict[int, int] = {}
            for b, rep in sorted(fmap.items()):
                if rep not in q.class_of:
                    problems.append(f"representative {rep} outside the definable set")
                    break
                cls = q.class_of[rep]
                if cls in assigned.values():
                    problems.append(f"not injective: class of {rep} hit twice")
                    break
                assigned[b] = cls
            if not problems and set(assigned.values()) != set(range(len(q.classes))):
                problems.append("not onto: some class has no preimage")
            if record(
                f"sort-bijection[{idx}]",
                not problems,
                problems[0] if problems else None,
            ):
                return report

    if "cover" in include:
        missing_pairs = []
        for name, arity in M2.sig.relations:
            for keys in itertools.product(sorted(realized), repeat=arity):
                if scheme.translation(name, keys) is None:
                    missing_pairs.append(name)
        if record(
            "translation-cover",
            not missing_pairs,
            None if not missing_pairs else f"no translation formula for {missing_pairs[0]!r}",
        ):
            return report

    if "agreement" in include:
        rep_of: dict[int, tuple[int, ...]] = {}
        for key, fmap in bijections.maps.items():
            rep_of.update(fmap)
        member_options: dict[int, tuple[tuple[int, ...], ...]] = {}
        if representative_independence:
            for b, rep in rep_of.items():
                q = quotients.get(element_sort[b])
                if q is not None and rep in q.class_of:
                    member_options[b] = q.classes[q.class_of[rep]]
        for name, arity in M2.sig.relations:
            if relations is not None and name not in relations:
                continue
            witness = None
            for elems in itertools.product(M2.domain, repeat=arity):
                keys = tuple(element_sort[e] for e in elems)
                sr = scheme.translation(name, keys)
                if sr is None or any(e not in rep_of for e in elems):
                    witness = f"untranslatable tuple {elems}"
                    break
                holds = elems in M2.relation_sets[name]
                if representative_independence:
                    combos = itertools.product(*(member_options[e] for e in elems))
                else:
                    combos = [tuple(rep_of[e] for e in elems)]
                for blocks in combos:
                    v: dict[int, int] = {}
                    off = 0
                    for block in blocks:
                        for i, x in enumerate(block):
                            v[off + i] = x
                        off += len(block)
                    if eval_formula(M1, sr.formula, v) != holds:
                        witness = f"tuple {elems} (target says {holds})"
                        break
                if witness:
                    break
            label = "relation-agreement" if not representative_independence else "representative-independence"
            if record(f"{label}[{name}]", witness is None, witness):
                return report

    return report


# -- induced automorphisms -----------------------------------------------------


def induced_automorphism(
    M1: Structure,
    M2: Structure,
    scheme: InterpretationScheme,
    bijections: SortBijections,
    pi: Permutation,
) -> Permutation:
    """Transport a host automorphism through a validated scheme.

    A target element maps to the element whose class is the coordinatewise
    image of its representative's class.  Identity goes to identity and
    composition is preserved; the map fails with a diagnostic if the scheme's
    definable sets are not closed under the automorphism.
    """
    if not is_automorphism(M1, pi):
        raise SchemeError("the supplied permutation is not an automorphism of the host")
    realized = _realized_sorts(M2)
    images = [-1] * M2.size
    for s in scheme.sorts:
        block = realized.get(s.key, ())
        if not block:
            continue
        q = _quotient_for(M1, s.domain_formula, s.equiv_formula)
        fmap = bijections.maps.get(s.key, {})
        by_class = {}
        for b in block:
            rep = fmap.get(b)
            if rep is None or rep not in q.class_of:
                raise SchemeError(f"element {b} has no valid representative")
            by_class[q.class_of[rep]] = b
        for b in block:
            moved = pi.apply_tuple(fmap[b])
            cls = q.class_of.get(moved)
            if cls is None or cls not in by_class:
                raise SchemeError(
                    f"scheme not automorphism-invariant: image of {fmap[b]} "
                    "leaves the range of the sort bijection"
                )
            images[b] = by_class[cls]
    pihat = Permutation(tuple(images))
    if not is_automorphism(M2, pihat):
        raise SchemeError("induced map is not an automorphism of the target")
    return pihat


# -- classical interpretability (finite-scale proxy) ---------------------------


def check_classical_interpretation(
    M: Structure,
    N: Structure,
    D: Formula,
    E: Formula,
    alpha: dict[int, tuple[int, ...]],
    extra_relations: dict[str, set[tuple[int, ...]]] | None = None,
) -> ValidationReport:
    """Check the single-sorted interpretation data (definable set D with
    equivalence E, bijection alpha from N's domain onto D/E).

    Because every automorphism-invariant relation on a single finite
    structure is definable without parameters, definability of the pulled
    back relations is checked as closure under the automorphism group acting
    coordinatewise.  ``extra_relations`` lets callers plant additional
    relation interpretations over N to test.
    """
    report = ValidationReport()
    report.checks.append(
        CheckResult("domain-definable", True, None)  # D is given by a formula
    )
    try:
        q = _Quotient(M, D, E)
    except SchemeError as e:
        report.checks.append(CheckResult("equivalence", False, str(e)))
        return report
    report.checks.append(CheckResult("equivalence", True, None))

    problems = []
    if set(alpha) != set(N.domain):
        problems.append("alpha not total on the target domain")
    classes_hit = []
    for b in sorted(alpha):
        rep = alpha[b]
        if rep not in q.class_of:
            problems.append(f"alpha({b}) = {rep} outside the definable set")
            break
        classes_hit.append(q.class_of[rep])
    if not problems:
        if len(set(classes_hit)) != len(classes_hit):
            problems.append("alpha not injective on classes")
        elif set(classes_hit) != set(range(len(q.classes))):
            problems.append("alpha not onto the quotient")
    report.checks.append(
        CheckResult("bijection", not problems, problems[0] if problems else None)
    )
    if problems:
        return report

    cls_to_elem = {q.class_of[alpha[b]]: b for b in alpha}
    G = automorphism_group(M)
    n = q.width

    todo: dict[str, frozenset] = {name: N.relation_sets[name] for name, _ in N.sig.relations}
    for name, tuples in (extra_relations or {}).items():
        todo[name] = frozenset(tuples)

    for name, tuples in sorted(todo.items()):
        arity = len(next(iter(tuples))) if tuples else 0
        witness = None
        if tuples:
            # pull back to the host: concatenations of class members
            def pulled_membership(blocks: tuple[tuple[int, ...], ...]) -> bool:
                elems = tuple(cls_to_elem[q.class_of[b]] for b in blocks)
                return elems in tuples

            for blocks in itertools.product(q.domain, repeat=arity):
                if not pulled_membership(blocks):
                    continue
                for g in G.generators:
                    moved = tuple(g.apply_tuple(b) for b in blocks)
                    if any(b not in q.class_of for b in moved) or not pulled_membership(moved):
                        flat = tuple(x for b in blocks for x in b)
                        witness = (
                            f"tuple {flat} maps outside the relation under "
                            f"automorphism {list(g.images)}"
                        )
                        break
                if witness:
                    break
        report.checks.append(
            CheckResult(f"invariance[{name}]", witness is None, witness)
        )
    return report


# -- mutations (for negative testing) -------------------------------------------


def negate_translation(scheme: InterpretationScheme, index: int) -> InterpretationScheme:
    """Flip one translation formula; a validated scheme must stop validating."""
    from .formulas import Not

    rels = list(scheme.rels)
    sr = rels[index]
    rels[index] = SchemeRel(rel=sr.rel, sort_keys=sr.sort_keys, formula=Not(sr.formula))
    return InterpretationScheme(sorts=scheme.sorts, rels=tuple(rels))


def weaken_equivalence(scheme: InterpretationScheme, sort_index: int) -> InterpretationScheme:
    """Replace a sort's equivalence by tuple identity, splitting every class
    into singletons; the sort bijection stops being onto whenever some class
    had more than one member."""
    from .formulas import Equal, Var, conjunction

    sorts = list(scheme.sorts)
    s = sorts[sort_index]
    m = s.width
    identity = conjunction(
        [Equal(Var(q), Var(q)) for q in range(2 * m)]
        + [Equal(Var(q), Var(m + q)) for q in range(m)]
    )
    sorts[sort_index] = SchemeSort(
        key=s.key, width=s.width, domain_formula=s.domain_formula, equiv_formula=identity
    )
    return InterpretationScheme(sorts=tuple(sorts), rels=scheme.rels)


def redirect_bijection(bijections: SortBijections, key: AtomicType) -> SortBijections:
    """Send the sort's least element to the class of its second element,
    making the map neither injective nor onto (needs two elements)."""
    fmap = dict(bijections.maps[key])
    elems = sorted(fmap)
    if len(elems) < 2:
        raise SchemeError("sort has fewer than two elements; cannot redirect")
    fmap[elems[0]] = fmap[elems[1]]
    maps = dict(bijections.maps)
    maps[key] = fmap
    return SortBijections(maps=maps)


# -- serialization --------------------------------------------------------------


def scheme_to_json_dict(
    scheme: InterpretationScheme, bijections: SortBijections
) -> dict:
    return {
        "sorts": [
            {
                "key": list(s.key.key),
                "width": s.width,
                "domain": format_formula(s.domain_formula),
                "equivalence": format_formula(s.equiv_formula),
            }
            for s in scheme.sorts
        ],
        "relations": [
            {
                "relation": sr.rel,
                "sorts": [list(k.key) for k in sr.sort_keys],
                "formula": format_formula(sr.formula),
            }
            for sr in scheme.rels
        ],
        "bijections": [
            {
                "key": list(key.key),
                "map": [[b, list(rep)] for b, rep in sorted(fmap.items())],
            }
            for key, fmap in sorted(bijections.maps.items(), key=lambda kv: kv[0].key)
        ],
    }
