"""The stabilized lift of a finite relational structure.

Given a relational structure M, the lift N adds a distinguished anchor
element, keeps a marked copy of M's domain ("base" elements), and grows, for
every relation symbol and every eligible argument tuple, a fiber of copy
elements indexed 0..k-1 plus one extra "limit" copy exactly when the tuple is
in the relation.  Projection functions recover the tuple coordinates from a
fiber element and copy-selector functions move within a fiber; everything
else is sent to the anchor.

The limit copies are what make the construction rigid: a fiber element fixed
by no copy selector exists precisely over relation tuples, so any
automorphism of N restricts to an automorphism of M on the base copy, and
conversely every automorphism of M extends uniquely.  At copy bound k >= 1
the two groups are isomorphic, witnessed by explicit mutually inverse maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .formulas import (
    AtomicType,
    Equal,
    Formula,
    Not,
    Rel,
    Var,
    conjunction,
    contradiction,
    sort_partition,
    tautology,
)
from .groups import Permutation, is_automorphism
from .interpretation import (
    InterpretationScheme,
    SchemeRel,
    SchemeSort,
    SortBijections,
)
from .structures import Signature, Structure, StructureError

__all__ = [
    "LIMIT",
    "LiftError",
    "LiftMapError",
    "LiftConfig",
    "PaddingAssignment",
    "Anchor",
    "BaseElem",
    "FiberElem",
    "LiftedStructure",
    "ANCHOR_NAME",
    "BASE_NAME",
    "fiber_predicate",
    "samefiber_relation",
    "projection_function",
    "copy_function",
    "padding_triples",
    "canonical_padding",
    "build_lift",
    "limit_elements",
    "direct_induced",
    "project_automorphism",
    "generate_scheme",
    "continuity_witness",
]

# Copy index of the distinguished limit copy; sorts after every finite index.
LIMIT = float("inf")

ANCHOR_NAME = "anchor"
BASE_NAME = "base"


def fiber_predicate(rel: str) -> str:
    return f"fiber_{rel}"


def samefiber_relation(rel: str) -> str:
    return f"samefiber_{rel}"


def projection_function(rel: str, coord: int) -> str:
    return f"proj_{rel}_{coord}"


def copy_function(rel: str, j: int) -> str:
    return f"copy_{rel}_{j}"


class LiftError(ValueError):
    pass


class LiftMapError(LiftError):
    """A permutation of the base structure cannot be carried to the lift:
    some limit element would need a target fiber with no limit copy."""

    def __init__(self, rel: str, coords: tuple[int, ...], image: tuple[int, ...]):
        super().__init__(
            f"no induced automorphism: relation {rel!r} holds on {coords} but not on "
            f"the image {image}, so the limit element over {coords} has no target"
        )
        self.rel = rel
        self.coords = coords
        self.image = image


def _copy_label(i) -> int | str:
    return "limit" if i == LIMIT else int(i)


@dataclass(frozen=True)
class PaddingAssignment:
    """Widths for the per-copy quotient presentations: each (relation, copy
    index) gets a padded width m = arity + pad.  All widths are pairwise
    distinct and greater than 1."""

    pads: dict[tuple[str, int | float], int] = field(default_factory=dict)

    def pad(self, rel: str, i) -> int:
        return self.pads[(rel, i)]

    def width(self, sig: Signature, rel: str, i) -> int:
        return sig.relation_arity(rel) + self.pads[(rel, i)]

    def validate(self, sig: Signature, k: int) -> None:
        triples = padding_triples(sig, k)
        if set(self.pads) != set(triples):
            raise LiftError("padding must cover exactly the (relation, copy) pairs")
        widths = []
        for rel, i in triples:
            p = self.pads[(rel, i)]
            if p < 0:
                raise LiftError(f"negative padding for ({rel!r}, {_copy_label(i)})")
            m = sig.relation_arity(rel) + p
            if m <= 1:
                raise LiftError(f"width {m} for ({rel!r}, {_copy_label(i)}) must exceed 1")
            widths.append(m)
        if len(set(widths)) != len(widths):
            raise LiftError("padded widths must be pairwise distinct")


def padding_triples(sig: Signature, k: int) -> list[tuple[str, int | float]]:
    """(relation, copy index) pairs in canonical order: relations by (arity,
    position among same-arity symbols), copies ascending with the limit last."""
    rels = sorted(
        (n for n, _ in sig.relations), key=lambda n: sig.arity_index(n)
    )
    return [(rel, i) for rel in rels for i in [*range(k), LIMIT]]


def canonical_padding(sig: Signature, k: int) -> PaddingAssignment:
    """Greedy padding: walk the canonical triple order and give each entry
    the least width exceeding every earlier width (and large enough to fit
    the relation's arity and the >1 floor)."""
    pads: dict[tuple[str, int | float], int] = {}
    prev = 1
    for rel, i in padding_triples(sig, k):
        n = sig.relation_arity(rel)
        m = max(prev, n - 1, 1) + 1
        pads[(rel, i)] = m - n
        prev = m
    padding = PaddingAssignment(pads)
    padding.validate(sig, k)
    return padding


@dataclass(frozen=True)
class LiftConfig:
    """k bounds the finite copy indices (the limit copy is extra); fibers
    range over repetition-free tuples unless include_repetition_tuples is set
    or the source structure itself allows repeated entries."""

    k: int = 1
    include_repetition_tuples: bool = False
    padding: PaddingAssignment | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise LiftError("copy bound k must be at least 1")


@dataclass(frozen=True)
class Anchor:
    pass


@dataclass(frozen=True)
class BaseElem:
    source: int


@dataclass(frozen=True)
class FiberElem:
    rel: str
    copy: int | float
    coords: tuple[int, ...]


Provenance = Anchor | BaseElem | FiberElem


@dataclass(frozen=True)
class LiftedStructure:
    """The lift as a plain Structure plus per-element provenance.

    Element layout is canonical: the anchor is 0, base elements follow in
    source order, then fibers ordered by relation, tuple, copy index (limit
    last).
    """

    structure: Structure
    source: Structure
    config: LiftConfig
    padding: PaddingAssignment
    provenance: tuple[Provenance, ...]

    @property
    def anchor_id(self) -> int:
        return 0

    def base_id(self, a: int) -> int:
        return 1 + a

    @property
    def base_ids(self) -> range:
        return range(1, 1 + self.source.size)

    @property
    def repetition_free_fibers(self) -> bool:
        return self.source.repetition_free and not self.config.include_repetition_tuples

    def eligible_tuples(self, rel: str) -> tuple[tuple[int, ...], ...]:
        n = self.source.sig.relation_arity(rel)
        tuples = itertools.product(self.source.domain, repeat=n)
        if self.repetition_free_fibers:
            tuples = (t for t in tuples if len(set(t)) == len(t))
        return tuple(tuples)

    def fiber_copies(self, rel: str, coords: tuple[int, ...]) -> dict[int | float, int]:
        """Copy index -> element id for one fiber (empty dict if none)."""
        out: dict[int | float, int] = {}
        for e, p in enumerate(self.provenance):
            if isinstance(p, FiberElem) and p.rel == rel and p.coords == coords:
                out[p.copy] = e
        return out

    def element_of(self, prov: Provenance) -> int:
        try:
            return self._element_index()[prov]
        except KeyError:
            raise LiftError(f"no element with provenance {prov}") from None

    def _element_index(self) -> dict[Provenance, int]:
        idx = getattr(self, "_element_index_cache", None)
        if idx is None:
            idx = {p: e for e, p in enumerate(self.provenance)}
            object.__setattr__(self, "_element_index_cache", idx)
        return idx

    def to_report_dict(self) -> dict:
        """Element table with provenance tags, fiber-size histogram, and the
        lift signature."""
        from .structures import signature_to_dict

        elements = []
        for e, p in enumerate(self.provenance):
            if isinstance(p, Anchor):
                elements.append({"id": e, "kind": "anchor"})
            elif isinstance(p, BaseElem):
                elements.append({"id": e, "kind": "base", "source": p.source})
            else:
                elements.append(
                    {
                        "id": e,
                        "kind": "fiber",
                        "relation": p.rel,
                        "copy": _copy_label(p.copy),
                        "coords": list(p.coords),
                    }
                )
        histogram: dict[str, dict[str, int]] = {}
        for rel, _ in self.source.sig.relations:
            sizes: dict[str, int] = {}
            for coords in self.eligible_tuples(rel):
                size = len(self.fiber_copies(rel, coords))
                sizes[str(size)] = sizes.get(str(size), 0) + 1
            histogram[rel] = dict(sorted(sizes.items()))
        return {
            "domain": self.structure.size,
            "elements": elements,
            "fiber_sizes": histogram,
            "signature": signature_to_dict(self.structure.sig),
        }


def _lift_signature(M: Structure, k: int) -> Signature:
    relations = [(BASE_NAME, 1)]
    functions: list[str] = []
    for rel, arity in M.sig.relations:
        relations.append((fiber_predicate(rel), 1))
        relations.append((samefiber_relation(rel), 2))
        functions.extend(projection_function(rel, t) for t in range(arity))
        functions.extend(copy_function(rel, j) for j in range(k))
    try:
        return Signature(
            relations=tuple(relations),
            functions=tuple(functions),
            constants=(ANCHOR_NAME,),
        )
    except StructureError as e:
        raise LiftError(f"source relation names clash with lift symbols: {e}") from e


def build_lift(M: Structure, config: LiftConfig = LiftConfig()) -> LiftedStructure:
    """Construct the lift of a purely relational structure."""
    if not M.is_relational():
        raise LiftError("the lift is defined for purely relational structures")
    padding = config.padding or canonical_padding(M.sig, config.k)
    padding.validate(M.sig, config.k)
    sig = _lift_signature(M, config.k)

    repetition_free_fibers = M.repetition_free and not config.include_repetition_tuples
    provenance: list[Provenance] = [Anchor()]
    provenance.extend(BaseElem(a) for a in M.domain)

    rels_in_order = sorted((n for n, _ in M.sig.relations), key=M.sig.arity_index)
    fibers: dict[str, dict[tuple[int, ...], dict[int | float, int]]] = {}
    for rel in rels_in_order:
        arity = M.sig.relation_arity(rel)
        fibers[rel] = {}
        tuples = itertools.product(M.domain, repeat=arity)
        if repetition_free_fibers:
            tuples = (t for t in tuples if len(set(t)) == len(t))
        held = M.relation_sets[rel]
        for coords in sorted(tuples):
            copies: dict[int | float, int] = {}
            indices: list[int | float] = list(range(config.k))
            if coords in held:
                indices.append(LIMIT)
            for i in indices:
                copies[i] = len(provenance)
                provenance.append(FiberElem(rel, i, coords))
            fibers[rel][coords] = copies

    size = len(provenance)
    relations: dict[str, tuple[tuple[int, ...], ...]] = {
        BASE_NAME: tuple((1 + a,) for a in M.domain)
    }
    functions: dict[str, tuple[int, ...]] = {}
    for rel in rels_in_order:
        arity = M.sig.relation_arity(rel)
        members = [e for fib in fibers[rel].values() for e in fib.values()]
        relations[fiber_predicate(rel)] = tuple((e,) for e in sorted(members))
        pairs = [
            (e1, e2)
            for fib in fibers[rel].values()
            for e1 in fib.values()
            for e2 in fib.values()
        ]
        relations[samefiber_relation(rel)] = tuple(sorted(pairs))
        for t in range(arity):
            images = [0] * size
            for coords, fib in fibers[rel].items():
                for e in fib.values():
                    images[e] = 1 + coords[t]
            functions[projection_function(rel, t)] = tuple(images)
        for j in range(config.k):
            images = [0] * size
            for coords, fib in fibers[rel].items():
                for e in fib.values():
                    images[e] = fib[j]
            functions[copy_function(rel, j)] = tuple(images)

    structure = Structure(
        sig=sig,
        size=size,
        relations=relations,
        functions=functions,
        constants={ANCHOR_NAME: 0},
        repetition_free=False,
    )
    return LiftedStructure(
        structure=structure,
        source=M,
        config=config,
        padding=padding,
        provenance=tuple(provenance),
    )


def limit_elements(N: LiftedStructure, rel: str) -> tuple[int, ...]:
    """Fiber elements of the relation fixed by no copy selector, computed
    from the structure itself (and cross-checked against provenance)."""
    S = N.structure
    members = {e for (e,) in S.relations[fiber_predicate(rel)]}
    out = []
    for e in sorted(members):
        if all(S.functions[copy_function(rel, j)][e] != e for j in range(N.config.k)):
            out.append(e)
    tagged = [
        e
        for e, p in enumerate(N.provenance)
        if isinstance(p, FiberElem) and p.rel == rel and p.copy == LIMIT
    ]
    if out != tagged:
        raise LiftError("limit elements disagree with provenance (internal error)")
    return tuple(out)


def direct_induced(N: LiftedStructure, pi: Permutation) -> Permutation:
    """Carry a permutation of the source domain to the lift: anchor fixed,
    base elements moved alongside, each fiber element sent to the same copy
    index over the image tuple.

    For a non-automorphism there is always some relation tuple whose image
    drops out of the relation, so the limit element over it has no target;
    that is reported as a LiftMapError naming the fiber.
    """
    M = N.source
    if pi.degree != M.size:
        raise LiftError(f"permutation degree {pi.degree} does not match |M| = {M.size}")
    images = [0] * N.structure.size
    fiber_index: dict[str, dict[tuple[int, ...], dict[int | float, int]]] = {}
    for e, p in enumerate(N.provenance):
        if isinstance(p, FiberElem):
            fiber_index.setdefault(p.rel, {}).setdefault(p.coords, {})[p.copy] = e
    for e, p in enumerate(N.provenance):
        if isinstance(p, Anchor):
            images[e] = e
        elif isinstance(p, BaseElem):
            images[e] = 1 + pi(p.source)
        else:
            moved = pi.apply_tuple(p.coords)
            target = fiber_index[p.rel].get(moved, {}).get(p.copy)
            if target is None:
                raise LiftMapError(p.rel, p.coords, moved)
            images[e] = target
    return Permutation(tuple(images))


def project_automorphism(N: LiftedStructure, pihat: Permutation) -> Permutation:
    """Restrict a lift automorphism to the base copy, re-indexed to the
    source domain.  Together with direct_induced this is a bijection between
    the two automorphism groups."""
    if not is_automorphism(N.structure, pihat):
        raise LiftError("not an automorphism of the lift")
    M = N.source
    images = []
    for a in M.domain:
        target = pihat(1 + a)
        if not (1 <= target <= M.size):
            raise LiftError("automorphism does not preserve the base copy (internal error)")
        images.append(target - 1)
    pi = Permutation(tuple(images))
    if not is_automorphism(M, pi):
        raise LiftError("projection is not an automorphism of the source (internal error)")
    return pi


def continuity_witness(N: LiftedStructure, B) -> frozenset[int]:
    """A finite support in the source domain: fixing it pointwise forces the
    induced automorphism to fix B pointwise.  Base elements contribute their
    source point, fiber elements all their coordinates, the anchor nothing."""
    A: set[int] = set()
    for b in set(B):
        if not (0 <= b < N.structure.size):
            raise LiftError(f"element {b} outside the lift domain")
        p = N.provenance[b]
        if isinstance(p, BaseElem):
            A.add(p.source)
        elif isinstance(p, FiberElem):
            A.update(p.coords)
    return frozenset(A)


# -- scheme generation ---------------------------------------------------------


def _sort_kinds(
    N: LiftedStructure, companion: Structure
) -> dict[AtomicType, tuple]:
    """Classify each realized sort of the companion by provenance:
    ("anchor",), ("base",), or ("fiber", rel, copy)."""
    kinds: dict[AtomicType, tuple] = {}
    for key, block in sort_partition(companion).items():
        tags = set()
        for e in block:
            p = N.provenance[e]
            if isinstance(p, Anchor):
                tags.add(("anchor",))
            elif isinstance(p, BaseElem):
                tags.add(("base",))
            else:
                tags.add(("fiber", p.rel, p.copy))
        if len(tags) != 1:
            raise LiftError("companion sorts mix provenance kinds (internal error)")
        kinds[key] = tags.pop()
    return kinds


def _distinctness(n: int) -> list[Formula]:
    return [
        Not(Equal(Var(s), Var(t))) for s in range(n) for t in range(s + 1, n)
    ]


def _fiber_sort_formulas(
    N: LiftedStructure, rel: str, i
) -> tuple[int, Formula, Formula]:
    """Width, definable-set formula, and equivalence formula for one copy
    sort: padded tuples whose first coordinates carry the fiber tuple, two
    tuples equivalent when those coordinates agree."""
    sig = N.source.sig
    n = sig.relation_arity(rel)
    m = N.padding.width(sig, rel, i)
    parts: list[Formula] = [Equal(Var(q), Var(q)) for q in range(m)]
    if N.repetition_free_fibers:
        parts += _distinctness(n)
    if i == LIMIT:
        parts.append(Rel(rel, tuple(Var(t) for t in range(n))))
    r = conjunction(parts)
    eq_parts: list[Formula] = [Equal(Var(q), Var(q)) for q in range(2 * m)]
    eq_parts += [Equal(Var(t), Var(m + t)) for t in range(n)]
    E = conjunction(eq_parts)
    return m, r, E


def _padded(total: int, core: list[Formula]) -> Formula:
    return conjunction([Equal(Var(q), Var(q)) for q in range(total)] + core)


def _translation_formula(
    N: LiftedStructure,
    sym: str,
    arity: int,
    kinds: tuple[tuple, ...],
    widths: tuple[int, ...],
) -> Formula:
    """Truth of one companion relation at one tuple of sorts, expressed over
    the source structure.  Most combinations are decided by the sorts alone;
    the fiber-indexed symbols compare tuple coordinates across blocks."""
    total = sum(widths)
    M = N.source

    def fiber_of(kind: tuple, rel: str) -> bool:
        return kind[0] == "fiber" and kind[1] == rel

    if sym == BASE_NAME:
        return tautology(total) if kinds[0] == ("base",) else contradiction(total)
    if sym == ANCHOR_NAME:
        return tautology(total) if kinds[0] == ("anchor",) else contradiction(total)

    for rel, _ in M.sig.relations:
        n = M.sig.relation_arity(rel)
        if sym == fiber_predicate(rel):
            return tautology(total) if fiber_of(kinds[0], rel) else contradiction(total)
        if sym == samefiber_relation(rel):
            if fiber_of(kinds[0], rel) and fiber_of(kinds[1], rel):
                core = [Equal(Var(t), Var(widths[0] + t)) for t in range(n)]
                return _padded(total, core)
            return contradiction(total)
        for t in range(n):
            if sym == projection_function(rel, t):
                if fiber_of(kinds[0], rel):
                    if kinds[1] == ("base",):
                        return _padded(total, [Equal(Var(t), Var(widths[0]))])
                    return contradiction(total)
                if kinds[1] == ("anchor",):
                    return tautology(total)
                return contradiction(total)
        for j in range(N.config.k):
            if sym == copy_function(rel, j):
                if fiber_of(kinds[0], rel):
                    if fiber_of(kinds[1], rel) and kinds[1][2] == j:
                        core = [Equal(Var(t), Var(widths[0] + t)) for t in range(n)]
                        return _padded(total, core)
                    return contradiction(total)
                if kinds[1] == ("anchor",):
                    return tautology(total)
                return contradiction(total)
    raise LiftError(f"unexpected companion symbol {sym!r}")


def generate_scheme(
    M: Structure, N: LiftedStructure
) -> tuple[InterpretationScheme, SortBijections]:
    """Produce the interpretation scheme presenting the lift's relational
    companion inside M, together with the sort bijections.

    Sorts: the anchor gets a width-2 presentation with the total equivalence
    (one class); the base sort is M itself under equality; each copy sort of
    width m(rel, i) consists of padded tuples keyed by their leading
    coordinates, with the limit sorts further cut down to relation members.
    Translation formulas for every companion relation are emitted
    mechanically from the fiber semantics.
    """
    if N.source is not M and not (M.sig == N.source.sig and M == N.source):
        raise LiftError("the lift was not generated from this structure")
    from .structures import relational_companion

    companion = relational_companion(N.structure)
    kinds = _sort_kinds(N, companion)
    realized = sort_partition(companion)

    sorts: list[SchemeSort] = []
    widths: dict[AtomicType, int] = {}
    bij: dict[AtomicType, dict[int, tuple[int, ...]]] = {}
    for key, block in realized.items():
        kind = kinds[key]
        if kind == ("anchor",):
            width, r, E = 2, tautology(2), tautology(4)
            bij[key] = {block[0]: (0,) * 2}
        elif kind == ("base",):
            width, r, E = 1, tautology(1), Equal(Var(0), Var(1))
            bij[key] = {e: (N.provenance[e].source,) for e in block}
        else:
            _, rel, i = kind
            width, r, E = _fiber_sort_formulas(N, rel, i)
            bij[key] = {
                e: N.provenance[e].coords + (0,) * (width - len(N.provenance[e].coords))
                for e in block
            }
        sorts.append(SchemeSort(key=key, width=width, domain_formula=r, equiv_formula=E))
        widths[key] = width

    rels: list[SchemeRel] = []
    keys_in_order = [s.key for s in sorts]
    for name, arity in companion.sig.relations:
        for combo in itertools.product(keys_in_order, repeat=arity):
            formula = _translation_formula(
                N,
                name,
                arity,
                tuple(kinds[k] for k in combo),
                tuple(widths[k] for k in combo),
            )
            rels.append(SchemeRel(rel=name, sort_keys=combo, formula=formula))

    scheme = InterpretationScheme(sorts=tuple(sorts), rels=tuple(rels))
    return scheme, SortBijections(maps=bij)
