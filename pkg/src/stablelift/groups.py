"""Permutations, automorphism groups, orbits, and pointwise stabilizers.

PermGroup keeps a generating set and lazily computes a base and strong
generating set (deterministic Schreier-Sims, base points in ascending order)
for order and membership queries.  The automorphism search is a backtracking
search over a color-refinement tree seeded by constants, atomic-type sorts,
and relation degree vectors; a brute-force oracle double-checks it on small
degrees.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from .formulas import sort_partition
from .structures import Structure

__all__ = [
    "Permutation",
    "PermGroup",
    "GroupError",
    "group_order",
    "orbits",
    "pointwise_stabilizer",
    "is_automorphism",
    "automorphism_group",
    "automorphism_group_brute",
]

BRUTE_DEGREE_LIMIT = 8


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    """A permutation of 0..n-1 as an image tuple; composition is function
    composition: (p * q)(x) = p(q(x))."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(len(self.images))):
            raise GroupError(f"not a permutation: {self.images}")

    @staticmethod
    def identity(degree: int) -> "Permutation":
        return Permutation(tuple(range(degree)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise GroupError("degree mismatch")
        return Permutation(tuple(self.images[y] for y in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def apply_tuple(self, t: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.images[x] for x in t)


@dataclass
class _ChainLevel:
    point: int
    gens: list[Permutation]
    transversal: dict[int, Permutation]


def _orbit_transversal(point: int, gens: list[Permutation], degree: int) -> dict[int, Permutation]:
    trans = {point: Permutation.identity(degree)}
    queue = [point]
    while queue:
        x = queue.pop(0)
        for s in gens:
            y = s(x)
            if y not in trans:
                trans[y] = s * trans[x]
                queue.append(y)
    return trans


def _sift(levels: list[_ChainLevel], g: Permutation, start: int = 0) -> tuple[Permutation, int]:
    """Strip g through the chain; returns (residue, level index at which it
    got stuck).  Residue is the identity iff g is in the group."""
    for i in range(start, len(levels)):
        lvl = levels[i]
        img = g(lvl.point)
        rep = lvl.transversal.get(img)
        if rep is None:
            return g, i
        g = rep.inverse() * g
    return g, len(levels)


class PermGroup:
    """A permutation group given by generators, with a lazily built
    stabilizer chain.  The lazy build is lock-protected so concurrent first
    access observes a single computation; everything else is immutable."""

    def __init__(self, generators: list[Permutation] | tuple[Permutation, ...], degree: int):
        for g in generators:
            if g.degree != degree:
                raise GroupError("all generators must share the group's degree")
        self.degree = degree
        self.generators = tuple(sorted(
            {g for g in generators if not g.is_identity()}, key=lambda g: g.images
        ))
        self._chain: list[_ChainLevel] | None = None
        self._lock = threading.Lock()

    @staticmethod
    def trivial(degree: int) -> "PermGroup":
        return PermGroup((), degree)

    def _build_chain(self, base_prefix: tuple[int, ...] = ()) -> list[_ChainLevel]:
        """Deterministic Schreier-Sims: rebuild levels from the strong set and
        re-close until every Schreier generator sifts to the identity.  The
        base is the forced prefix followed by ascending element ids (each new
        point is the least one moved by a generator fixing the base so far,
        which keeps serialized chains reproducible)."""
        strong = list(self.generators)
        while True:
            base = list(dict.fromkeys(base_prefix))
            while True:
                unfixed = [g for g in strong if all(g(b) == b for b in base)]
                if not unfixed:
                    break
                base.append(
                    min(x for g in unfixed for x in range(self.degree) if g(x) != x)
                )
            levels = []
            for i, b in enumerate(base):
                gens_i = [g for g in strong if all(g(base[j]) == base[j] for j in range(i))]
                levels.append(_ChainLevel(b, gens_i, _orbit_transversal(b, gens_i, self.degree)))
            residue = self._first_schreier_residue(levels)
            if residue is None:
                return levels
            strong.append(residue)

    def _first_schreier_residue(self, levels: list[_ChainLevel]) -> Permutation | None:
        for i, lvl in enumerate(levels):
            for x in sorted(lvl.transversal):
                ux = lvl.transversal[x]
                for s in lvl.gens:
                    sg = lvl.transversal[s(x)].inverse() * (s * ux)
                    residue, _ = _sift(levels, sg, i + 1)
                    if not residue.is_identity():
                        return residue
        return None

    def _ensure_chain(self) -> list[_ChainLevel]:
        if self._chain is None:
            with self._lock:
                if self._chain is None:
                    self._chain = self._build_chain()
        return self._chain

    def order(self) -> int:
        result = 1
        for lvl in self._ensure_chain():
            result *= len(lvl.transversal)
        return result

    def __contains__(self, g: Permutation) -> bool:
        if g.degree != self.degree:
            return False
        residue, _ = _sift(self._ensure_chain(), g)
        return residue.is_identity()

    def elements(self) -> list[Permutation]:
        """All group members in lexicographic image order.  Meant for the
        small groups this library works with; cost is the group order."""
        levels = self._ensure_chain()
        members = [Permutation.identity(self.degree)]
        for lvl in reversed(levels):
            members = [
                rep * m
                for m in members
                for rep in lvl.transversal.values()
            ]
        return sorted(set(members), key=lambda p: p.images)

    def base(self) -> tuple[int, ...]:
        return tuple(lvl.point for lvl in self._ensure_chain())

    def fundamental_orbit_sizes(self) -> tuple[int, ...]:
        return tuple(len(lvl.transversal) for lvl in self._ensure_chain())

    def to_json_dict(self) -> dict:
        return {
            "degree": self.degree,
            "generators": [list(g.images) for g in self.generators],
            "order": str(self.order()),
        }


def group_order(G: PermGroup) -> int:
    return G.order()


def orbits(G: PermGroup, S) -> list[tuple[int, ...]]:
    """Partition of S into G-orbits (blocks sorted, ordered by least member)."""
    members = set(S)
    S = sorted(members)
    for x in S:
        if not (0 <= x < G.degree):
            raise GroupError(f"element {x} outside degree {G.degree}")
    seen: set[int] = set()
    blocks = []
    for x in S:
        if x in seen:
            continue
        orbit = {x}
        queue = [x]
        while queue:
            y = queue.pop()
            for g in G.generators:
                z = g(y)
                if z not in orbit:
                    orbit.add(z)
                    queue.append(z)
        blocks.append(tuple(sorted(orbit & members)))
        seen |= orbit
    return blocks


def orbits_on_tuples(G: PermGroup, tuples) -> list[tuple[tuple[int, ...], ...]]:
    """Orbits of the coordinatewise action on a G-invariant set of tuples."""
    members = set(tuples)
    todo = set(members)
    blocks = []
    for t in sorted(members):
        if t not in todo:
            continue
        orbit = {t}
        queue = [t]
        while queue:
            u = queue.pop()
            for g in G.generators:
                v = g.apply_tuple(u)
                if v not in orbit:
                    orbit.add(v)
                    queue.append(v)
        if not orbit <= members:
            raise GroupError(f"tuple set not invariant: orbit of {t} escapes")
        todo -= orbit
        blocks.append(tuple(sorted(orbit)))
    return blocks


def pointwise_stabilizer(G: PermGroup, A) -> PermGroup:
    """The subgroup fixing every point of A, via a stabilizer chain whose
    base starts with A's points in ascending order."""
    A = tuple(sorted(set(A)))
    for x in A:
        if not (0 <= x < G.degree):
            raise GroupError(f"element {x} outside degree {G.degree}")
    if not A:
        return G
    chain = G._build_chain(base_prefix=A)
    fixing = [
        g
        for lvl in chain
        for g in lvl.gens
        if all(g(a) == a for a in A)
    ]
    return PermGroup(fixing, G.degree)


# -- automorphisms -----------------------------------------------------------


def is_automorphism(M: Structure, pi: Permutation) -> bool:
    """True iff pi maps every relation onto itself, commutes with every
    function, and fixes every constant."""
    if pi.degree != M.size:
        raise GroupError(f"permutation degree {pi.degree} != domain size {M.size}")
    for c in M.sig.constants:
        if pi(M.constants[c]) != M.constants[c]:
            return False
    for f in M.sig.functions:
        images = M.functions[f]
        for x in M.domain:
            if pi(images[x]) != images[pi(x)]:
                return False
    for name, _ in M.sig.relations:
        # pi is a bijection on a finite tuple set, so image-containment
        # already forces image equality (both directions of preservation)
        tuples = M.relation_sets[name]
        if any(pi.apply_tuple(t) not in tuples for t in tuples):
            return False
    return True


def automorphism_group_brute(M: Structure) -> list[Permutation]:
    """Oracle: every permutation of the domain passing is_automorphism, in
    lexicographic order.  Guarded to small degrees."""
    if M.size > BRUTE_DEGREE_LIMIT:
        raise GroupError(
            f"domain of size {M.size} too large for the brute oracle (limit {BRUTE_DEGREE_LIMIT})"
        )
    found = []
    for images in itertools.permutations(range(M.size)):
        pi = Permutation(images)
        if is_automorphism(M, pi):
            found.append(pi)
    return found


def _initial_colors(M: Structure) -> list:
    sorts = sort_partition(M)
    sort_of = {}
    for idx, block in enumerate(sorts.values()):
        for x in block:
            sort_of[x] = idx
    const_elems = {v: n for n, v in sorted(M.constants.items())}
    degree_vec = []
    for x in M.domain:
        vec = []
        for name, arity in M.sig.relations:
            for pos in range(arity):
                vec.append(sum(1 for t in M.relations[name] if t[pos] == x))
        degree_vec.append(tuple(vec))
    return [
        (const_elems.get(x, ""), sort_of[x], degree_vec[x])
        for x in M.domain
    ]


def _refine_colors(M: Structure, colors: list[int]) -> list[int]:
    """Iterated refinement: function-image colors first, then the multiset of
    relation environments, until stable."""
    n = M.size
    while True:
        func_sig = [
            tuple(colors[M.functions[f][x]] for f in M.sig.functions) for x in range(n)
        ]
        rel_sig: list[list] = [[] for _ in range(n)]
        for name, arity in M.sig.relations:
            for t in M.relations[name]:
                for pos in range(arity):
                    others = tuple(colors[t[j]] for j in range(arity) if j != pos)
                    rel_sig[t[pos]].append((name, pos, others))
        keys = [
            (colors[x], func_sig[x], tuple(sorted(rel_sig[x]))) for x in range(n)
        ]
        palette = {k: i for i, k in enumerate(sorted(set(keys)))}
        new_colors = [palette[k] for k in keys]
        if len(set(new_colors)) == len(set(colors)):
            return new_colors
        colors = new_colors


def _stable_coloring(M: Structure) -> list[int]:
    raw = _initial_colors(M)
    palette = {k: i for i, k in enumerate(sorted(set(raw)))}
    return _refine_colors(M, [palette[k] for k in raw])


def _enumerate_automorphisms(M: Structure) -> list[Permutation]:
    """All automorphisms, found by mapping elements 0,1,2,... in order with
    color and constraint pruning.  Output is in lexicographic image order."""
    n = M.size
    colors = _stable_coloring(M)
    by_color: dict[int, list[int]] = {}
    for x in range(n):
        by_color.setdefault(colors[x], []).append(x)

    # tuples of each relation indexed by participating element
    rel_index: dict[str, dict[int, list[tuple[int, ...]]]] = {}
    rel_sets = M.relation_sets
    for name, _ in M.sig.relations:
        idx: dict[int, list[tuple[int, ...]]] = {}
        for t in M.relations[name]:
            for x in set(t):
                idx.setdefault(x, []).append(t)
        rel_index[name] = idx

    found: list[Permutation] = []
    mapping = [-1] * n
    used = [False] * n

    def consistent(v: int, w: int) -> bool:
        for f in M.sig.functions:
            images = M.functions[f]
            fv = images[v]
            if mapping[fv] != -1 and mapping[fv] != images[w]:
                return False
            for u in range(n):
                if mapping[u] != -1 and images[u] == v and images[mapping[u]] != w:
                    return False
        inv = {mapping[u]: u for u in range(n) if mapping[u] != -1}
        for name, _ in M.sig.relations:
            for t in rel_index[name].get(v, ()):
                if all(mapping[x] != -1 for x in t):
                    if tuple(mapping[x] for x in t) not in rel_sets[name]:
                        return False
            # same check from the image side: fully-imaged tuples must pull
            # back into the relation
            for t in rel_index[name].get(w, ()):
                if all(x in inv for x in t):
                    if tuple(inv[x] for x in t) not in rel_sets[name]:
                        return False
        return True

    def search(v: int) -> None:
        if v == n:
            pi = Permutation(tuple(mapping))
            if is_automorphism(M, pi):
                found.append(pi)
            return
        for w in by_color[colors[v]]:
            if used[w]:
                continue
            mapping[v] = w
            used[w] = True
            if consistent(v, w):
                search(v + 1)
            mapping[v] = -1
            used[w] = False

    search(0)
    return found


def automorphism_group(M: Structure) -> PermGroup:
    """The full automorphism group as a PermGroup.

    The deterministic generating set is obtained by sifting the automorphisms
    in lexicographic order and keeping each one not already generated.
    """
    members = _enumerate_automorphisms(M)
    gens: list[Permutation] = []
    group = PermGroup.trivial(M.size)
    for pi in members:
        if pi not in group:
            gens.append(pi)
            group = PermGroup(gens, M.size)
    return group
