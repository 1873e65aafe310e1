import itertools

import pytest

from stablelift.corpus import digraph, edge_pairs
from stablelift.groups import (
    Permutation,
    automorphism_group,
    automorphism_group_brute,
    is_automorphism,
)
from stablelift.interpretation import definable_quotient, validate_scheme
from stablelift.lifting import (
    LIMIT,
    Anchor,
    BaseElem,
    FiberElem,
    LiftConfig,
    LiftError,
    PaddingAssignment,
    build_lift,
    canonical_padding,
    continuity_witness,
    direct_induced,
    generate_scheme,
    limit_elements,
    project_automorphism,
)
from stablelift.lifting import LiftMapError
from stablelift.structures import Signature, Structure, relational_companion


# -- padding ---------------------------------------------------------------------


def test_canonical_padding_one_binary_relation_k2():
    sig = Signature(relations=(("R", 2),))
    p = canonical_padding(sig, 2)
    assert p.width(sig, "R", 0) == 2
    assert p.width(sig, "R", 1) == 3
    assert p.width(sig, "R", LIMIT) == 4
    assert [p.pad("R", i) for i in (0, 1, LIMIT)] == [0, 1, 2]


def test_canonical_padding_unary_skips_width_one():
    sig = Signature(relations=(("U", 1),))
    p = canonical_padding(sig, 1)
    assert p.width(sig, "U", 0) == 2
    assert p.width(sig, "U", LIMIT) == 3


def test_canonical_padding_mixed_arities_distinct():
    sig = Signature(relations=(("R", 2), ("S", 3)))
    p = canonical_padding(sig, 1)
    widths = [
        p.width(sig, rel, i) for rel in ("R", "S") for i in (0, LIMIT)
    ]
    assert len(set(widths)) == 4
    assert all(w > 1 for w in widths)


def test_padding_validation_errors():
    sig = Signature(relations=(("R", 2),))
    with pytest.raises(LiftError, match="cover exactly"):
        PaddingAssignment({("R", 0): 0}).validate(sig, 1)
    with pytest.raises(LiftError, match="pairwise distinct"):
        PaddingAssignment({("R", 0): 0, ("R", LIMIT): 0}).validate(sig, 1)
    with pytest.raises(LiftError, match="negative"):
        PaddingAssignment({("R", 0): -1, ("R", LIMIT): 0}).validate(sig, 1)
    unary = Signature(relations=(("U", 1),))
    with pytest.raises(LiftError, match="must exceed 1"):
        PaddingAssignment({("U", 0): 0, ("U", LIMIT): 2}).validate(unary, 1)


def test_config_requires_positive_k():
    with pytest.raises(LiftError, match="at least 1"):
        LiftConfig(k=0)


# -- construction -------------------------------------------------------------------


def test_lift_shape_single_edge(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    assert N.structure.size == 6
    assert N.provenance == (
        Anchor(),
        BaseElem(0),
        BaseElem(1),
        FiberElem("edge", 0, (0, 1)),
        FiberElem("edge", LIMIT, (0, 1)),
        FiberElem("edge", 0, (1, 0)),
    )
    assert N.structure.constants["anchor"] == 0
    assert N.structure.relations["base"] == ((1,), (2,))


def test_lift_shape_with_repetition_tuples(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1, include_repetition_tuples=True))
    # fibers also over (0,0) and (1,1)
    assert N.structure.size == 8
    coords = {p.coords for p in N.provenance if isinstance(p, FiberElem)}
    assert coords == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_lift_shape_no_edges(m_pair):
    N = build_lift(m_pair, LiftConfig(k=1))
    assert N.structure.size == 5
    assert not [p for p in N.provenance if isinstance(p, FiberElem) and p.copy == LIMIT]


def test_lift_rejects_functional_source():
    sig = Signature(functions=("f",))
    M = Structure(sig=sig, size=1, functions={"f": (0,)})
    with pytest.raises(LiftError, match="relational"):
        build_lift(M)


def test_fiber_sizes(corpus):
    # a fiber holds k+1 copies over relation tuples and k otherwise
    for _, M in corpus[:20]:
        for k in (1, 2):
            N = build_lift(M, LiftConfig(k=k))
            for coords in N.eligible_tuples("edge"):
                expected = k + 1 if coords in M.relation_sets["edge"] else k
                assert len(N.fiber_copies("edge", coords)) == expected


def test_function_semantics(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    S = N.structure
    copy0 = N.element_of(FiberElem("edge", 0, (0, 1)))
    limit = N.element_of(FiberElem("edge", LIMIT, (0, 1)))
    # projections recover coordinates (as base ids); anchor elsewhere
    assert S.functions["proj_edge_0"][copy0] == N.base_id(0)
    assert S.functions["proj_edge_1"][copy0] == N.base_id(1)
    assert S.functions["proj_edge_0"][N.anchor_id] == N.anchor_id
    assert S.functions["proj_edge_0"][N.base_id(0)] == N.anchor_id
    # copy selectors move within the fiber; the limit element is no fixpoint
    assert S.functions["copy_edge_0"][limit] == copy0
    assert S.functions["copy_edge_0"][copy0] == copy0


# -- limit elements -------------------------------------------------------------------


def test_limit_elements_examples(m_edge, m_pair):
    N = build_lift(m_edge, LiftConfig(k=1))
    (lim,) = limit_elements(N, "edge")
    assert N.provenance[lim] == FiberElem("edge", LIMIT, (0, 1))
    assert limit_elements(build_lift(m_pair, LiftConfig(k=1)), "edge") == ()


def test_limit_elements_full_tournament():
    M = digraph(3, edge_pairs(3))  # all 6 ordered pairs
    N = build_lift(M, LiftConfig(k=2))
    assert len(limit_elements(N, "edge")) == 6


def test_limit_elements_encode_relation_membership(corpus):
    for _, M in corpus[30:50]:
        N = build_lift(M, LiftConfig(k=1))
        limit_coords = {N.provenance[e].coords for e in limit_elements(N, "edge")}
        assert limit_coords == set(M.relation_sets["edge"])


# -- automorphism transfer ---------------------------------------------------------------


def test_direct_induced_identity(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    assert direct_induced(N, Permutation.identity(2)).is_identity()


def test_direct_induced_swap(m_pair):
    N = build_lift(m_pair, LiftConfig(k=1))
    pihat = direct_induced(N, Permutation((1, 0)))
    assert pihat.images == (0, 2, 1, 4, 3)
    assert is_automorphism(N.structure, pihat)


def test_direct_induced_rejects_with_fiber_witness(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    with pytest.raises(LiftMapError) as e:
        direct_induced(N, Permutation((1, 0)))
    assert e.value.rel == "edge"
    assert e.value.coords == (0, 1)
    assert e.value.image == (1, 0)


def test_projection_inverts_induction(corpus):
    for _, M in corpus[:20]:
        N = build_lift(M, LiftConfig(k=1))
        for pi in automorphism_group_brute(M):
            assert project_automorphism(N, direct_induced(N, pi)) == pi


def test_all_lift_automorphisms_are_induced(m_pair, m_edge):
    for M in (m_pair, m_edge):
        N = build_lift(M, LiftConfig(k=1))
        lift_members = automorphism_group_brute(N.structure)
        induced = {direct_induced(N, pi) for pi in automorphism_group_brute(M)}
        assert set(lift_members) == induced


def test_project_rejects_non_automorphism(m_pair):
    N = build_lift(m_pair, LiftConfig(k=1))
    bad = Permutation((0, 1, 2, 4, 3))  # swaps the two fibers' copies only
    assert not is_automorphism(N.structure, bad)
    with pytest.raises(LiftError, match="not an automorphism"):
        project_automorphism(N, bad)


def test_order_transfer_under_both_fiber_flags(corpus):
    for _, M in corpus[:10]:
        for include in (False, True):
            N = build_lift(M, LiftConfig(k=1, include_repetition_tuples=include))
            assert automorphism_group(N.structure).order() == automorphism_group(M).order()


# -- scheme generation ---------------------------------------------------------------------


def test_generated_sort_widths(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    scheme, bij = generate_scheme(m_edge, N)
    widths = sorted(s.width for s in scheme.sorts)
    # anchor 2, base 1, copy-0 sort 2, limit sort 3 under canonical padding
    assert widths == [1, 2, 2, 3]


def test_base_sort_quotient_matches_domain(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    scheme, bij = generate_scheme(m_edge, N)
    base_sort = next(s for s in scheme.sorts if s.width == 1)
    classes = definable_quotient(m_edge, base_sort.domain_formula, base_sort.equiv_formula)
    assert len(classes) == m_edge.size


def test_limit_sort_quotient_matches_relation(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1))
    scheme, bij = generate_scheme(m_edge, N)
    limit_sort = next(s for s in scheme.sorts if s.width == 3)
    classes = definable_quotient(m_edge, limit_sort.domain_formula, limit_sort.equiv_formula)
    assert len(classes) == 1  # one relation tuple


def test_scheme_validates_on_corpus_sample(corpus):
    for _, M in corpus[60:69]:
        N = build_lift(M, LiftConfig(k=1))
        scheme, bij = generate_scheme(M, N)
        companion = relational_companion(N.structure)
        report = validate_scheme(M, companion, scheme, bij)
        assert report.passed, (M, report.failures())


def test_scheme_validates_with_repetition_tuples(m_edge):
    N = build_lift(m_edge, LiftConfig(k=1, include_repetition_tuples=True))
    scheme, bij = generate_scheme(m_edge, N)
    companion = relational_companion(N.structure)
    report = validate_scheme(m_edge, companion, scheme, bij)
    assert report.passed, report.failures()


def test_scheme_validates_with_repetition_tuples_size_three():
    M = digraph(3, [(0, 1), (1, 0), (1, 2)])
    N = build_lift(M, LiftConfig(k=1, include_repetition_tuples=True))
    scheme, bij = generate_scheme(M, N)
    report = validate_scheme(M, relational_companion(N.structure), scheme, bij)
    assert report.passed, report.failures()


def _mixed_structure():
    sig = Signature(relations=(("mark", 1), ("edge", 2)))
    return Structure(
        sig=sig,
        size=3,
        relations={"mark": ((0,), (1,)), "edge": ((0, 1),)},
        repetition_free=True,
    )


def _ternary_structure():
    sig = Signature(relations=(("tri", 3),))
    return Structure(sig=sig, size=3, relations={"tri": ((0, 1, 2),)})


def _two_binary_structure():
    sig = Signature(relations=(("red", 2), ("blue", 2)))
    return Structure(
        sig=sig,
        size=3,
        relations={"red": ((0, 1), (1, 0)), "blue": ((1, 2),)},
    )


@pytest.mark.parametrize("make", [_mixed_structure, _ternary_structure, _two_binary_structure])
def test_mixed_signatures_full_pipeline(make):
    M = make()
    GM = automorphism_group(M)
    assert GM.elements() == automorphism_group_brute(M)
    for k in (1, 2):
        N = build_lift(M, LiftConfig(k=k))
        GN = automorphism_group(N.structure)
        assert GN.order() == GM.order()
        for g in GM.generators:
            assert project_automorphism(N, direct_induced(N, g)) == g
        for rel, _ in M.sig.relations:
            coords = {N.provenance[e].coords for e in limit_elements(N, rel)}
            assert coords == set(M.relation_sets[rel])
        scheme, bij = generate_scheme(M, N)
        report = validate_scheme(M, relational_companion(N.structure), scheme, bij)
        assert report.passed, (k, report.failures())
        from stablelift.stability import orbit_decomposition_check

        assert orbit_decomposition_check(M, N, (), group_M=GM, group_N=GN).passed


def test_unary_relation_lift_shape():
    sig = Signature(relations=(("mark", 1),))
    M = Structure(sig=sig, size=2, relations={"mark": ((0,),)})
    N = build_lift(M, LiftConfig(k=1))
    # anchor + 2 base + fibers over (0) [marked: 2 copies] and (1) [1 copy]
    assert N.structure.size == 6
    assert limit_elements(N, "mark") == (N.element_of(FiberElem("mark", LIMIT, (0,))),)
    scheme, bij = generate_scheme(M, N)
    report = validate_scheme(M, relational_companion(N.structure), scheme, bij)
    assert report.passed, report.failures()


def test_explicit_padding_scheme_still_validates(m_edge):
    padding = PaddingAssignment({("edge", 0): 3, ("edge", LIMIT): 4})
    N = build_lift(m_edge, LiftConfig(k=1, padding=padding))
    assert N.padding.width(m_edge.sig, "edge", 0) == 5
    scheme, bij = generate_scheme(m_edge, N)
    report = validate_scheme(m_edge, relational_companion(N.structure), scheme, bij)
    assert report.passed, report.failures()


def test_scheme_and_transfer_on_size_four():
    # a spot check beyond the exhaustive corpus
    for M in (
        digraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
        digraph(4, [(0, 1), (1, 0), (2, 3)]),
    ):
        N = build_lift(M, LiftConfig(k=1))
        assert automorphism_group(N.structure).order() == automorphism_group(M).order()
        scheme, bij = generate_scheme(M, N)
        report = validate_scheme(M, relational_companion(N.structure), scheme, bij)
        assert report.passed, report.failures()


def test_scheme_rejects_foreign_source(m_edge, m_pair):
    N = build_lift(m_edge, LiftConfig(k=1))
    with pytest.raises(LiftError, match="not generated"):
        generate_scheme(m_pair, N)


# -- continuity witnesses ---------------------------------------------------------------------


def test_continuity_witness_examples(m_pair):
    N = build_lift(m_pair, LiftConfig(k=1))
    assert continuity_witness(N, [N.anchor_id]) == frozenset()
    assert continuity_witness(N, [N.base_id(1)]) == frozenset({1})
    copy0 = N.element_of(FiberElem("edge", 0, (0, 1)))
    assert continuity_witness(N, [copy0]) == frozenset({0, 1})


def test_continuity_containment_brute(m_pair, m_triple):
    # fixing the witness set forces the induced automorphism to fix B
    for M in (m_pair, m_triple):
        N = build_lift(M, LiftConfig(k=1))
        members = automorphism_group_brute(M)
        for size in (0, 1, 2):
            for B in itertools.combinations(range(N.structure.size), size):
                A = continuity_witness(N, B)
                for pi in members:
                    if all(pi(a) == a for a in A):
                        pihat = direct_induced(N, pi)
                        assert all(pihat(b) == b for b in B)


def test_projection_continuity_direction(m_triple):
    # fixing base elements pointwise projects into the matching stabilizer
    N = build_lift(m_triple, LiftConfig(k=1))
    members_N = automorphism_group(N.structure).elements()
    assert len(members_N) == 6
    for a in m_triple.domain:
        for pihat in members_N:
            if pihat(N.base_id(a)) == N.base_id(a):
                assert project_automorphism(N, pihat)(a) == a


# -- monotone truncation ------------------------------------------------------------------------


def test_truncation_embedding_preserves_atomic_facts(corpus):
    for _, M in corpus[:8]:
        k = 1
        N1 = build_lift(M, LiftConfig(k=k))
        N2 = build_lift(M, LiftConfig(k=k + 1))
        embed = {
            e: N2.element_of(p) for e, p in enumerate(N1.provenance)
        }
        S1, S2 = N1.structure, N2.structure
        for name, _ in S1.sig.relations:
            for t in S1.relations[name]:
                assert tuple(embed[x] for x in t) in S2.relation_sets[name]
            # and conversely for embedded tuples
            image = set(embed.values())
            inv = {v: e for e, v in embed.items()}
            for t in S2.relations[name]:
                if all(x in image for x in t):
                    assert tuple(inv[x] for x in t) in S1.relation_sets[name]
        for f in S1.sig.functions:
            for x in range(S1.size):
                assert embed[S1.functions[f][x]] == S2.functions[f][embed[x]]
        assert embed[S1.constants["anchor"]] == S2.constants["anchor"]
