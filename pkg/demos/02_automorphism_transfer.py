#!/usr/bin/env python3
"""Automorphisms travel between a structure and its lift, in both directions.

The bare two-point structure has a swap automorphism.  Carrying it to the
lift permutes the base copy and the fibers coherently; restricting any lift
automorphism back to the base copy recovers a source automorphism.  The two
maps are mutually inverse, so the groups have the same order for every copy
bound.

Trying to carry a non-automorphism fails loudly: the limit element over a
relation tuple would need a limit element over the image tuple, which does
not exist.  That failure is the whole point of the limit copies.
"""

from stablelift import (
    LiftConfig,
    Permutation,
    automorphism_group,
    build_lift,
    direct_induced,
    project_automorphism,
)
from stablelift.corpus import digraph
from stablelift.lifting import LiftMapError

pair = digraph(2, [])
edge = digraph(2, [(0, 1)])

for k in (1, 2, 3):
    N = build_lift(pair, LiftConfig(k=k))
    order_M = automorphism_group(pair).order()
    order_N = automorphism_group(N.structure).order()
    print(f"k={k}: |Aut(source)| = {order_M}, |Aut(lift)| = {order_N}")

N = build_lift(pair, LiftConfig(k=1))
swap = Permutation((1, 0))
lifted = direct_induced(N, swap)
print("\nswap on the source  :", swap.images)
print("carried to the lift :", lifted.images)
print("projected back      :", project_automorphism(N, lifted).images)

# The one-edge digraph is rigid, so the swap cannot be carried to its lift.
N_edge = build_lift(edge, LiftConfig(k=1))
try:
    direct_induced(N_edge, swap)
except LiftMapError as e:
    print("\ncarrying the swap over the one-edge digraph fails:")
    print(" ", e)
