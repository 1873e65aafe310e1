#!/usr/bin/env python3
"""Walk through the lift construction on a two-element digraph.

The source structure has elements {0, 1} and a single directed edge 0 -> 1.
Its lift keeps a marked copy of the source, adds an anchor element, and grows
one fiber per loop-free ordered pair.  The pair (0, 1) is in the relation, so
its fiber gets an extra "limit" copy; the pair (1, 0) is not, so its fiber
has only the plain copies.
"""

import json

from stablelift import LiftConfig, build_lift, limit_elements
from stablelift.corpus import digraph

M = digraph(2, [(0, 1)])
print("source structure: domain {0, 1}, edge = {(0, 1)}")

N = build_lift(M, LiftConfig(k=1))
print(f"\nlift has {N.structure.size} elements:")
for e, tag in enumerate(N.provenance):
    print(f"  {e}: {tag}")

print("\nsignature of the lift:")
print("  relations:", [name for name, _ in N.structure.sig.relations])
print("  functions:", list(N.structure.sig.functions))
print("  constant :", list(N.structure.sig.constants))

# The copy selector fixes the plain copy and moves the limit copy, which is
# how the limit copies stay structurally detectable.
S = N.structure
for e in range(S.size):
    moved = S.functions["copy_edge_0"][e]
    print(f"  copy_edge_0({e}) = {moved}")

print("\nlimit elements over 'edge':", limit_elements(N, "edge"))
print("(exactly one, over the tuple (0, 1) that is in the relation)")

print("\nfull report:")
print(json.dumps(N.to_report_dict(), indent=2, sort_keys=True))
