"""Stabilized lifts of finite relational structures.

Builds, for a finite relational structure, a lifted structure with the same
automorphism group, the interpretation-scheme machinery that transfers
automorphisms canonically, and an orbit-counting laboratory for stability
evidence at finite scale.
"""

from .structures import (
    Signature,
    Structure,
    StructureError,
    validate_structure,
    relational_companion,
    structures_equal,
    structure_to_json,
    structure_from_json,
)
from .formulas import (
    Formula,
    FormulaError,
    ParseError,
    AtomicType,
    parse_formula,
    format_formula,
    eval_formula,
    definable_set,
    atomic_type,
    sort_partition,
)
from .groups import (
    Permutation,
    PermGroup,
    GroupError,
    group_order,
    orbits,
    pointwise_stabilizer,
    is_automorphism,
    automorphism_group,
    automorphism_group_brute,
)
from .interpretation import (
    SchemeSort,
    SchemeRel,
    InterpretationScheme,
    SortBijections,
    ValidationReport,
    SchemeError,
    definable_quotient,
    validate_scheme,
    induced_automorphism,
    check_classical_interpretation,
)
from .lifting import (
    LIMIT,
    LiftConfig,
    PaddingAssignment,
    LiftedStructure,
    LiftError,
    LiftMapError,
    Anchor,
    BaseElem,
    FiberElem,
    canonical_padding,
    build_lift,
    limit_elements,
    direct_induced,
    project_automorphism,
    generate_scheme,
    continuity_witness,
)
from .stability import (
    CensusReport,
    stabilizer_orbits,
    qf_type_census,
    orbit_decomposition_check,
    stability_report,
)

__version__ = "0.1.0"
