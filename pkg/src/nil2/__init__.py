"""Decision procedures for finite nilpotent groups of class at most two.

Groups live in subvarieties (m,n) cut out by x^m = [x,y]^n = e together
with the class restriction.  The package decides amalgam embeddability,
computes dominions, answers root-adjunction questions and classifies
amalgamation bases, with every criterion shadowed by a brute-force
coproduct oracle.
"""

from .errors import (
    Nil2Error,
    PreconditionError,
    PresentationError,
    ResourceLimitError,
)
from .variety import (
    Variety,
    contains,
    exponent_constants,
    free_nil2_group,
    is_valid_pair,
    join,
    leq,
    meet,
    minimal_variety,
    special_base_transfer,
    strong_base_transfer,
)
from .core import (
    DirectProduct,
    FiniteGroup,
    GroupElement,
    Homomorphism,
    PcGroup,
    PcPresentation,
    QuotientGroup,
    Subgroup,
    abelian_group,
    center,
    central_product,
    cyclic_group,
    direct_product,
    element_order,
    exponent,
    generating_set,
    identity_homomorphism,
    intersection,
    quotient,
    rebuild_as_pcgroup,
    subgroup_closure,
    trivial_group,
    trivial_subgroup,
    verbal_subgroups,
)
from .abelian import (
    FinAb,
    abelian_special_base,
    abelian_strong_base,
    invariant_factors,
    tensor_product,
)
from .coproduct import (
    amalgamated_coproduct,
    coproduct_mn,
    factor_through,
    oracle_adjoin_root,
    oracle_adjoin_two_roots,
    oracle_dominion,
    oracle_strong,
    oracle_weak,
)
from .amalgam import (
    Amalgam,
    Verdict,
    adjoin_commutator_realization,
    can_adjoin_root,
    can_adjoin_two_roots,
    check_strong,
    check_strong_special_case,
    check_weak,
    construct_with_center,
    dominion,
    embeddability_filter_generator,
    is_special_base,
    is_strong_base,
    special_amalgam,
    verify_root_commutator_identity,
)
from .catalog import catalog, catalog_names, claim_plan, evaluate_claim

__version__ = "0.1.0"
