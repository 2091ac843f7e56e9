"""Factorizability of optimal LOCC discrimination for multi-party sequence ensembles."""

from .cone import (
    ConeParams,
    ConeStatus,
    ConeVerdict,
    DecompositionCertificate,
    analyze_cone,
    certify_block_positive,
    known_primitive_bp,
    refute_block_positivity,
    seesaw_min_product,
    telescope,
    verify_decomposition,
)
from .constructions import (
    example1_ensemble,
    example1_sigma,
    example1_witness_operator,
    example2_ensemble,
    example2_measurement,
    random_ensemble,
)
from .discrimination import PgResult, check_pg_factorization, helstrom_two_state, solve_pg
from .ensembles import (
    Measurement,
    SequenceEnsemble,
    StateEnsemble,
    enumerate_indices,
    max_prior,
    product_measurement,
    success_probability,
)
from .factorizability import (
    Factorizable,
    FactorizabilityReport,
    ReportOptions,
    SeparableCertificate,
    Verdict,
    assemble_report,
    build_example2_certificate,
    check_corollary1,
    check_corollary2,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    verify_theorem4_certificate,
)
from .operators import (
    HermitianOperator,
    PartyStructure,
    ProductPureState,
    ghz,
    identity,
    regroup_party_major_to_step_major,
    regroup_step_major_to_party_major,
    tensor,
    uniform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
