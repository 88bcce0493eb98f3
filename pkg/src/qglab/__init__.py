"""qglab: idempotent states, coideal lattices and duality on finite quantum groups."""

from .hopf import (
    FiniteQuantumGroup,
    GnsSpace,
    ValidationReport,
    compute_haar,
    function_algebra,
    gns,
    group_algebra,
    group_hash,
    load_dict,
    load_path,
    loads,
    save,
    save_dict,
    validate,
    with_haar,
)
from .harmonic import (
    Functional,
    IdempotentState,
    ZERO_STATE,
    ZeroState,
    convolution_unit,
    convolve,
    functional_from_dict,
    functional_to_dict,
    group_like_check,
    haar_functional,
    haar_type_test,
    is_idempotent_state,
    preceq,
    state_from_qperp,
    support_projection,
)
from .coideal import (
    Coideal,
    as_idempotent_state,
    coideal_from_dict,
    coideal_from_span,
    coideal_to_dict,
    expectation,
    generated_subalgebra,
    gns_projection,
    intersect,
    is_coideal,
    range_coideal,
    state_from_coideal,
    trace_expectation,
)
from .lattice import (
    IdempotentLattice,
    build_lattice,
    commutation_equivalences,
    enumerate_idempotents,
    join,
    meet,
    modular_law_check,
    to_dot,
)
from .duality import (
    DualPair,
    codual,
    dual,
    dual_state,
    dual_state_from_codual_check,
    double_dual_state,
    duality_exchange_check,
    multiplicative_unitary,
    regular_unitary,
)
from . import catalog, checks, errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
