"""Dense state-vector engine for registers of up to four qubits."""

from .ketparse import StateSyntaxError, format_state, parse_state
from .linalg import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_hermitian,
    eig_hermitian,
    embed,
    embed_single,
    is_hermitian,
    kron,
)
from .states import (
    DensityMatrix,
    PureState,
    born_distribution,
    expectation,
    expectation_rho,
    observable_basis,
    outcome_values,
    partial_trace,
)

__all__ = [
    "IDENTITY_2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "DensityMatrix",
    "PureState",
    "StateSyntaxError",
    "born_distribution",
    "check_hermitian",
    "eig_hermitian",
    "embed",
    "embed_single",
    "expectation",
    "expectation_rho",
    "format_state",
    "is_hermitian",
    "kron",
    "observable_basis",
    "outcome_values",
    "parse_state",
    "partial_trace",
]
