"""Pre-measurement, decoherence and readout for Wigner's-Friend scenarios."""

from .meas import (
    FriendPolicy,
    IrreversibleError,
    decohere,
    dressed_basis,
    full_measure,
    mub_basis,
    phase_basis,
    premeasure,
    undo_premeasure,
)
from .qcore import (
    Basis,
    DensityOperator,
    FactoredDensity,
    Register,
    StateVector,
    born_probabilities,
    fidelity,
    joint_probabilities,
    partial_trace,
    qubit,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "DensityOperator",
    "FactoredDensity",
    "FriendPolicy",
    "IrreversibleError",
    "Register",
    "StateVector",
    "born_probabilities",
    "decohere",
    "dressed_basis",
    "fidelity",
    "full_measure",
    "joint_probabilities",
    "mub_basis",
    "partial_trace",
    "phase_basis",
    "premeasure",
    "qubit",
    "tensor",
    "undo_premeasure",
    "__version__",
]
