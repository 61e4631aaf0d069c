"""Scattering-matrix modeling of parametrically coupled mode networks.

Build a :class:`ModeNetwork` (by hand or from :mod:`paramnet.catalog`), then
evaluate it with :func:`scattering`, sweep it with :mod:`paramnet.analysis`,
or reduce and wire it with :mod:`paramnet.composition`.
"""
from .errors import (
    ConditionFailsAtResonance,
    DegenerateGain,
    DomainError,
    InconsistentSymmetry,
    NearSingular,
    NetworkValidationError,
    ParamNetError,
    SignatureMismatch,
    UnsolvableLimit,
    UnstableLoop,
)
from .network import (
    CONVERSION,
    GAIN,
    CouplingEdge,
    DampingMatrix,
    DynamicalMatrix,
    GeneralizedScattering,
    ModeNetwork,
    ModeSpec,
    ScatteringMatrix,
    check_paraunitary,
    check_symplectic,
    damping_matrix,
    dynamical_matrix,
    generalized_scattering,
    network_from_coupling_matrix,
    scattering,
    synthesize_couplings,
    validate_network,
)

__version__ = "0.1.0"
