"""Regular isometric dilations of representations of product systems over Z_+^k."""

from .errors import (
    CoherenceError,
    DilationRefused,
    DimensionError,
    DomainError,
    InconsistencyError,
    PreconditionError,
    RegDilError,
    ResourceError,
    UnsupportedError,
)
from .gradedspace import MultiIndex, ProductSystem
from .representation import NcPolynomial, Representation, validate, is_doubly_commuting
from .dilation import check_regular_dilation, construct_dilation, verify_dilation
from .fock import TruncatedFock, nica_check, vn_margin, character_set

__all__ = [
    "CoherenceError",
    "DilationRefused",
    "DimensionError",
    "DomainError",
    "InconsistencyError",
    "PreconditionError",
    "RegDilError",
    "ResourceError",
    "UnsupportedError",
    "MultiIndex",
    "ProductSystem",
    "NcPolynomial",
    "Representation",
    "validate",
    "is_doubly_commuting",
    "check_regular_dilation",
    "construct_dilation",
    "verify_dilation",
    "TruncatedFock",
    "nica_check",
    "vn_margin",
    "character_set",
]
