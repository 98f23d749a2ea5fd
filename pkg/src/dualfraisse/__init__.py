"""Projective Fraïssé theory on finite structures with direct and dual relations."""

__version__ = "0.1.0"

from .core import (
    FiniteStructure,
    Kind,
    ParseError,
    Signature,
    SurjectiveMap,
    SymbolDecl,
    ValidationError,
    canonical_form,
    parse_structure,
    serialize_structure,
)
from .epi import (
    common_refinement,
    enumerate_epimorphisms,
    find_isomorphism,
    induced_structure,
    is_epimorphism,
)
from .kernels import backend_name, set_backend

__all__ = [
    "FiniteStructure", "Kind", "ParseError", "Signature", "SurjectiveMap", "SymbolDecl",
    "ValidationError", "canonical_form", "parse_structure", "serialize_structure",
    "common_refinement", "enumerate_epimorphisms", "find_isomorphism", "induced_structure",
    "is_epimorphism", "backend_name", "set_backend",
]
