"""Decompositions of complete 3-uniform hypergraphs into copies of K4+e."""
from .core import (
    Block,
    DesignDocument,
    DesignError,
    IngredientSpec,
    InvariantViolation,
    MalformedInput,
    Triple,
    deserialize,
    recognize_k4e,
    relabel,
    serialize,
)
from .verify import admissible, degree_profile, verify

__version__ = "0.1.0"

__all__ = [
    "Block",
    "DesignDocument",
    "DesignError",
    "IngredientSpec",
    "InvariantViolation",
    "MalformedInput",
    "Triple",
    "admissible",
    "degree_profile",
    "deserialize",
    "recognize_k4e",
    "relabel",
    "serialize",
    "verify",
]
