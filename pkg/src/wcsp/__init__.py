"""Exact counting for non-negative weighted constraint satisfaction problems.

The package computes partition functions of weighted #CSP instances,
decides whether a weighted language is balanced (tractable) or #P-hard,
and implements the reductions used to move between the weighted,
unweighted and graph-homomorphism settings.
"""

from wcsp.errors import (
    ContractError,
    NotApplicable,
    NotEquivalenceError,
    ResourceError,
    ValidationError,
)
from wcsp.model import (
    Assignment,
    FunctionTable,
    Instance,
    Language,
    RelationTable,
    evaluate,
    marginalize,
    support_function,
    support_language,
)

__all__ = [
    "Assignment",
    "ContractError",
    "FunctionTable",
    "Instance",
    "Language",
    "NotApplicable",
    "NotEquivalenceError",
    "RelationTable",
    "ResourceError",
    "ValidationError",
    "evaluate",
    "marginalize",
    "support_function",
    "support_language",
]
