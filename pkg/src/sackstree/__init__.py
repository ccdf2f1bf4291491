"""Finite-depth perfect-set machinery over finite partial orders."""
from .poset import FinitePoset, PosetError, Schedule, Segment, all_initial_segments, cone, xi_pair
from .shadow import SectionTree, ShadowPoint, TreeSystem
from .precond import (
    BudgetExhausted,
    ConditionError,
    amalgam,
    decide_clopen,
    is_condition,
    iterate_spl,
    locate_clopen,
    restrict,
    shrink_check,
    spl,
    validate,
)
from .splitsys import SplittingSystem, check_star, expand, fuse, generic_point, refine, verify_system
from .homeo import build_homeo, check_h1, check_h2, transfer_1d
from .reduce import (
    Certificate,
    ShadowFunction,
    capture_all,
    capture_or_reduce,
    captures,
    check_inter,
    dichotomy,
    reducible,
    separate_or_reduce,
)

__all__ = [
    "FinitePoset", "PosetError", "Schedule", "Segment", "all_initial_segments", "cone", "xi_pair",
    "SectionTree", "ShadowPoint", "TreeSystem",
    "BudgetExhausted", "ConditionError", "amalgam", "decide_clopen", "is_condition",
    "iterate_spl", "locate_clopen", "restrict", "shrink_check", "spl", "validate",
    "SplittingSystem", "check_star", "expand", "fuse", "generic_point", "refine", "verify_system",
    "build_homeo", "check_h1", "check_h2", "transfer_1d",
    "Certificate", "ShadowFunction", "capture_all", "capture_or_reduce", "captures",
    "check_inter", "dichotomy", "reducible", "separate_or_reduce",
]
