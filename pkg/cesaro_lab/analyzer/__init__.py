"""Partition, limit and verification analysis.

The experiment runner lives in :mod:`.experiment_runner` and is imported from
there; it depends on the config and slln packages, which depend on this one.
"""

from .decomposition import (
    bounded_in_probability,
    build_equivalent_measure,
    certify_l1_bound,
    hereditarily_unbounded,
    l1_bounded_on_window,
    partition,
)
from .distributions import tightness_check, weak_convergence_check
from .limits import (
    LimitClassifier,
    limit_profile,
    permuted_cesaro,
    subwindow_consistency,
    verify_prop_main,
)
from .oracle import brute_force_boundedness_oracle, oracle_agreement
from .selection import komlos_select
from .verification import (
    cor_finite_chain,
    cor_infinite_chain,
    measure_change_equivalence,
    verify_remark_main,
)

__all__ = [
    "LimitClassifier",
    "bounded_in_probability",
    "brute_force_boundedness_oracle",
    "build_equivalent_measure",
    "certify_l1_bound",
    "cor_finite_chain",
    "cor_infinite_chain",
    "hereditarily_unbounded",
    "komlos_select",
    "l1_bounded_on_window",
    "limit_profile",
    "measure_change_equivalence",
    "oracle_agreement",
    "partition",
    "permuted_cesaro",
    "subwindow_consistency",
    "tightness_check",
    "verify_prop_main",
    "verify_remark_main",
    "weak_convergence_check",
]
