"""Sparse LSTD policy evaluation with projected minimax concave penalties."""

from ._core import (
    ChainMdp,
    LstdData,
    LstdOperator,
    assemble_operator,
    chain_lstd_data,
    exact_optimal,
    lstd_closed_form,
    mc_penalty,
    moreau_env_l1,
    pmc_lstd_solve,
    pmc_penalty,
    resolvent_l1_minus_id,
    run_sweep,
    soft_threshold,
)

__all__ = [
    "ChainMdp",
    "LstdData",
    "LstdOperator",
    "assemble_operator",
    "chain_lstd_data",
    "exact_optimal",
    "lstd_closed_form",
    "mc_penalty",
    "moreau_env_l1",
    "pmc_lstd_solve",
    "pmc_penalty",
    "resolvent_l1_minus_id",
    "run_sweep",
    "soft_threshold",
]
