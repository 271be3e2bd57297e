"""Discrete one-sided fractional derivatives on the mesh :math:`h\\mathbb{Z}`."""

from __future__ import annotations

from .coefficients import (
    CoeffTable,
    FracOrder,
    HeatWeights,
    OrderError,
    heat_weights,
    jump_distribution,
    lambda_coeffs,
    lambda_neg_coeffs,
    tail_mass_estimate,
)
from .grid import (
    CallbackTail,
    ConstantTail,
    Grid,
    GridFunction,
    UndefinedTail,
    ZeroTail,
    constant,
    geometric,
    indicator,
    restrict,
)

__all__ = [
    "CallbackTail",
    "CoeffTable",
    "ConstantTail",
    "FracOrder",
    "Grid",
    "GridFunction",
    "HeatWeights",
    "OrderError",
    "UndefinedTail",
    "ZeroTail",
    "constant",
    "geometric",
    "heat_weights",
    "indicator",
    "jump_distribution",
    "lambda_coeffs",
    "lambda_neg_coeffs",
    "restrict",
    "tail_mass_estimate",
]
