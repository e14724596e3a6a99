"""Matrix-valued positive definite kernels built from completely monotone functions.

Structured results come back from the native core as JSON and are decoded
here; Gram matrices are NumPy arrays in point-major layout (index mu * p + m).
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

import numpy as np

from . import _core
from ._core import (
    AkError,
    aitken_lhs,
    aitken_lhs_mc,
    aitken_rhs,
    hadamard_exp_neg,
    matern_eval,
    negative_type_check,
    oracle_suite_names,
    phi,
    reconstruct_from_measure,
    spec_hash,
)

__all__ = [
    "AkError",
    "aitken_lhs",
    "aitken_lhs_mc",
    "aitken_rhs",
    "build_gram",
    "catalog",
    "check_spec",
    "cm_check",
    "hadamard_exp_neg",
    "matern_eval",
    "negative_type_check",
    "oracle_suite_names",
    "phi",
    "recipes",
    "reconstruct_from_measure",
    "run_oracle_suite",
    "spec_hash",
]


def _spec_text(spec: str | Mapping[str, Any]) -> str:
    return spec if isinstance(spec, str) else json.dumps(spec)


def catalog() -> list[dict]:
    return json.loads(_core.catalog_json())


def recipes() -> dict:
    return json.loads(_core.recipes_json())


def cm_check(name: str, params: Mapping[str, float], orders: int, grid: Sequence[float]) -> dict:
    return json.loads(_core.cm_check_json(name, dict(params), orders, list(grid)))


def build_gram(spec, points, *, unsafe: bool = False, tol_psd: float = 1e-8, tol_pd: float = 1e-10):
    """Returns (gram, spectral report, provenance) for a spec document or JSON text."""
    gram, report, provenance = _core.build_gram(
        _spec_text(spec), np.atleast_2d(np.asarray(points, dtype=float)), unsafe, tol_psd, tol_pd
    )
    return gram, json.loads(report), json.loads(provenance)


def check_spec(spec, *, n_points: int = 6, n_freq: int = 16, seed: int = 42) -> dict:
    return json.loads(_core.check_spec_json(_spec_text(spec), n_points, n_freq, seed))


def run_oracle_suite(name: str, *, seed: int = 42, trials: int = 100) -> dict:
    return json.loads(_core.run_oracle_suite_json(name, seed, trials))
