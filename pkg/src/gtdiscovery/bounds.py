"""Analytic upper bounds on the COMP error probability.

Every bound has the form ``sum_j w_j * r_j**T`` (or ``exp(-T c_j)``) and is
evaluated in log space, so clusters with tens of thousands of sensors do not
underflow the intermediate products. Values are not capped at 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonDecaying, OriginMismatch, ValidationError
from .model import NetworkConfig, SamplingPlan


class BoundKind(enum.Enum):
    UNION_FIXED = "union_fixed"
    EXP_FIXED = "exp_fixed"
    UNION_RANDOM = "union_random"
    EXP_RANDOM = "exp_random"


@dataclass(frozen=True)
class BoundValue:
    value: float
    kind: BoundKind


def alpha(plan: SamplingPlan, cfg: NetworkConfig) -> float:
    """Probability that a probe includes none of the active sensors (fixed activity)."""
    cfg.require("fixed")
    plan.check_aligned(cfg)
    return math.exp(float(np.sum(cfg.ks * np.log1p(-plan.vector))))


def gamma(plan: SamplingPlan, cfg: NetworkConfig) -> float:
    """Probability that every sensor is inactive or unselected (random activity)."""
    cfg.require("random")
    plan.check_aligned(cfg)
    return math.exp(float(np.sum(cfg.sizes * np.log1p(-cfg.ps * plan.vector))))


def _geometric_sum(weights: np.ndarray, log_ratios: np.ndarray, T: int) -> float:
    # weights * exp(T * log_ratios), skipping empty clusters so 0 * inf never appears
    live = weights > 0
    if T == 0:
        return float(np.sum(weights[live]))
    return float(np.sum(weights[live] * np.exp(T * log_ratios[live])))


def _check_T(T: int) -> None:
    if T < 0:
        raise ValidationError(f"T must be non-negative, got {T}")


def _union_fixed_terms(plan, cfg):
    a = alpha(plan, cfg)
    return (cfg.sizes - cfg.ks).astype(float), np.log1p(-plan.vector * a)


def _union_random_terms(plan, cfg):
    g = gamma(plan, cfg)
    q, p = plan.vector, cfg.ps
    return cfg.sizes * (1.0 - p), np.log1p(-q * g / (1.0 - p * q))


def _base_q(plan: SamplingPlan) -> float:
    if plan.base_q is None:
        raise OriginMismatch("the exponential bound needs a base-scaled plan (q_i = beta_i * q)")
    return plan.base_q


def _exp_fixed_terms(plan, cfg):
    cfg.require("fixed")
    plan.check_aligned(cfg)
    q = _base_q(plan)
    damping = math.exp(-q * float(np.dot(cfg.betas, cfg.ks)))
    return (cfg.sizes - cfg.ks).astype(float), -q * cfg.betas * damping


def _exp_random_terms(plan, cfg):
    cfg.require("random")
    plan.check_aligned(cfg)
    q = _base_q(plan)
    damping = math.exp(-q * float(np.dot(cfg.betas, cfg.sizes * cfg.ps)))
    return cfg.sizes * (1.0 - cfg.ps), -q * cfg.betas * damping


_TERMS: dict[BoundKind, Callable] = {
    BoundKind.UNION_FIXED: _union_fixed_terms,
    BoundKind.EXP_FIXED: _exp_fixed_terms,
    BoundKind.UNION_RANDOM: _union_random_terms,
    BoundKind.EXP_RANDOM: _exp_random_terms,
}


def union_bound_fixed(plan: SamplingPlan, cfg: NetworkConfig, T: int) -> BoundValue:
    """``sum_j (n_j - k_j) * (1 - q_j * alpha)**T``."""
    _check_T(T)
    return BoundValue(_geometric_sum(*_union_fixed_terms(plan, cfg), T), BoundKind.UNION_FIXED)


def exp_bound_fixed(plan: SamplingPlan, cfg: NetworkConfig, T: int) -> BoundValue:
    """``sum_j (n_j - k_j) * exp(-T q beta_j exp(-q sum_r beta_r k_r))`` for base q."""
    _check_T(T)
    return BoundValue(_geometric_sum(*_exp_fixed_terms(plan, cfg), T), BoundKind.EXP_FIXED)


def union_bound_random(plan: SamplingPlan, cfg: NetworkConfig, T: int) -> BoundValue:
    """``sum_j n_j (1 - p_j) * (1 - q_j gamma / (1 - p_j q_j))**T``."""
    _check_T(T)
    return BoundValue(_geometric_sum(*_union_random_terms(plan, cfg), T), BoundKind.UNION_RANDOM)


def exp_bound_random(plan: SamplingPlan, cfg: NetworkConfig, T: int) -> BoundValue:
    """``sum_j n_j (1 - p_j) * exp(-T q beta_j exp(-q sum_k n_k p_k beta_k))`` for base q."""
    _check_T(T)
    return BoundValue(_geometric_sum(*_exp_random_terms(plan, cfg), T), BoundKind.EXP_RANDOM)


def resolve_kind(kind: BoundKind | str, cfg: NetworkConfig) -> BoundKind:
    """Accept a :class:`BoundKind` or the short names ``"union"`` / ``"exp"``."""
    if isinstance(kind, BoundKind):
        expected = "fixed" if kind.value.endswith("fixed") else "random"
        cfg.require(expected)
        return kind
    if kind not in ("union", "exp"):
        raise ValidationError(f"unknown bound kind {kind!r}; use 'union' or 'exp'")
    return BoundKind(f"{kind}_{cfg.kind}")


def evaluate_bound(kind: BoundKind | str, plan: SamplingPlan, cfg: NetworkConfig, T: int) -> BoundValue:
    kind = resolve_kind(kind, cfg)
    _check_T(T)
    return BoundValue(_geometric_sum(*_TERMS[kind](plan, cfg), T), kind)


_T_LIMIT = 2**60


def min_probes_from_bound(
    kind: BoundKind | str, plan: SamplingPlan, cfg: NetworkConfig, epsilon: float
) -> int:
    """Smallest ``T >= 1`` whose bound is at most ``epsilon``.

    Doubling from ``T = 1`` brackets the answer, bisection pins it down, so
    the cost is ``O(log T*)`` bound evaluations.
    """
    if not (0.0 < epsilon <= 1.0):
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    kind = resolve_kind(kind, cfg)
    weights, log_ratios = _TERMS[kind](plan, cfg)
    stuck = (weights > 0) & ~(log_ratios < 0)
    if np.any(stuck):
        ids = [cfg.clusters[i].id for i in np.flatnonzero(stuck)]
        raise NonDecaying(f"bound never decays: clusters {ids} have inactive sensors that are never probed")

    def value(T: int) -> float:
        return _geometric_sum(weights, log_ratios, T)

    hi = 1
    while value(hi) > epsilon:
        hi *= 2
        if hi > _T_LIMIT:
            raise NonDecaying("bound decays too slowly to reach epsilon")
    lo = hi // 2  # value(lo) > epsilon, or lo == 0
    if hi == 1:
        return 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if value(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi
