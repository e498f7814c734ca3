"""Sampling-probability design and energy accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQ, NoActivity, ValidationError
from .model import NetworkConfig, PlanOrigin, SamplingPlan

# q values at or above 1 are pulled back to this (largest "sensible" value below 1)
Q_CLAMP = 1.0 - 2.0**-20


@dataclass(frozen=True)
class ConstraintResidual:
    value: float
    residual: float

    @classmethod
    def of(cls, value: float) -> ConstraintResidual:
        return cls(value=float(value), residual=abs(float(value) - 1.0))


@dataclass(frozen=True)
class EnergyReport:
    """Expected transmissions per sensor over ``T`` probes, per cluster."""

    T: int
    transmissions: tuple[float, ...]
    ratios: np.ndarray  # ratios[i, j] = q_i / q_j

    def to_dict(self) -> dict:
        ratios = [[None if not np.isfinite(r) else float(r) for r in row] for row in self.ratios]
        return {"T": self.T, "transmissions": list(self.transmissions), "ratios": ratios}


def expected_active_load(cfg: NetworkConfig) -> float:
    """Energy-weighted expected number of active sensors.

    ``sum(beta_i * k_i)`` for fixed activity and ``sum(beta_i * n_i * p_i)``
    for random activity; the optimal base sampling probability is its inverse.
    """
    if cfg.is_fixed:
        return float(np.dot(cfg.betas, cfg.ks))
    return float(np.dot(cfg.betas, cfg.sizes * cfg.ps))


def optimal_base_q(cfg: NetworkConfig) -> float:
    load = expected_active_load(cfg)
    if load <= 0:
        raise NoActivity("no cluster has expected activity; optimal q is undefined")
    return 1.0 / load


def _derived_plan(cfg: NetworkConfig) -> SamplingPlan:
    base = optimal_base_q(cfg)
    q = cfg.betas * base
    warnings = []
    if np.any(q >= 1.0):
        for i in np.flatnonzero(q >= 1.0):
            warnings.append(
                f"cluster {cfg.clusters[i].id}: derived q={q[i]:.6g} >= 1 clamped to {Q_CLAMP!r}"
                " (network too dense for the sparse-regime design)"
            )
        q = np.minimum(q, Q_CLAMP)
        base = None
    return SamplingPlan(tuple(q.tolist()), PlanOrigin.DERIVED, base, tuple(warnings))


def optimal_q_fixed(cfg: NetworkConfig) -> SamplingPlan:
    """``q_i = beta_i / sum_r(beta_r * k_r)``."""
    cfg.require("fixed")
    return _derived_plan(cfg)


def optimal_q_random(cfg: NetworkConfig) -> SamplingPlan:
    """``q_i = beta_i / sum_r(beta_r * n_r * p_r)``."""
    cfg.require("random")
    return _derived_plan(cfg)


def optimal_q(cfg: NetworkConfig) -> SamplingPlan:
    return optimal_q_fixed(cfg) if cfg.is_fixed else optimal_q_random(cfg)


def constraint_residual_fixed(plan: SamplingPlan, cfg: NetworkConfig) -> ConstraintResidual:
    """Left-hand side of ``sum_i k_i q_i / (1 - q_i) = 1`` and its distance from 1."""
    cfg.require("fixed")
    plan.check_aligned(cfg)
    q = plan.vector
    if np.any(q >= 1.0):
        raise DegenerateQ("constraint is undefined at q_i = 1")
    return ConstraintResidual.of(np.sum(cfg.ks * q / (1.0 - q)))


def constraint_residual_random(plan: SamplingPlan, cfg: NetworkConfig) -> ConstraintResidual:
    """Left-hand side of ``sum_i n_i p_i q_i = 1`` and its distance from 1."""
    cfg.require("random")
    plan.check_aligned(cfg)
    return ConstraintResidual.of(np.sum(cfg.sizes * cfg.ps * plan.vector))


def constraint_residual(plan: SamplingPlan, cfg: NetworkConfig) -> ConstraintResidual:
    if cfg.is_fixed:
        return constraint_residual_fixed(plan, cfg)
    return constraint_residual_random(plan, cfg)


def energy_report(plan: SamplingPlan, T: int) -> EnergyReport:
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    q = plan.vector
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = q[:, None] / q[None, :]
    return EnergyReport(T=T, transmissions=tuple((q * T).tolist()), ratios=ratios)
