"""Network description: clusters, activity models, sampling plans.

All vectors derived from a :class:`NetworkConfig` (sizes, active counts,
activity probabilities, energy weights, sampling probabilities) are aligned
to the cluster order fixed at construction time.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    BadBeta,
    BadCount,
    BadProbability,
    BadSize,
    DuplicateId,
    EmptyNetwork,
    MixedActivityKinds,
    PlanOutOfRange,
    ValidationError,
    WrongActivityKind,
)


@dataclass(frozen=True)
class Fixed:
    """Exactly ``k`` sensors of the cluster are active."""

    k: int


@dataclass(frozen=True)
class Random:
    """Each sensor of the cluster is active independently with probability ``p``."""

    p: float


Activity = Union[Fixed, Random]


@dataclass(frozen=True)
class ClusterSpec:
    id: int
    n: int
    activity: Activity
    beta: float = 1.0


@dataclass(frozen=True)
class NetworkConfig:
    """Ordered clusters sharing one activity model.

    Constructing a ``NetworkConfig`` does not validate it; pass it through
    :func:`validate_config` (or build it with :func:`parse_config`).
    """

    clusters: tuple[ClusterSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))

    @property
    def m(self) -> int:
        return len(self.clusters)

    @property
    def kind(self) -> str:
        return "fixed" if isinstance(self.clusters[0].activity, Fixed) else "random"

    @property
    def is_fixed(self) -> bool:
        return self.kind == "fixed"

    @cached_property
    def n_total(self) -> int:
        return sum(c.n for c in self.clusters)

    @cached_property
    def k_total(self) -> int:
        if not self.is_fixed:
            raise WrongActivityKind("k is only defined for fixed activity")
        return sum(c.activity.k for c in self.clusters)

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([c.n for c in self.clusters], dtype=np.int64)

    @cached_property
    def ks(self) -> np.ndarray:
        if not self.is_fixed:
            raise WrongActivityKind("k is only defined for fixed activity")
        return np.array([c.activity.k for c in self.clusters], dtype=np.int64)

    @cached_property
    def ps(self) -> np.ndarray:
        if self.is_fixed:
            raise WrongActivityKind("p is only defined for random activity")
        return np.array([c.activity.p for c in self.clusters], dtype=float)

    @cached_property
    def betas(self) -> np.ndarray:
        return np.array([c.beta for c in self.clusters], dtype=float)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Start index of each cluster; cluster ``i`` owns ``offsets[i]:offsets[i+1]``."""
        return np.concatenate([[0], np.cumsum(self.sizes)])

    @cached_property
    def cluster_index(self) -> np.ndarray:
        """Position (not id) of the cluster owning each sensor."""
        return np.repeat(np.arange(self.m), self.sizes)

    @cached_property
    def cluster_of(self) -> np.ndarray:
        """Cluster id of each sensor."""
        ids = np.array([c.id for c in self.clusters], dtype=np.int64)
        return ids[self.cluster_index]

    def require(self, kind: str) -> None:
        if self.kind != kind:
            raise WrongActivityKind(f"expected {kind} activity, got {self.kind}")

    def to_dict(self) -> dict:
        out = []
        for c in self.clusters:
            if isinstance(c.activity, Fixed):
                act = {"kind": "fixed", "k": c.activity.k}
            else:
                act = {"kind": "random", "p": c.activity.p}
            out.append({"id": c.id, "n": c.n, "beta": c.beta, "activity": act})
        return {"clusters": out}


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_real(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def validate_config(raw: NetworkConfig) -> NetworkConfig:
    """Check every config invariant and return the config unchanged.

    Validation is idempotent: a validated config validates to an equal value.
    """
    clusters = raw.clusters
    if not clusters:
        raise EmptyNetwork("network has no clusters")
    kinds = {type(c.activity) for c in clusters}
    if not kinds <= {Fixed, Random}:
        raise ValidationError("activity must be Fixed or Random")
    if len(kinds) > 1:
        raise MixedActivityKinds("all clusters must share one activity model")
    ids = [c.id for c in clusters]
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"cluster ids must be unique, got {ids}")
    for i, c in enumerate(clusters):
        if not _is_int(c.n) or c.n < 1:
            raise BadSize(i, f"n must be a positive integer, got {c.n!r}")
        if not _is_real(c.beta) or not (0.0 < c.beta <= 1.0) or math.isnan(c.beta):
            raise BadBeta(i, f"beta must lie in (0, 1], got {c.beta!r}")
        act = c.activity
        if isinstance(act, Fixed):
            if not _is_int(act.k) or act.k < 0 or act.k > c.n:
                raise BadCount(i, f"k must be an integer in [0, n={c.n}], got {act.k!r}")
        elif not _is_real(act.p) or not (0.0 <= act.p <= 1.0):
            raise BadProbability(i, f"p must lie in [0, 1], got {act.p!r}")
    # warm the caches so later readers (possibly in other threads) see fixed values
    raw.n_total, raw.sizes, raw.betas, raw.offsets, raw.cluster_index
    return raw


def make_config(clusters: Sequence[tuple]) -> NetworkConfig:
    """Shorthand used by scripts and tests.

    Each entry is ``(n, activity, beta)`` where ``activity`` is an int (fixed
    count) or a float (activity probability). Ids are assigned 0, 1, ...
    """
    specs = []
    for i, (n, act, beta) in enumerate(clusters):
        activity = Fixed(act) if _is_int(act) else Random(float(act))
        specs.append(ClusterSpec(id=i, n=n, activity=activity, beta=beta))
    return validate_config(NetworkConfig(tuple(specs)))


def _strict_keys(obj, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"{where}: unknown keys {sorted(unknown)}")
    missing = allowed - set(obj)
    if missing:
        raise ValidationError(f"{where}: missing keys {sorted(missing)}")


def parse_config(doc: dict) -> NetworkConfig:
    """Build and validate a config from its JSON document form."""
    _strict_keys(doc, {"clusters"}, "config")
    if not isinstance(doc["clusters"], list):
        raise ValidationError("config: 'clusters' must be an array")
    specs = []
    for i, item in enumerate(doc["clusters"]):
        _strict_keys(item, {"id", "n", "beta", "activity"}, f"clusters[{i}]")
        act = item["activity"]
        if not isinstance(act, dict) or act.get("kind") not in ("fixed", "random"):
            raise ValidationError(f"clusters[{i}].activity: kind must be 'fixed' or 'random'")
        if act["kind"] == "fixed":
            _strict_keys(act, {"kind", "k"}, f"clusters[{i}].activity")
            activity: Activity = Fixed(act["k"])
        else:
            _strict_keys(act, {"kind", "p"}, f"clusters[{i}].activity")
            if not _is_real(act["p"]):
                raise BadProbability(i, f"p must be a number, got {act['p']!r}")
            activity = Random(float(act["p"]))
        if not _is_int(item["id"]):
            raise ValidationError(f"clusters[{i}]: id must be an integer")
        beta = item["beta"]
        if not _is_real(beta):
            raise BadBeta(i, f"beta must be a number, got {beta!r}")
        specs.append(ClusterSpec(id=item["id"], n=item["n"], activity=activity, beta=float(beta)))
    return validate_config(NetworkConfig(tuple(specs)))


def load_config(path: str | Path) -> NetworkConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc)


@dataclass(frozen=True)
class SparsityReport:
    alpha: float
    ratios: tuple[float, ...]


def sparsity_regime_check(cfg: NetworkConfig, alpha: float) -> SparsityReport:
    """Ratio ``k_i / n_i**alpha`` per cluster; advisory only, never rejects."""
    cfg.require("fixed")
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    ratios = tuple(c.activity.k / c.n**alpha for c in cfg.clusters)
    return SparsityReport(alpha=alpha, ratios=ratios)


class PlanOrigin(enum.Enum):
    DERIVED = "derived"
    MANUAL = "manual"
    BASE_SCALED = "base_scaled"


@dataclass(frozen=True)
class SamplingPlan:
    """Per-cluster sampling probabilities.

    ``base_q`` is set whenever ``q[i] == beta[i] * base_q`` holds for every
    cluster, i.e. for base-scaled plans and for unclamped derived plans.
    """

    q: tuple[float, ...]
    origin: PlanOrigin = PlanOrigin.MANUAL
    base_q: float | None = None
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "warnings", tuple(self.warnings))
        for i, x in enumerate(q):
            if not (0.0 <= x < 1.0):
                raise PlanOutOfRange(f"q[{i}] = {x!r} outside [0, 1)")
        if self.origin is PlanOrigin.BASE_SCALED and self.base_q is None:
            raise ValidationError("base-scaled plan needs base_q")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.q, dtype=float)

    @classmethod
    def manual(cls, q: Sequence[float]) -> SamplingPlan:
        return cls(tuple(q), PlanOrigin.MANUAL)

    @classmethod
    def base_scaled(cls, cfg: NetworkConfig, base_q: float) -> SamplingPlan:
        if base_q < 0:
            raise PlanOutOfRange(f"base q must be non-negative, got {base_q}")
        return cls(tuple(b * base_q for b in cfg.betas.tolist()), PlanOrigin.BASE_SCALED, base_q)

    def check_aligned(self, cfg: NetworkConfig) -> None:
        if len(self.q) != cfg.m:
            raise ValidationError(f"plan has {len(self.q)} entries for {cfg.m} clusters")

    def per_sensor(self, cfg: NetworkConfig) -> np.ndarray:
        self.check_aligned(cfg)
        return self.vector[cfg.cluster_index]
