"""Seeded Monte-Carlo harness for COMP success probability.

Trial ``i`` of an experiment draws all of its randomness from a seed derived
from ``(master_seed, tag, i)`` alone, so results do not depend on how trials
are scheduled across worker processes. The same trial seeds are reused for
every probe count and every plan of an experiment (common random numbers),
which makes the estimated success curve exactly non-decreasing in ``T``.
"""

from __future__ import annotations

import csv
import io
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .design import optimal_base_q
from .engine import (
    ActivitySet,
    activity_mask,
    comp_decode,
    draw_probes,
    generate_matrix,
    simulate_probes,
)
from .errors import PlanOutOfRange, ValidationError
from .model import NetworkConfig, PlanOrigin, SamplingPlan

Z95 = 1.959963984540054
DEFAULT_TAG = "comp-success"
NOT_REACHED = None


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValidationError("Wilson interval needs at least one trial")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class SuccessEstimate:
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, trials: int) -> SuccessEstimate:
        if not (0 <= successes <= trials):
            raise ValidationError(f"{successes} successes out of {trials} trials")
        lo, hi = wilson_interval(successes, trials)
        p = successes / trials
        # rounding in the Wilson formula can leave p a hair outside at p in {0, 1}
        return cls(p, min(lo, p), max(hi, p), trials, successes)

    @property
    def se(self) -> float:
        """Binomial standard error of ``p_hat``."""
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "trials": self.trials,
            "successes": self.successes,
        }


def trial_seed(master_seed: int, tag: str, index: int) -> np.random.SeedSequence:
    """Counter-based per-trial seed: a pure function of its three arguments."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(zlib.crc32(tag.encode()), index))


def _streams(seed) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return tuple(
        np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (s,)) for s in (0, 1)
    )


def run_trial(cfg: NetworkConfig, plan: SamplingPlan, T: int, seed) -> bool:
    """One full discovery round; success means COMP recovers the active set exactly."""
    act_seed, mat_seed = _streams(seed)
    activity = ActivitySet.from_mask(activity_mask(cfg, np.random.default_rng(act_seed)))
    matrix = generate_matrix(cfg, plan, T, mat_seed)
    decoded = comp_decode(matrix, simulate_probes(matrix, activity))
    return decoded.estimated_active == activity.active


_BLOCK = 64


def success_time(cfg: NetworkConfig, plan: SamplingPlan, T_cap: int, seed) -> int | None:
    """Smallest ``T <= T_cap`` for which ``run_trial(cfg, plan, T, seed)`` succeeds.

    Matrices for the same seed are prefixes of one another, and COMP only
    ever clears more sensors as probes are added, so success is monotone in
    ``T``; this walks the probes once, in blocks, and stops as soon as every
    inactive sensor has appeared in a negative probe. ``None`` if that does
    not happen within ``T_cap`` probes.
    """
    act_seed, mat_seed = _streams(seed)
    mask = activity_mask(cfg, np.random.default_rng(act_seed))
    pending = np.flatnonzero(~mask)
    if pending.size == 0:
        return 0
    qs = plan.per_sensor(cfg)
    if np.any(qs[pending] == 0.0):
        return None
    active = np.flatnonzero(mask)
    rng = np.random.default_rng(mat_seed)
    t0 = 0
    while t0 < T_cap:
        B = min(_BLOCK, T_cap - t0)
        block = draw_probes(rng, qs, B)
        negative = ~block[:, active].any(axis=1)
        neg_rows = np.flatnonzero(negative)
        hits = block[neg_rows][:, pending]
        cleared = hits.any(axis=0)
        if cleared.all():
            last = int(hits.argmax(axis=0).max())
            return t0 + int(neg_rows[last]) + 1
        pending = pending[~cleared]
        t0 += B
    return None


_NEVER = np.iinfo(np.int64).max


def _times_chunk(args) -> np.ndarray:
    cfg, plan, T_cap, master_seed, tag, indices = args
    out = np.empty(len(indices), dtype=np.int64)
    for j, i in enumerate(indices):
        t = success_time(cfg, plan, T_cap, trial_seed(master_seed, tag, i))
        out[j] = _NEVER if t is None else t
    return out


def success_times(
    cfg: NetworkConfig,
    plan: SamplingPlan,
    T_cap: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    tag: str = DEFAULT_TAG,
) -> np.ndarray:
    """Per-trial success times (``int64``, unreached trials hold the int64 max)."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if T_cap < 0:
        raise ValidationError(f"T must be non-negative, got {T_cap}")
    plan.check_aligned(cfg)
    workers = max(1, int(workers))
    if workers == 1 or trials < 2 * workers:
        return _times_chunk((cfg, plan, T_cap, master_seed, tag, range(trials)))
    chunks = np.array_split(np.arange(trials), workers * 4)
    jobs = [(cfg, plan, T_cap, master_seed, tag, c.tolist()) for c in chunks if len(c)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(_times_chunk, jobs)))


def _estimate_at(times: np.ndarray, T: int) -> SuccessEstimate:
    return SuccessEstimate.from_counts(int(np.count_nonzero(times <= T)), len(times))


def estimate_success(
    cfg: NetworkConfig,
    plan: SamplingPlan,
    T: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    tag: str = DEFAULT_TAG,
) -> SuccessEstimate:
    times = success_times(cfg, plan, T, trials, master_seed, workers, tag)
    return _estimate_at(times, T)


def _search(p_hat, target: float, T_cap: int) -> int | None:
    # p_hat is non-decreasing in T: double until the target is met, then bisect
    hi = 1
    while p_hat(hi) < target:
        if hi >= T_cap:
            return NOT_REACHED
        hi = min(2 * hi, T_cap)
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if p_hat(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def min_probes_for_target(
    cfg: NetworkConfig,
    plan: SamplingPlan,
    target: float,
    trials: int,
    master_seed: int,
    T_cap: int,
    workers: int = 1,
    tag: str = DEFAULT_TAG,
) -> int | None:
    """Smallest ``T <= T_cap`` whose estimated success probability reaches ``target``.

    Decisions use the point estimate. Returns ``None`` (``NOT_REACHED``) when
    the cap is hit first.
    """
    if not (0.0 < target < 1.0):
        raise ValidationError(f"target must lie in (0, 1), got {target}")
    if T_cap < 1:
        raise ValidationError(f"T_cap must be >= 1, got {T_cap}")
    times = success_times(cfg, plan, T_cap, trials, master_seed, workers, tag)
    return _search(lambda T: np.count_nonzero(times <= T) / trials, target, T_cap)


@dataclass(frozen=True)
class ProbePoint:
    T: int
    estimate: SuccessEstimate


@dataclass(frozen=True)
class QPoint:
    base_q: float
    q: tuple[float, ...]
    target: float
    min_T: int | None

    @property
    def reached(self) -> bool:
        return self.min_T is not None


@dataclass(frozen=True)
class SweepRecord:
    """Ordered sweep results.

    ``variable`` is ``"T"`` (points are :class:`ProbePoint`) or ``"base_q"``
    (points are :class:`QPoint`). ``derived_index`` marks the grid point
    closest to the analytic optimum in a ``base_q`` sweep.
    """

    variable: str
    points: tuple
    trials: int
    master_seed: int
    plan: SamplingPlan | None = None
    derived_base_q: float | None = None
    derived_index: int | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.variable == "T":
            w.writerow(PROBE_HEADER)
            for pt in self.points:
                e = pt.estimate
                w.writerow([pt.T, e.trials, e.successes, repr(e.p_hat), repr(e.ci_low), repr(e.ci_high)])
        else:
            w.writerow(Q_HEADER)
            for pt in self.points:
                w.writerow([
                    repr(pt.base_q),
                    ";".join(repr(x) for x in pt.q),
                    repr(pt.target),
                    "" if pt.min_T is None else pt.min_T,
                    "true" if pt.reached else "false",
                ])
        return buf.getvalue()


PROBE_HEADER = ["T", "trials", "successes", "p_hat", "ci_low", "ci_high"]
Q_HEADER = ["base_q", "q_values", "target", "min_T", "reached"]


def read_sweep_csv(text: str) -> list[dict]:
    """Parse either sweep CSV back into typed rows."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValidationError("empty sweep CSV")
    header, body = rows[0], rows[1:]
    out = []
    if header == PROBE_HEADER:
        for r in body:
            out.append({
                "T": int(r[0]), "trials": int(r[1]), "successes": int(r[2]),
                "p_hat": float(r[3]), "ci_low": float(r[4]), "ci_high": float(r[5]),
            })
    elif header == Q_HEADER:
        for r in body:
            out.append({
                "base_q": float(r[0]),
                "q_values": tuple(float(x) for x in r[1].split(";")),
                "target": float(r[2]),
                "min_T": int(r[3]) if r[3] else None,
                "reached": r[4] == "true",
            })
    else:
        raise ValidationError(f"unrecognised sweep CSV header {header}")
    return out


def _check_grid(grid: Sequence, name: str) -> list:
    grid = list(grid)
    if not grid:
        raise ValidationError(f"{name} grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError(f"{name} grid must be strictly increasing")
    return grid


def sweep_probes(
    cfg: NetworkConfig,
    plan: SamplingPlan,
    T_grid: Sequence[int],
    trials: int,
    master_seed: int,
    workers: int = 1,
    tag: str = DEFAULT_TAG,
) -> SweepRecord:
    """Success probability at each probe count; point ``T`` equals
    ``estimate_success(cfg, plan, T, trials, master_seed)``."""
    grid = _check_grid(T_grid, "T")
    if grid[0] < 0:
        raise ValidationError("probe counts must be non-negative")
    times = success_times(cfg, plan, grid[-1], trials, master_seed, workers, tag)
    points = tuple(ProbePoint(int(T), _estimate_at(times, T)) for T in grid)
    return SweepRecord("T", points, trials, master_seed, plan=plan)


def sweep_q(
    cfg: NetworkConfig,
    base_q_grid: Sequence[float],
    target: float,
    trials: int,
    master_seed: int,
    T_cap: int,
    beta: Sequence[float] | None = None,
    workers: int = 1,
    tag: str = DEFAULT_TAG,
) -> SweepRecord:
    """Minimum probe count for ``target`` at each base sampling probability.

    Cluster ``i`` samples with ``beta[i] * base_q``; ``beta`` defaults to the
    config's energy weights.
    """
    grid = _check_grid(base_q_grid, "base q")
    betas = cfg.betas if beta is None else np.asarray(beta, dtype=float)
    if betas.shape != (cfg.m,):
        raise ValidationError(f"beta needs {cfg.m} entries")
    plans = []
    for base in grid:
        q = betas * base
        if base < 0 or np.any(q >= 1.0):
            raise PlanOutOfRange(f"base q {base!r} gives sampling probabilities {q.tolist()} outside [0, 1)")
        plans.append(SamplingPlan(tuple(q.tolist()), PlanOrigin.BASE_SCALED, float(base)))

    reweighted = NetworkConfig(tuple(replace(c, beta=float(b)) for c, b in zip(cfg.clusters, betas)))
    derived = optimal_base_q(reweighted)
    nearest = int(np.argmin([abs(b - derived) for b in grid]))

    points = []
    for base, plan in zip(grid, plans):
        T = min_probes_for_target(cfg, plan, target, trials, master_seed, T_cap, workers, tag)
        points.append(QPoint(float(base), plan.q, float(target), T))
    return SweepRecord("base_q", tuple(points), trials, master_seed,
                       derived_base_q=derived, derived_index=nearest)
