"""Group-testing engine: Bernoulli test matrices, OR channel, COMP decoding.

Sensor indices are global: cluster ``i`` owns the contiguous block
``cfg.offsets[i]:cfg.offsets[i + 1]``. Matrix rows are sensor signatures,
bit-packed 64 probes per ``uint64`` word (bit ``t % 64`` of word ``t // 64``).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import alpha
from .errors import LengthMismatch, ValidationError
from .model import NetworkConfig, SamplingPlan


def _words(T: int) -> int:
    return max(1, -(-T // 64))


def pack_bits(dense: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(..., T)`` array into ``(..., ceil(T/64))`` uint64 words."""
    dense = np.asarray(dense, dtype=bool)
    T = dense.shape[-1]
    packed = np.packbits(dense, axis=-1, bitorder="little")
    pad = _words(T) * 8 - packed.shape[-1]
    if pad:
        widths = [(0, 0)] * (packed.ndim - 1) + [(0, pad)]
        packed = np.pad(packed, widths)
    return np.ascontiguousarray(packed).view("<u8")


def unpack_bits(words: np.ndarray, T: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, axis=-1, count=T, bitorder="little").astype(bool)


@dataclass(frozen=True, eq=False)
class GTMatrix:
    """``n x T`` binary test schedule; row ``i`` is the signature of sensor ``i``."""

    n: int
    T: int
    words: np.ndarray
    cluster_of: np.ndarray | None = None

    def __post_init__(self):
        if self.words.shape != (self.n, _words(self.T)):
            raise ValidationError(f"packed rows have shape {self.words.shape}, expected ({self.n}, {_words(self.T)})")
        if self.cluster_of is not None and len(self.cluster_of) != self.n:
            raise ValidationError("cluster_of must name a cluster for every sensor")
        self.words.setflags(write=False)

    @classmethod
    def from_dense(cls, rows: np.ndarray, cluster_of: np.ndarray | None = None) -> GTMatrix:
        rows = np.asarray(rows, dtype=bool)
        n, T = rows.shape
        return cls(n, T, pack_bits(rows), cluster_of)

    def dense(self) -> np.ndarray:
        """Unpacked ``(n, T)`` boolean view of the rows."""
        return unpack_bits(self.words, self.T)

    def truncate(self, T: int) -> GTMatrix:
        """Keep the first ``T`` probes."""
        if not (0 <= T <= self.T):
            raise ValidationError(f"cannot truncate {self.T} probes to {T}")
        return GTMatrix.from_dense(self.dense()[:, :T], self.cluster_of)

    def __eq__(self, other):
        if not isinstance(other, GTMatrix):
            return NotImplemented
        return self.n == other.n and self.T == other.T and np.array_equal(self.words, other.words)

    def dumps(self) -> str:
        """Text form: header ``n T``, then one line of 0/1 characters per sensor."""
        lines = [f"{self.n} {self.T}"]
        for row in self.dense():
            lines.append("".join("1" if b else "0" for b in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> GTMatrix:
        lines = text.split()
        if len(lines) < 2:
            raise ValidationError("matrix dump needs an 'n T' header")
        try:
            n, T = int(lines[0]), int(lines[1])
        except ValueError:
            raise ValidationError("matrix dump header must be two integers") from None
        body = lines[2:]
        if len(body) != n:
            raise ValidationError(f"matrix dump declares {n} rows but has {len(body)}")
        if T == 0:
            return cls(n, 0, np.zeros((n, 1), dtype="<u8"))
        rows = np.zeros((n, T), dtype=bool)
        for i, line in enumerate(body):
            if len(line) != T or set(line) - {"0", "1"}:
                raise ValidationError(f"matrix dump row {i} is not {T} 0/1 characters")
            rows[i] = np.frombuffer(line.encode(), dtype=np.uint8) == ord("1")
        return cls.from_dense(rows)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> GTMatrix:
        return cls.loads(Path(path).read_text())


@dataclass(frozen=True)
class ActivitySet:
    active: frozenset[int]
    n: int

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.active)] = True
        return m

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> ActivitySet:
        return cls(frozenset(np.flatnonzero(mask).tolist()), len(mask))


@dataclass(frozen=True, eq=False)
class ResultsVector:
    y: np.ndarray  # bool, length T

    def __eq__(self, other):
        if not isinstance(other, ResultsVector):
            return NotImplemented
        return np.array_equal(self.y, other.y)

    @classmethod
    def parse(cls, bits: str) -> ResultsVector:
        bits = bits.strip()
        if set(bits) - {"0", "1"}:
            raise ValidationError("results vector must be a string of 0/1 characters")
        return cls(np.array([b == "1" for b in bits], dtype=bool))

    def __str__(self):
        return "".join("1" if b else "0" for b in self.y)


@dataclass(frozen=True)
class DecodeResult:
    estimated_active: frozenset[int]
    negative_probe_count: int


def draw_probes(rng: np.random.Generator, q_per_sensor: np.ndarray, T: int) -> np.ndarray:
    """``(T, n)`` boolean block of Bernoulli inclusions, one probe per row.

    Probes are drawn in order, so two calls of sizes ``T1`` and ``T2`` consume
    the stream exactly as one call of size ``T1 + T2``.
    """
    return rng.random((T, len(q_per_sensor))) < q_per_sensor


def generate_matrix(cfg: NetworkConfig, plan: SamplingPlan, T: int, seed) -> GTMatrix:
    """Each entry of row ``i`` is an independent Bernoulli(q of ``i``'s cluster) draw."""
    if T < 0:
        raise ValidationError(f"T must be non-negative, got {T}")
    qs = plan.per_sensor(cfg)
    rng = np.random.default_rng(seed)
    probes = draw_probes(rng, qs, T)
    return GTMatrix.from_dense(probes.T, cfg.cluster_of)


def activity_mask(cfg: NetworkConfig, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros(cfg.n_total, dtype=bool)
    if cfg.is_fixed:
        for c, start in zip(cfg.clusters, cfg.offsets[:-1].tolist()):
            # partial Fisher-Yates: the first k slots end up a uniform k-subset
            idx = np.arange(c.n)
            for t in range(c.activity.k):
                j = int(rng.integers(t, c.n))
                idx[t], idx[j] = idx[j], idx[t]
            mask[start + idx[: c.activity.k]] = True
    else:
        mask[:] = rng.random(cfg.n_total) < cfg.ps[cfg.cluster_index]
    return mask


def sample_activity(cfg: NetworkConfig, seed) -> ActivitySet:
    """Ground-truth active set: a uniform ``k_i``-subset per cluster (fixed) or
    independent Bernoulli(``p_i``) activity per sensor (random)."""
    return ActivitySet.from_mask(activity_mask(cfg, np.random.default_rng(seed)))


def simulate_probes(matrix: GTMatrix, activity: ActivitySet) -> ResultsVector:
    """Noiseless OR channel: probe ``t`` is positive iff some active sensor took part."""
    idx = sorted(activity.active)
    if idx and idx[-1] >= matrix.n:
        raise ValidationError(f"active sensor {idx[-1]} outside matrix with {matrix.n} rows")
    if not idx:
        return ResultsVector(np.zeros(matrix.T, dtype=bool))
    ored = np.bitwise_or.reduce(matrix.words[idx], axis=0)
    return ResultsVector(unpack_bits(ored, matrix.T))


def comp_decode(matrix: GTMatrix, y: ResultsVector) -> DecodeResult:
    """COMP: every participant of a negative probe is inactive, everyone else active.

    Sensors that take part in no probe at all are never cleared and so are
    reported active.
    """
    if len(y.y) != matrix.T:
        raise LengthMismatch(f"results vector has {len(y.y)} bits, matrix has {matrix.T} probes")
    negatives = pack_bits(~y.y) if matrix.T else np.zeros(1, dtype="<u8")
    cleared = np.any(matrix.words & negatives, axis=1)
    estimate = frozenset(np.flatnonzero(~cleared).tolist())
    return DecodeResult(estimate, int(np.count_nonzero(~y.y)))


def shadow_probability_fixed(plan: SamplingPlan, cfg: NetworkConfig, j: int, T: int) -> float:
    """Probability that a given inactive sensor of cluster position ``j`` is never
    in a negative probe: ``(1 - q_j * alpha)**T``."""
    if T < 0:
        raise ValidationError(f"T must be non-negative, got {T}")
    if not (0 <= j < cfg.m):
        raise ValidationError(f"cluster position {j} out of range")
    a = alpha(plan, cfg)
    return float(np.exp(T * np.log1p(-plan.q[j] * a))) if T else 1.0
