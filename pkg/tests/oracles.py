"""Independent reference computations used as test oracles.

Nothing here calls into the package's bound or simulation code.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from scipy.stats import binom


def exact_alpha(q, k):
    out = Fraction(1)
    for qi, ki in zip(q, k):
        out *= (1 - Fraction(qi)) ** ki
    return out


def exact_union_fixed(q, n, k, T):
    """Direct-power evaluation in rational arithmetic."""
    a = exact_alpha(q, k)
    return sum((ni - ki) * (1 - Fraction(qi) * a) ** T for qi, ni, ki in zip(q, n, k))


def direct_union_random(q, n, p, T):
    g = math.prod((1 - pi * qi) ** ni for qi, ni, pi in zip(q, n, p))
    return sum(ni * (1 - pi) * (1 - qi * g / (1 - pi * qi)) ** T for qi, ni, pi in zip(q, n, p))


def success_given_counts(q, n, a, T):
    """P(COMP exact) with ``a[j]`` active sensors in cluster ``j``.

    Probes are negative independently with probability prod (1-q_r)^a_r, and
    given a negative probe each inactive sensor of cluster j is in it with
    probability q_j, independently. Success needs every inactive sensor in at
    least one negative probe.
    """
    neg = math.prod((1 - qi) ** ai for qi, ai in zip(q, a))
    total = 0.0
    for N in range(T + 1):
        w = binom.pmf(N, T, neg)
        if w == 0.0:
            continue
        s = 1.0
        for qi, ni, ai in zip(q, n, a):
            s *= (1 - (1 - qi) ** N) ** (ni - ai)
        total += w * s
    return total


def exact_success_fixed(q, n, k, T):
    return success_given_counts(q, n, k, T)


def exact_success_random(q, n, p, T, mass=1e-12):
    supports = []
    for ni, pi in zip(n, p):
        counts = [a for a in range(ni + 1) if binom.pmf(a, ni, pi) > mass]
        supports.append([(a, binom.pmf(a, ni, pi)) for a in counts])
    total = 0.0
    for combo in itertools.product(*supports):
        w = math.prod(c[1] for c in combo)
        total += w * success_given_counts(q, n, [c[0] for c in combo], T)
    return total


def linear_min_T(f, epsilon, start=1, limit=100_000):
    for T in range(start, limit):
        if f(T) <= epsilon:
            return T
    raise AssertionError("linear scan did not terminate")


def comp_bruteforce(rows, y):
    """COMP straight from the definition on a list of 0/1 strings."""
    est = set()
    for i, row in enumerate(rows):
        if not any(row[t] == "1" and y[t] == "0" for t in range(len(y))):
            est.add(i)
    return est


def or_channel_bruteforce(rows, active, T):
    return "".join("1" if any(rows[i][t] == "1" for i in active) else "0" for t in range(T))
