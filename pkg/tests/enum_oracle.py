"""Brute-force rational oracle for small trees.

Enumerates every sign assignment of the internal nodes of a complete
binary tree of the given depth and accumulates the exact distribution of
the root value in rational arithmetic.  Depth 4 already means 2^7 = 128
assignments; this is only meant for depth <= 5.
"""

from fractions import Fraction
from itertools import product
from typing import Dict


def enumerate_pmf(depth: int, p_plus: Fraction) -> Dict[int, Fraction]:
    """Exact distribution of the root value, keyed by value."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n_leaves = 2 ** (depth - 1)
    n_internal = n_leaves - 1
    if n_internal == 0:
        return {1: Fraction(1)}
    pmf: Dict[int, Fraction] = {}
    for signs in product((True, False), repeat=n_internal):
        level = [1] * n_leaves
        idx = 0
        while len(level) > 1:
            merged = []
            for i in range(0, len(level), 2):
                a, b = level[i], level[i + 1]
                merged.append(a + b if signs[idx] else min(a, b))
                idx += 1
            level = merged
        n_plus = sum(signs)
        weight = p_plus**n_plus * (1 - p_plus) ** (n_internal - n_plus)
        pmf[level[0]] = pmf.get(level[0], Fraction(0)) + weight
    return pmf


def enumerate_survival(depth: int, p_plus: Fraction) -> Dict[int, Fraction]:
    """Exact survival values P(root >= k) for k = 1 .. 2^(depth-1)."""
    pmf = enumerate_pmf(depth, p_plus)
    out: Dict[int, Fraction] = {}
    for k in range(1, 2 ** (depth - 1) + 1):
        out[k] = sum((w for v, w in pmf.items() if v >= k), Fraction(0))
    return out
