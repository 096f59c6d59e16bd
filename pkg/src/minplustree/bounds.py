"""Closed-form bound models for the survival curve and numeric certifiers.

The one-level survival update is the map

    v'[k] = f(v[1], ..., v[k]),
    f(x_1, ..., x_k) = x_k + (1/2) * sum_{l=1}^{k-1} (x_l - x_{l+1}) * (x_{k-l} - x_k),

whose partial derivatives are nonnegative on the set of nonincreasing
vectors in [0, 1].  Any array that satisfies the update as an inequality
(>= for domination, <= for minorization) therefore sandwiches the true
survival curve.  This module evaluates the closed-form candidate arrays
and certifies those inequalities numerically on finite (N, k) grids.
Certifiers never raise on a violated inequality: the inequalities only
hold for N large, so the empirical onset is data, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .distribution import CRITICAL_C, SurvivalCurve, _convolve

_MONO_SLACK = 1e-12

RangeLike = Union[int, Tuple[int, int]]


# ---------------------------------------------------------------------------
# the recurrence functional


def f_eval(x: Sequence[float]) -> float:
    """Value of the one-level update functional at the vector x (x[0] is x_1)."""
    x = np.asarray(x, dtype=float)
    k = x.size
    if k < 1:
        raise ValueError("need at least one coordinate")
    if k == 1:
        return float(x[0])
    diff = x[:-1] - x[1:]
    rev = x[k - 2 :: -1]  # x_{k-l} for l = 1..k-1
    return float(x[-1] + 0.5 * np.dot(diff, rev - x[-1]))


def f_grad(x: Sequence[float]) -> np.ndarray:
    """Closed-form gradient: entry j < k is x_{k-j} - x_{k-j+1}, entry k is 1 - x_1 + x_k."""
    x = np.asarray(x, dtype=float)
    k = x.size
    if k < 1:
        raise ValueError("need at least one coordinate")
    g = np.empty(k)
    g[-1] = 1.0 - x[0] + x[-1]
    if k > 1:
        g[:-1] = (x[:-1] - x[1:])[::-1]
    return g


# ---------------------------------------------------------------------------
# constant sequences


def b_sequence(K: int) -> np.ndarray:
    """Sequence with b_1 = 0 and b_k = 1 + sqrt(1 + d_k), where d_k is the
    running correlation of increments with earlier terms:
    d_k = sum_{j=1}^{k-2} (b_{j+1} - b_j) * b_{k-j}.

    Returned 1-indexed: out[k] is b_k, out[0] is padding.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    b = np.zeros(K + 1)
    for k in range(2, K + 1):
        d = float(np.dot(b[2:k] - b[1 : k - 1], b[k - 1 : 1 : -1]))
        b[k] = 1.0 + math.sqrt(1.0 + d)
    return b


def a_sequence(K: int) -> np.ndarray:
    """Identical recursion to :func:`b_sequence`; kept as a distinct export
    because the lower-bound construction names it separately."""
    return b_sequence(K)


# ---------------------------------------------------------------------------
# closed-form models


@dataclass(frozen=True)
class UpperModel:
    """Two-branch dominating array.

    q_{N,k} = 1 - log(k)^2 / (N C)                        while log k < t(N),
    q_{N,k} = (2 b sqrt(N C + b^2) - 2 b^2) / (N C)
              * exp(-(log k - t(N)) / b)                  otherwise,

    with junction t(N) = sqrt(N C + b^2) - b, written b for ``beta``.  The
    two branches agree at the junction.  Domination of the true survival
    curve is guaranteed (for N shifted by some offset) when C exceeds the
    critical constant and beta > 1; the class accepts other parameters so
    violations can be scanned deliberately.
    """

    C: float
    beta: float
    n0: int = 0

    def __post_init__(self) -> None:
        if self.C <= 0.0 or self.beta <= 0.0:
            raise ValueError("C and beta must be positive")
        if self.n0 < 0:
            raise ValueError("n0 must be >= 0")

    @property
    def in_guaranteed_regime(self) -> bool:
        return self.C > CRITICAL_C and self.beta > 1.0

    def threshold(self, N: int) -> float:
        """log-k junction between the two branches at level N."""
        return math.sqrt(N * self.C + self.beta**2) - self.beta


def upper_model_smooth(m: UpperModel, N: int, log_k: float) -> float:
    """First-branch formula 1 - log(k)^2 / (N C), regardless of the junction."""
    return 1.0 - log_k**2 / (N * m.C)


def upper_model_tail(m: UpperModel, N: int, log_k: float) -> float:
    """Second-branch formula, exponential decay beyond the junction."""
    t = m.threshold(N)
    coef = (2.0 * m.beta * math.sqrt(N * m.C + m.beta**2) - 2.0 * m.beta**2) / (N * m.C)
    return coef * math.exp(-(log_k - t) / m.beta)


def upper_model_values(m: UpperModel, N: int, k_max: int) -> np.ndarray:
    """q_{N,k} for k = 1..k_max, 1-indexed padded (out[0] = 1)."""
    if N < 1 or k_max < 1:
        raise ValueError("N and k_max must be >= 1")
    logk = np.zeros(k_max + 1)
    logk[1:] = np.log(np.arange(1, k_max + 1, dtype=float))
    t = m.threshold(N)
    smooth = 1.0 - logk**2 / (N * m.C)
    coef = (2.0 * m.beta * math.sqrt(N * m.C + m.beta**2) - 2.0 * m.beta**2) / (N * m.C)
    tail = coef * np.exp(np.minimum(-(logk - t) / m.beta, 0.0))
    out = np.where(logk < t, smooth, tail)
    out[0] = 1.0
    return out


def upper_model_eval(m: UpperModel, N: int, k: int) -> float:
    """Scalar q_{N,k}; branch chosen by log k against the junction."""
    if N < 1 or k < 1:
        raise ValueError("N and k must be >= 1")
    log_k = math.log(k)
    if log_k < m.threshold(N):
        return upper_model_smooth(m, N, log_k)
    return upper_model_tail(m, N, log_k)


@dataclass(frozen=True)
class LowerStepModel:
    """Three-branch minorizing array, optionally with extra step bands.

    q_{N,k} = 1 - b_k / N                       for k < K,
    q_{N,k} = 1 - log(k)^2 / (N c)              for k >= K while log k < sqrt(N c),
    q_{N,k} = 0                                 for k >= K, log k >= sqrt(N c).

    ``b`` is 1-indexed padded and must cover k = 1..K-1; if it also carries
    slot K, the junction gap b_K - log(K)^2 / c is exposed for inspection.
    ``steps`` are additional (threshold, c_r) bands with ascending
    thresholds above K; inside a band the middle branch uses that band's
    constant.  Step models jump upward at thresholds, so they are not
    monotone there; the certifier reports that rather than failing.
    """

    b: np.ndarray
    K: int
    c: float
    steps: Tuple[Tuple[int, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        b = np.ascontiguousarray(self.b, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "steps", tuple((int(t), float(c)) for t, c in self.steps))
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if self.c <= 0.0:
            raise ValueError("c must be positive")
        if b.size < self.K:
            raise ValueError("b must cover k = 1..K-1 (1-indexed padded)")
        head = b[1 : self.K]
        if head.size and (head.min() < 0.0 or np.any(np.diff(head) < -_MONO_SLACK)):
            raise ValueError("b must be nonnegative and nondecreasing below K")
        prev = self.K
        for threshold, c_r in self.steps:
            if threshold <= prev:
                raise ValueError("step thresholds must ascend above K")
            if c_r <= 0.0:
                raise ValueError("step constants must be positive")
            prev = threshold

    @property
    def junction_gap(self) -> float:
        """b_K - log(K)^2 / c when b carries slot K, else nan."""
        if self.b.size <= self.K:
            return math.nan
        return float(self.b[self.K] - math.log(self.K) ** 2 / self.c)

    def band_constant(self, k: int) -> float:
        c_band = self.c
        for threshold, c_r in self.steps:
            if k >= threshold:
                c_band = c_r
            else:
                break
        return c_band


def lower_model_values(m: LowerStepModel, N: int, k_max: int) -> np.ndarray:
    """q_{N,k} for k = 1..k_max, 1-indexed padded (out[0] = 1).

    Values are the raw branch formulas; for small N the head branch can dip
    below zero, which the certifier reports through its validity check.
    """
    if N < 1 or k_max < 1:
        raise ValueError("N and k_max must be >= 1")
    out = np.ones(k_max + 1)
    head_hi = min(m.K - 1, k_max)
    if head_hi >= 1:
        out[1 : head_hi + 1] = 1.0 - m.b[1 : head_hi + 1] / N
    if k_max >= m.K:
        kk = np.arange(m.K, k_max + 1, dtype=float)
        logk = np.log(kk)
        c_band = np.full(kk.size, m.c)
        for threshold, c_r in m.steps:
            c_band[kk >= threshold] = c_r
        vals = 1.0 - logk**2 / (c_band * N)
        vals[logk >= np.sqrt(N * c_band)] = 0.0
        out[m.K :] = vals
    out[0] = 1.0
    return out


def lower_model_eval(m: LowerStepModel, N: int, k: int) -> float:
    if N < 1 or k < 1:
        raise ValueError("N and k must be >= 1")
    if k < m.K:
        return 1.0 if k == 1 else float(1.0 - m.b[k] / N)
    c_band = m.band_constant(k)
    log_k = math.log(k)
    if log_k >= math.sqrt(N * c_band):
        return 0.0
    return 1.0 - log_k**2 / (c_band * N)


def lower_model_validity(m: LowerStepModel, N: int, k_max: int) -> Optional[Tuple[int, float]]:
    """First k where the array fails to be a survival curve at level N, or None.

    Checks 0 <= q_{N,k} <= q_{N,k-1} <= 1.
    """
    q = lower_model_values(m, N, k_max)
    bad_range = (q[1:] < -_MONO_SLACK) | (q[1:] > 1.0 + _MONO_SLACK)
    bad_mono = np.zeros(k_max, dtype=bool)
    bad_mono[1:] = np.diff(q[1:]) > _MONO_SLACK
    bad = bad_range | bad_mono
    idx = np.flatnonzero(bad)
    if idx.size == 0:
        return None
    k = int(idx[0]) + 1
    return k, float(q[k])


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertificateReport:
    """Residuals of a one-level recurrence inequality over an (N, k) grid.

    ``min_margin`` is the smallest residual; the inequality holds on the
    grid iff it is nonnegative, in which case ``first_violation`` is None.
    """

    checked_n: Tuple[int, int]
    checked_k: Tuple[int, int]
    min_margin: float
    first_violation: Optional[Tuple[int, int, float]]
    n_violations: int
    gamma_estimate: Optional[float] = None
    curve_valid: bool = True
    first_invalid_curve: Optional[Tuple[int, int, float]] = None
    residuals: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if (self.first_violation is None) != (self.min_margin >= 0.0):
            raise ValueError("first_violation must be present iff min_margin < 0")

    @property
    def passed(self) -> bool:
        return self.min_margin >= 0.0

    def to_json_dict(self) -> dict:
        out = {
            "checked_n": list(self.checked_n),
            "checked_k": list(self.checked_k),
            "min_margin": self.min_margin,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "n_violations": self.n_violations,
            "gamma_estimate": self.gamma_estimate,
            "curve_valid": self.curve_valid,
            "first_invalid_curve": (
                list(self.first_invalid_curve) if self.first_invalid_curve else None
            ),
        }
        if self.residuals is not None:
            out["grid_shape"] = list(self.residuals.shape)
            out["residuals"] = [[float(x) for x in row] for row in self.residuals]
        return out


def recurrence_rhs(q: np.ndarray) -> np.ndarray:
    """(1/2) sum_{l=1}^{k-1} (q_l - q_{l+1}) (q_{k-l} - q_k) for every k at once.

    The cross term sum_l (q_l - q_{l+1}) q_{k-l} is a linear convolution of
    the increment sequence with the values, so the whole column costs
    O(K log K).
    """
    K = q.size - 1
    rhs = np.zeros(K + 1)
    if K < 2:
        return rhs
    d = q[1:K] - q[2 : K + 1]
    conv = _convolve(d, q[1:])
    kk = np.arange(2, K + 1)
    rhs[kk] = 0.5 * (conv[kk - 2] - q[kk] * (q[1] - q[kk]))
    return rhs


def _norm_range(r: RangeLike, lo_default: int = 1) -> Tuple[int, int]:
    if isinstance(r, int):
        return lo_default, r
    lo, hi = int(r[0]), int(r[1])
    if lo > hi:
        raise ValueError(f"empty range {r}")
    return lo, hi


def _certify(
    values_at,
    n_range: RangeLike,
    k_range: RangeLike,
    direction: int,
    keep_grid: bool,
    model1_mask=None,
    validity_at=None,
) -> CertificateReport:
    n_lo, n_hi = _norm_range(n_range)
    k_lo, k_hi = _norm_range(k_range)
    if n_lo < 1 or k_lo < 1:
        raise ValueError("ranges must start at 1 or above")

    min_margin = math.inf
    first_violation = None
    n_violations = 0
    gamma = math.inf
    saw_model1 = False
    curve_valid = True
    first_invalid = None
    grid = np.empty((n_hi - n_lo + 1, k_hi - k_lo + 1)) if keep_grid else None

    q = values_at(n_lo, k_hi)
    for N in range(n_lo, n_hi + 1):
        q_next = values_at(N + 1, k_hi)
        res = direction * ((q_next - q) - recurrence_rhs(q))
        col = res[k_lo : k_hi + 1]
        if grid is not None:
            grid[N - n_lo] = col
        m = float(col.min())
        if m < min_margin:
            min_margin = m
        bad = np.flatnonzero(col < 0.0)
        n_violations += bad.size
        if bad.size and first_violation is None:
            k = int(bad[0]) + k_lo
            first_violation = (N, k, float(col[bad[0]]))
        if model1_mask is not None:
            mask = model1_mask(N, k_lo, k_hi)
            if mask.any():
                saw_model1 = True
                kk = np.arange(k_lo, k_hi + 1, dtype=float)[mask]
                ratios = col[mask] * N**2 / np.log(kk) ** 2
                gamma = min(gamma, float(ratios.min()))
        if validity_at is not None and curve_valid:
            invalid = validity_at(N, k_hi)
            if invalid is not None:
                curve_valid = False
                first_invalid = (N, invalid[0], invalid[1])
        q = q_next

    return CertificateReport(
        checked_n=(n_lo, n_hi),
        checked_k=(k_lo, k_hi),
        min_margin=min_margin + 0.0,  # fold -0.0 into +0.0
        first_violation=first_violation,
        n_violations=n_violations,
        gamma_estimate=(gamma if saw_model1 else None),
        curve_valid=curve_valid,
        first_invalid_curve=first_invalid,
        residuals=grid,
    )


def certify_upper(
    m: UpperModel,
    n_range: RangeLike,
    k_range: RangeLike,
    keep_grid: bool = False,
) -> CertificateReport:
    """Residuals of the domination inequality

        q_{N+1,k} - q_{N,k} >= (1/2) sum_l (q_{N,l} - q_{N,l+1}) (q_{N,k-l} - q_{N,k})

    on the grid.  Where the whole column k sits in the first branch (log k
    below the junction at N), residual * N^2 / log(k)^2 is also tracked and
    its infimum reported as an empirical stand-in for the breathing-room
    coefficient, which the analysis guarantees positive above the critical
    constant but never exhibits.
    """

    def model1_mask(N: int, k_lo: int, k_hi: int) -> np.ndarray:
        kk = np.arange(k_lo, k_hi + 1, dtype=float)
        logk = np.log(kk)
        return (logk < m.threshold(N)) & (kk >= 2.0)

    return _certify(
        lambda N, k_hi: upper_model_values(m, N, k_hi),
        n_range,
        k_range,
        direction=+1,
        keep_grid=keep_grid,
        model1_mask=model1_mask,
    )


def certify_lower(
    m: LowerStepModel,
    n_range: RangeLike,
    k_range: RangeLike,
    keep_grid: bool = False,
) -> CertificateReport:
    """Residuals of the minorization inequality (the domination inequality
    reversed), plus a validity check that the model array is a survival
    curve (in [0, 1] and nonincreasing) at each scanned level."""
    return _certify(
        lambda N, k_hi: lower_model_values(m, N, k_hi),
        n_range,
        k_range,
        direction=-1,
        keep_grid=keep_grid,
        validity_at=lambda N, k_hi: lower_model_validity(m, N, k_hi),
    )


# ---------------------------------------------------------------------------
# sandwich against the exact curve


@dataclass(frozen=True)
class SandwichReport:
    level: int
    upper_shift: int
    lower_shift: int
    checked_k: int
    upper_violations: int
    lower_violations: int
    first_upper_violation: Optional[Tuple[int, float, float]]
    first_lower_violation: Optional[Tuple[int, float, float]]

    @property
    def passed(self) -> bool:
        return self.upper_violations == 0 and self.lower_violations == 0

    def to_json_dict(self) -> dict:
        return {
            "level": self.level,
            "upper_shift": self.upper_shift,
            "lower_shift": self.lower_shift,
            "checked_k": self.checked_k,
            "upper_violations": self.upper_violations,
            "lower_violations": self.lower_violations,
            "first_upper_violation": (
                list(self.first_upper_violation) if self.first_upper_violation else None
            ),
            "first_lower_violation": (
                list(self.first_lower_violation) if self.first_lower_violation else None
            ),
        }


def sandwich_check(
    N: int,
    upper: UpperModel,
    lower: LowerStepModel,
    exact: SurvivalCurve,
    upper_shift: Optional[int] = None,
    lower_shift: int = 0,
    tol: float = 1e-12,
) -> SandwichReport:
    """Check lower(N - lower_shift, k) <= exact <= upper(N + upper_shift, k)
    for every k on the exact curve's support."""
    if exact.level != N:
        raise ValueError(f"exact curve is at level {exact.level}, not {N}")
    shift_up = upper.n0 if upper_shift is None else upper_shift
    if N - lower_shift < 1:
        raise ValueError("lower_shift pushes the level below 1")
    k_hi = exact.k_max
    up = upper_model_values(upper, N + shift_up, k_hi)
    lo = lower_model_values(lower, N - lower_shift, k_hi)
    truth = exact.values

    over = np.flatnonzero(truth[1:] > up[1:] + tol)
    under = np.flatnonzero(truth[1:] < lo[1:] - tol)
    first_up = None
    if over.size:
        k = int(over[0]) + 1
        first_up = (k, float(truth[k]), float(up[k]))
    first_lo = None
    if under.size:
        k = int(under[0]) + 1
        first_lo = (k, float(truth[k]), float(lo[k]))
    return SandwichReport(
        level=N,
        upper_shift=shift_up,
        lower_shift=lower_shift,
        checked_k=k_hi,
        upper_violations=int(over.size),
        lower_violations=int(under.size),
        first_upper_violation=first_up,
        first_lower_violation=first_lo,
    )
