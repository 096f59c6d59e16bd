"""Exact level-by-level evolution of the min/plus tree root distribution.

A depth-N complete binary tree carries the value 1 at every leaf; each
internal node independently applies addition (probability ``p_plus``) or
minimum (probability ``1 - p_plus``) to its children's values.  The root
value therefore satisfies a distributional recurrence: level N+1 is the
p-mixture of the sum and the minimum of two independent copies of level N.

This module evolves that recurrence exactly in 64-bit floats, in both
probability-mass and survival-curve form, with controlled truncation of
the support.  All arrays are indexed by value: slot ``k`` holds the
quantity for mass value ``k``; slot 0 is padding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, TextIO, Union

import numpy as np
from scipy.signal import fftconvolve

# Scaling constant of the critical (p = 1/2) mixture: log X_N lives on the
# scale sqrt(CRITICAL_C * N).
CRITICAL_C = math.pi ** 2 / 3

NORM_EPS = 1e-9          # tolerance for sum(probs) + tail_mass == 1
DIRECT_CONV_MAX = 4096   # direct O(K^2) convolution at or below this size
_CLAMP_FLOOR = -1e-12    # FFT round-off more negative than this is a bug
_MONO_SLACK = 1e-12      # float slack when validating monotone curves


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Linear convolution: direct for short inputs, FFT-based above the cutoff."""
    if max(a.size, b.size) <= DIRECT_CONV_MAX:
        return np.convolve(a, b)
    return fftconvolve(a, b)


def _clamp_probabilities(arr: np.ndarray) -> np.ndarray:
    """Zero out tiny FFT round-off negatives; anything larger is a bug."""
    lo = arr.min()
    if lo < _CLAMP_FLOOR:
        raise ArithmeticError(f"convolution round-off {lo:.3e} below {_CLAMP_FLOOR:.0e}")
    if lo < 0.0:
        np.clip(arr, 0.0, None, out=arr)
    return arr


def default_growth_rule(level: int) -> int:
    """Support cap per level: min(2^(level-1), ceil(exp(2.5*sqrt(c*level)))).

    The first branch is the exact support bound, the second tracks the upper
    edge of the critical log-scale with a 2.5x safety factor so the lumped
    tail stays negligible at desk scale.  Floor of 2 keeps the cap valid.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    exact = 2 ** (level - 1)
    exponent = 2.5 * math.sqrt(CRITICAL_C * level)
    if exponent < math.log(exact if exact > 0 else 1) or exponent < 700:
        scaled = math.ceil(math.exp(min(exponent, 700.0)))
    else:  # pragma: no cover - astronomically deep trees
        scaled = exact
    return max(2, min(exact, scaled))


@dataclass(frozen=True)
class TruncationPolicy:
    """How the support is capped while evolving.

    ``k_max`` is a fixed cap unless ``growth_rule`` is given, in which case
    the cap is ``growth_rule(level)`` per level.  ``tail_mode`` is either
    ``"lump"`` (mass above the cap is conserved as a scalar) or ``"drop"``
    (mass above the cap is discarded and the rest renormalized).
    """

    k_max: Optional[int] = None
    tail_mode: str = "lump"
    growth_rule: Optional[Callable[[int], int]] = None

    def __post_init__(self) -> None:
        if self.tail_mode not in ("lump", "drop"):
            raise ValueError(f"unknown tail_mode {self.tail_mode!r}")
        if self.k_max is None and self.growth_rule is None:
            raise ValueError("need k_max or growth_rule")
        if self.k_max is not None and self.k_max < 2:
            raise ValueError("k_max must be >= 2")

    @classmethod
    def auto(cls, tail_mode: str = "lump") -> "TruncationPolicy":
        return cls(k_max=None, tail_mode=tail_mode, growth_rule=default_growth_rule)

    def cap_for(self, level: int) -> int:
        if self.growth_rule is not None:
            cap = int(self.growth_rule(level))
        else:
            cap = int(self.k_max)  # type: ignore[arg-type]
        if cap < 2:
            raise ValueError(f"cap {cap} at level {level} is below 2")
        return cap


@dataclass(frozen=True)
class MassFunction:
    """Probability mass of the root value on {1, ..., k_max} plus lumped tail.

    ``probs[k]`` is P(X = k) for k = 1..k_max; ``probs[0]`` is padding and
    always zero.  ``tail_mass`` is the probability of values above ``k_max``
    kept as a scalar, so normalization is exact by construction.
    """

    probs: np.ndarray
    tail_mass: float
    level: int
    p_plus: float
    k_min: int = 1

    def __post_init__(self) -> None:
        probs = np.ascontiguousarray(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size < 3:
            raise ValueError("probs must be a 1-d array covering k_max >= 2")
        if probs[0] != 0.0:
            raise ValueError("probs[0] is padding and must be 0")
        if self.k_min != 1:
            raise ValueError("mass values start at 1")
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if not 0.0 <= self.p_plus <= 1.0:
            raise ValueError("p_plus must be a probability")
        if probs.min() < 0.0 or self.tail_mass < 0.0:
            raise ValueError("negative probability entry")
        total = float(probs.sum()) + self.tail_mass
        if abs(total - 1.0) > NORM_EPS:
            raise ValueError(f"mass not normalized: sum+tail = {total!r}")
        if self.level == 1 and (probs[1] != 1.0 or self.tail_mass != 0.0):
            raise ValueError("level 1 must be a point mass at k = 1")

    @property
    def k_max(self) -> int:
        return self.probs.size - 1

    def survival(self) -> "SurvivalCurve":
        """Survival view: values[k] = P(X >= k) including the lumped tail."""
        vals = np.empty(self.k_max + 1)
        vals[0] = 1.0
        vals[1:] = np.cumsum(self.probs[:0:-1])[::-1] + self.tail_mass
        return SurvivalCurve(values=vals, tail_floor=self.tail_mass, level=self.level)

    def to_json_dict(self) -> dict:
        return {
            "level": self.level,
            "p_plus": self.p_plus,
            "k_max": self.k_max,
            "tail_mass": self.tail_mass,
            "probs": [float(x) for x in self.probs[1:]],
        }


@dataclass(frozen=True)
class SurvivalCurve:
    """values[k] = P(X >= k) for k = 1..k_max; values[0] is padding (1.0).

    ``tail_floor`` is the value assigned beyond the cap, i.e. P(X > k_max).
    """

    values: np.ndarray
    tail_floor: float
    level: int

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("values must cover at least k = 1")
        if abs(vals[1] - 1.0) > NORM_EPS:
            raise ValueError("P(X >= 1) must be 1")
        if vals.min() < -_MONO_SLACK or vals.max() > 1.0 + NORM_EPS:
            raise ValueError("survival values outside [0, 1]")
        if np.any(np.diff(vals[1:]) > _MONO_SLACK):
            raise ValueError("survival values must be nonincreasing")
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if not -_MONO_SLACK <= self.tail_floor <= vals[-1] + _MONO_SLACK:
            raise ValueError("tail_floor must sit below the last survival value")

    @property
    def k_max(self) -> int:
        return self.values.size - 1

    def to_pmf(self, p_plus: float) -> MassFunction:
        """Mass view: probs[k] = values[k] - values[k+1], tail = tail_floor."""
        probs = np.zeros(self.k_max + 1)
        probs[1:-1] = self.values[1:-1] - self.values[2:]
        probs[-1] = self.values[-1] - self.tail_floor
        np.clip(probs, 0.0, None, out=probs)
        return MassFunction(
            probs=probs,
            tail_mass=max(self.tail_floor, 0.0),
            level=self.level,
            p_plus=p_plus,
        )


def point_mass_initial(p_plus: float = 0.5, k_max: int = 2) -> MassFunction:
    """The level-1 distribution: a single leaf, so X = 1 with probability 1."""
    probs = np.zeros(k_max + 1)
    probs[1] = 1.0
    return MassFunction(probs=probs, tail_mass=0.0, level=1, p_plus=p_plus)


def _support_window(probs: np.ndarray) -> Optional[tuple[int, int]]:
    nz = np.flatnonzero(probs)
    if nz.size == 0:
        return None
    return int(nz[0]), int(nz[-1])


def step_pmf(m: MassFunction, policy: TruncationPolicy) -> MassFunction:
    """Advance one level: p-mixture of self-convolution and pairwise minimum.

    The sum part is the self-convolution of the mass array, with anything
    landing above the cap routed into the tail.  The min part is computed
    through survival squares, P(min >= k) = P(X >= k)^2, with the lumped
    tail treated as mass above the cap.  Normalization is preserved because
    both parts conserve total mass by construction.
    """
    new_level = m.level + 1
    cap = policy.cap_for(new_level)
    p = m.p_plus

    sum_in = np.zeros(cap + 1)
    sum_tail = 0.0
    if p > 0.0:
        t_in = m.tail_mass
        beyond = 0.0
        window = _support_window(m.probs)
        if window is not None:
            lo, hi = window
            seg = m.probs[lo : hi + 1]
            conv = _clamp_probabilities(_convolve(seg, seg))  # X1 + X2 on [2*lo, 2*hi]
            take_hi = min(2 * hi, cap)
            if take_hi >= 2 * lo:
                sum_in[2 * lo : take_hi + 1] = conv[: take_hi - 2 * lo + 1]
                beyond = float(conv[take_hi - 2 * lo + 1 :].sum())
            else:
                beyond = float(conv.sum())
        # any pair touching the incoming tail sums past the cap
        sum_tail = beyond + t_in * (2.0 - t_in)

    min_in = np.zeros(cap + 1)
    min_tail = 0.0
    if p < 1.0:
        s = np.empty(cap + 2)  # s[k] = P(X >= k), s[cap+1] = mass beyond cap
        s[0] = 1.0
        upto = min(m.k_max, cap + 1)
        suffix = np.cumsum(m.probs[:0:-1])[::-1] + m.tail_mass
        s[1 : upto + 1] = suffix[: upto]
        if cap + 1 > m.k_max:
            s[m.k_max + 1 :] = m.tail_mass
        sq = s * s
        min_in[1:] = sq[1 : cap + 1] - sq[2 : cap + 2]
        min_tail = float(sq[cap + 1])

    probs = p * sum_in + (1.0 - p) * min_in
    probs[0] = 0.0
    tail = p * sum_tail + (1.0 - p) * min_tail

    if policy.tail_mode == "drop":
        kept = float(probs.sum())
        if kept <= 0.0:
            raise ArithmeticError("drop mode removed all probability mass")
        probs /= kept
        tail = 0.0
    else:
        # Rescale away single-step rounding: a defect delta in the total would
        # double every level through the self-convolution, so it must not be
        # allowed to ride along.  Exact-arithmetic cases have total == 1.0 and
        # are left untouched.
        total = float(probs.sum()) + tail
        if abs(total - 1.0) > NORM_EPS:
            raise ArithmeticError(f"one step lost normalization: total = {total!r}")
        if total != 1.0:
            probs /= total
            tail /= total

    return MassFunction(probs=probs, tail_mass=tail, level=new_level, p_plus=p)


def step_survival(s: SurvivalCurve, p_plus: float = 0.5) -> SurvivalCurve:
    """Advance the survival curve one level by the critical quadratic recurrence.

    v'[k] = v[k] + (1/2) * sum_{l=1}^{k-1} (v[l]-v[l+1]) * (v[k-l]-v[k]).

    Only stated for the balanced mixture; the entries k <= k_max stay exact
    regardless of what the curve does beyond the cap, because the recurrence
    for slot k touches slots 1..k only.  Used as a small-scale oracle against
    :func:`step_pmf`.
    """
    if p_plus != 0.5:
        raise ValueError("survival-form recurrence only applies at p_plus = 1/2")
    vals = s.values
    K = s.k_max
    new = np.ones(K + 1)
    if K >= 2:
        d = vals[1:K] - vals[2 : K + 1]           # v[l] - v[l+1], l = 1..K-1
        conv = np.convolve(d, vals[1:])           # conv[k-2] = sum_l d_l * v[k-l]
        kk = np.arange(2, K + 1)
        new[kk] = vals[kk] + 0.5 * (conv[kk - 2] - vals[kk] * (vals[1] - vals[kk]))
    return SurvivalCurve(values=new, tail_floor=0.0, level=s.level + 1)


class EvolveRecord(NamedTuple):
    mass: MassFunction
    tail_history: list
    budget_exceeded: bool


def evolve_record(
    n_target: int,
    p_plus: float,
    policy: TruncationPolicy,
    tail_budget: Optional[float] = None,
) -> EvolveRecord:
    """Iterate :func:`step_pmf` to the target level, recording tail per level."""
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    m = point_mass_initial(p_plus, k_max=2)
    history = [0.0]
    exceeded = False
    for _ in range(n_target - 1):
        m = step_pmf(m, policy)
        history.append(m.tail_mass)
        if tail_budget is not None and m.tail_mass > tail_budget:
            exceeded = True
    return EvolveRecord(mass=m, tail_history=history, budget_exceeded=exceeded)


def evolve(
    n_target: int,
    p_plus: float,
    policy: TruncationPolicy,
    tail_budget: Optional[float] = None,
) -> MassFunction:
    """The level-``n_target`` distribution under the given truncation policy."""
    return evolve_record(n_target, p_plus, policy, tail_budget).mass


class Moments(NamedTuple):
    mean_x: float
    mean_log_x: float
    var_log_x: float
    truncated: bool


def moments(m: MassFunction) -> Moments:
    """Truncated-support moments.

    The lumped tail contributes at value ``k_max``, so ``mean_x`` and
    ``mean_log_x`` are certified lower bounds whenever ``tail_mass > 0``
    (provided the cap did not grow after mass was lumped); ``truncated``
    flags that situation.  ``var_log_x`` is a plain truncated moment.
    """
    k = np.arange(1, m.k_max + 1, dtype=float)
    w = m.probs[1:]
    logk = np.log(k)
    mean_x = float(np.dot(k, w)) + m.k_max * m.tail_mass
    mean_log = float(np.dot(logk, w)) + math.log(m.k_max) * m.tail_mass
    second = float(np.dot(logk * logk, w)) + math.log(m.k_max) ** 2 * m.tail_mass
    var_log = max(second - mean_log * mean_log, 0.0)
    return Moments(mean_x, mean_log, var_log, m.tail_mass > 0.0)


# ---------------------------------------------------------------------------
# serialization


def write_distribution_csv(m: MassFunction, out: Union[str, TextIO]) -> None:
    """CSV with one row per mass value: columns k, pmf, survival."""
    surv = m.survival().values
    lines = ["k,pmf,survival\n"]
    for k in range(1, m.k_max + 1):
        lines.append(f"{k},{float(m.probs[k])!r},{float(surv[k])!r}\n")
    _write_text(out, "".join(lines))


def write_curve_csv(s: SurvivalCurve, out: Union[str, TextIO]) -> None:
    """Same schema as :func:`write_distribution_csv`, from the survival view."""
    pmf = np.append(-np.diff(s.values[1:]), s.values[-1] - s.tail_floor)
    lines = ["k,pmf,survival\n"]
    for k in range(1, s.k_max + 1):
        lines.append(f"{k},{float(pmf[k - 1])!r},{float(s.values[k])!r}\n")
    _write_text(out, "".join(lines))


def write_distribution_json(m: MassFunction, out: Union[str, TextIO]) -> None:
    _write_text(out, json.dumps(m.to_json_dict(), sort_keys=True) + "\n")


def mass_function_from_json(d: dict) -> MassFunction:
    probs = np.zeros(int(d["k_max"]) + 1)
    probs[1:] = np.asarray(d["probs"], dtype=float)
    return MassFunction(
        probs=probs,
        tail_mass=float(d["tail_mass"]),
        level=int(d["level"]),
        p_plus=float(d["p_plus"]),
    )


def _write_text(out: Union[str, TextIO], text: str) -> None:
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
