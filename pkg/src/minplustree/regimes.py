"""Behavior away from the balanced mixture: tightness below 1/2, growth above.

Below p = 1/2 the root value converges in distribution; the survival
probabilities increase in the level toward a limit curve whose second entry
is p/(1-p).  Above p = 1/2 the mean grows at least geometrically with
ratio 2p per level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, TextIO, Union

import numpy as np

from .distribution import (
    TruncationPolicy,
    _write_text,
    moments,
    point_mass_initial,
    step_pmf,
)

SUBCRITICAL_K_CAP = 4096    # internal support cap; the family is tight below 1/2
_TAIL_LIMIT = 1e-12         # required lumped tail at convergence
_MONO_SLACK = 1e-12


@dataclass(frozen=True)
class RegimeReport:
    p_plus: float
    classification: str
    fixed_point_c2: Optional[float] = None
    growth_base: Optional[float] = None
    limit_survival: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        expected = "critical" if self.p_plus == 0.5 else (
            "subcritical" if self.p_plus < 0.5 else "supercritical"
        )
        if self.classification != expected:
            raise ValueError(f"classification {self.classification!r} inconsistent with p = {self.p_plus}")
        if self.limit_survival is not None:
            vals = self.limit_survival[1:]
            if np.any(np.diff(vals) > _MONO_SLACK):
                raise ValueError("limit survival values must be nonincreasing")

    def to_json_dict(self) -> dict:
        return {
            "p_plus": self.p_plus,
            "classification": self.classification,
            "fixed_point_c2": self.fixed_point_c2,
            "growth_base": self.growth_base,
            "limit_survival": (
                None if self.limit_survival is None else [float(x) for x in self.limit_survival[1:]]
            ),
        }


def subcritical_fixed_point(p: float) -> float:
    """Limit of P(X_N >= 2) for p below 1/2: the stable fixed point p/(1-p)."""
    if not 0.0 < p < 0.5:
        raise ValueError("defined for 0 < p < 1/2")
    return p / (1.0 - p)


def limit_survival(
    p: float,
    k_max: int = 64,
    tol: float = 1e-7,
    max_levels: int = 100_000,
    internal_cap: Optional[int] = None,
) -> np.ndarray:
    """Stabilized survival prefix c_k = lim_N P(X_N >= k), 1-indexed padded.

    Evolves the exact distribution level by level until the survival prefix
    moves less than ``tol`` in sup norm.  Monotone increase in the level of
    every survival entry is asserted on the way; the lumped tail must be
    negligible at convergence.  The default internal cap covers p up to
    about 0.42; closer to 1/2 the limit tail is fatter and ``internal_cap``
    has to grow with it.
    """
    if not 0.0 < p < 0.5:
        raise ValueError("defined for 0 < p < 1/2")
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    cap = max(internal_cap or SUBCRITICAL_K_CAP, k_max)
    policy = TruncationPolicy(k_max=cap, tail_mode="lump")
    m = point_mass_initial(p, k_max=cap)
    prev = m.survival().values[: k_max + 1].copy()
    for _ in range(max_levels):
        m = step_pmf(m, policy)
        cur = m.survival().values[: k_max + 1].copy()
        if np.any(cur - prev < -_MONO_SLACK):
            raise ArithmeticError("survival entries must be nondecreasing in the level")
        if float(np.max(np.abs(cur - prev))) < tol:
            if m.tail_mass > _TAIL_LIMIT:
                raise ArithmeticError(
                    f"tail mass {m.tail_mass:.3e} not negligible at convergence; raise the cap"
                )
            return cur
        prev = cur
    raise RuntimeError(f"no convergence within {max_levels} levels at tol {tol}")


def stationarity_residual(c: np.ndarray, p: float) -> float:
    """Sup residual of the limit-curve balance equation, for k = 2..k_max:

        c_k - (1-p) c_k^2 = p * [ sum_{l=1}^{k-2} (c_l - c_{l+1}) c_{k-l} + c_{k-1} ].
    """
    k_max = c.size - 1
    worst = 0.0
    for k in range(2, k_max + 1):
        bracket = c[k - 1]
        for ell in range(1, k - 1):
            bracket += (c[ell] - c[ell + 1]) * c[k - ell]
        lhs = c[k] - (1.0 - p) * c[k] ** 2
        worst = max(worst, abs(lhs - p * bracket))
    return worst


def supercritical_growth(p: float, n_max: int) -> np.ndarray:
    """Per-level truncated means, certified lower bounds on E[X_N].

    Full support (cap 2^(N-1)) keeps the tail at zero, so the means are
    exact; each must reach (2p)^(N-1) with the single-leaf level counting
    as N = 1.  Returned 1-indexed padded (out[0] is nan).
    """
    if not 0.5 < p <= 1.0:
        raise ValueError("defined for 1/2 < p <= 1")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    policy = TruncationPolicy(growth_rule=lambda level: max(2, 2 ** (level - 1)))
    means = np.full(n_max + 1, math.nan)
    m = point_mass_initial(p, k_max=2)
    means[1] = moments(m).mean_x
    for level in range(2, n_max + 1):
        m = step_pmf(m, policy)
        if m.tail_mass != 0.0:
            raise ArithmeticError("full-support evolution must not lump any tail")
        means[level] = moments(m).mean_x
    floors = (2.0 * p) ** (np.arange(n_max + 1) - 1)
    if np.any(means[1:] < floors[1:] * (1.0 - 1e-9)):
        raise ArithmeticError("geometric growth floor violated")
    return means


def classify(
    p: float,
    k_max: int = 64,
    tol: float = 1e-7,
    n_max: int = 20,
) -> RegimeReport:
    """Regime report for a mixture probability: fixed point and limit curve
    below 1/2, growth base above, bare classification at 1/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    if p == 0.5:
        return RegimeReport(p_plus=p, classification="critical")
    if p < 0.5:
        curve = limit_survival(p, k_max=k_max, tol=tol) if p > 0.0 else None
        if curve is None:
            # all-min tree: the root value is identically 1
            curve = np.ones(k_max + 1)
            curve[2:] = 0.0
        c2 = subcritical_fixed_point(p) if p > 0.0 else 0.0
        return RegimeReport(
            p_plus=p,
            classification="subcritical",
            fixed_point_c2=c2,
            limit_survival=curve,
        )
    supercritical_growth(p, min(n_max, 12))  # growth floor sanity before reporting
    return RegimeReport(p_plus=p, classification="supercritical", growth_base=2.0 * p)


def write_report_json(report: RegimeReport, out: Union[str, TextIO]) -> None:
    _write_text(out, json.dumps(report.to_json_dict(), sort_keys=True) + "\n")
