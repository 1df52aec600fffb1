"""Parametric families for harm probability, moderation cost, drift, and welfare.

Every model here is a frozen dataclass: immutable after construction and safe
to share across threads or processes. Evaluation methods accept a scalar or a
numpy array of efforts and return a matching scalar or array.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, DomainError


def _effort_array(e) -> np.ndarray:
    arr = np.asarray(e, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"effort must be finite and non-negative, got {e!r}")
    return arr


def _match_input(arr: np.ndarray):
    # scalar in, scalar out
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True)
class HarmModel:
    """Per-period probability that platform activity causes a harm event.

    prob(e) = h_min + (h_max - h_min) * exp(-k * e): strictly decreasing and
    convex in effort, bounded inside (0, 1] for every e >= 0. More effort
    always buys a strictly lower chance of harm, at diminishing rates.
    """

    h_min: float
    h_max: float
    k: float

    def __post_init__(self):
        if not 0.0 < self.h_min < 1.0:
            raise ConstructionError(f"h_min must lie in (0, 1), got {self.h_min}")
        if not self.h_min < self.h_max <= 1.0:
            raise ConstructionError(
                f"h_max must lie in (h_min, 1], got h_max={self.h_max} with h_min={self.h_min}"
            )
        if not self.k > 0:
            raise ConstructionError(f"decay rate k must be positive, got {self.k}")

    def prob(self, e):
        e = _effort_array(e)
        return _match_input(self.h_min + (self.h_max - self.h_min) * np.exp(-self.k * e))

    def derivative(self, e):
        e = _effort_array(e)
        return _match_input(-self.k * (self.h_max - self.h_min) * np.exp(-self.k * e))


@dataclass(frozen=True)
class PiecewiseLinearHarm:
    """Two-segment linear harm curve with zero curvature almost everywhere.

    Exercises the weakly convex edge of the harm assumptions: the slope jumps
    from -slope_first to -slope_second at the kink (slope_first > slope_second
    so the curve stays convex) and the probability stays strictly positive on
    [0, e_cap]. The derivative at the kink is taken from the right.
    """

    h_at_zero: float
    slope_first: float
    slope_second: float
    kink: float
    e_cap: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.h_at_zero <= 1.0:
            raise ConstructionError(f"h_at_zero must lie in (0, 1], got {self.h_at_zero}")
        if not self.slope_first > self.slope_second > 0.0:
            raise ConstructionError(
                "slopes must satisfy slope_first > slope_second > 0, got "
                f"{self.slope_first} and {self.slope_second}"
            )
        if not 0.0 < self.kink < self.e_cap:
            raise ConstructionError(f"kink must lie in (0, e_cap), got {self.kink}")
        if self._raw(self.e_cap) <= 0.0:
            raise ConstructionError("harm probability must stay positive up to e_cap")

    def _raw(self, e):
        e = np.asarray(e, dtype=float)
        before = self.h_at_zero - self.slope_first * e
        after = (
            self.h_at_zero
            - self.slope_first * self.kink
            - self.slope_second * (e - self.kink)
        )
        return np.where(e < self.kink, before, after)

    def prob(self, e):
        e = _effort_array(e)
        return _match_input(np.asarray(self._raw(e)))

    def derivative(self, e):
        e = _effort_array(e)
        out = np.where(e < self.kink, -self.slope_first, -self.slope_second)
        return _match_input(np.asarray(out))


@dataclass(frozen=True)
class CostModel:
    """Quadratic moderation cost c(e) = a * e**2 + b * e.

    Zero at zero effort, strictly increasing and strictly convex for e >= 0.
    """

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ConstructionError(f"quadratic coefficient a must be positive, got {self.a}")
        if not self.b > 0:
            raise ConstructionError(f"linear coefficient b must be positive, got {self.b}")

    def value(self, e):
        e = _effort_array(e)
        return _match_input(self.a * e * e + self.b * e)

    def derivative(self, e):
        e = _effort_array(e)
        return _match_input(2.0 * self.a * e + self.b)


@dataclass(frozen=True, eq=False)
class DriftModel:
    """Per-state probability that the required effort drifts one level down.

    probs[i] is the chance that, absent a harm event, the public standard for
    state i relaxes to the adjacent lower level. The lowest state has nowhere
    to go, so probs[0] must be exactly zero.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ConstructionError("drift probabilities must form a non-empty 1-d sequence")
        if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
            raise ConstructionError("drift probabilities must lie in [0, 1]")
        if arr[0] != 0.0:
            raise ConstructionError(
                f"the lowest state cannot drift lower; probs[0] must be exactly 0, got {arr[0]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def constant(cls, p: float, n_states: int) -> "DriftModel":
        """Same drift probability p everywhere except the pinned lowest state."""
        if n_states < 1:
            raise ConstructionError(f"n_states must be at least 1, got {n_states}")
        arr = np.full(n_states, float(p))
        arr[0] = 0.0
        return cls(arr)

    def prob(self, index: int) -> float:
        return float(self.probs[index])

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class WelfareModel:
    """Society's per-period payoff: expected harm damage plus moderation cost.

    expected_welfare(e) = -prob(e) * damage - cost(e). Strictly concave in
    effort whenever the harm family is convex, so the maximizer is unique.
    """

    harm: HarmModel
    cost: CostModel
    damage: float

    def __post_init__(self):
        if not self.damage >= 0:
            raise ConstructionError(f"damage must be non-negative, got {self.damage}")

    def expected_welfare(self, e):
        e = _effort_array(e)
        out = -(np.asarray(self.harm.prob(e)) * self.damage) - np.asarray(self.cost.value(e))
        return _match_input(np.asarray(out))

    def marginal_welfare(self, e):
        e = _effort_array(e)
        out = -(np.asarray(self.harm.derivative(e)) * self.damage) - np.asarray(
            self.cost.derivative(e)
        )
        return _match_input(np.asarray(out))


def socially_optimal_effort(model: WelfareModel, tol: float = 1e-6, e_max: float = 1.0) -> float:
    """Effort level maximizing expected welfare on [0, e_max].

    Marginal welfare is strictly decreasing, so the interior first-order
    condition -h'(e) * damage = c'(e) has at most one root; when no interior
    root exists the maximizing boundary is returned. With damage zero the
    marginal is negative everywhere and the answer is 0.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if not e_max > 0:
        raise DomainError(f"e_max must be positive, got {e_max}")
    if model.marginal_welfare(0.0) <= 0.0:
        return 0.0
    if model.marginal_welfare(e_max) >= 0.0:
        return float(e_max)
    return float(brentq(model.marginal_welfare, 0.0, e_max, xtol=tol))
