"""Exact policy evaluation, action values, and brute-force optimization.

Values come from solving the linear fixed point v = r + gamma * P v directly,
so every value function returned here carries linear-algebra noise only.
Value iteration is retained purely as an independent optimality oracle for
cross-checks; nothing else depends on it.

All functions are pure functions of immutable inputs, so sweeps over policies
or thresholds may run concurrently without coordination.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FeasibilityError
from .mdp import Policy, RegulationMdp, StateSpace

BELLMAN_RESIDUAL_TOL = 1e-10
_ITERATION_CAP = 10**6
_SHARED_VALUE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Expected discounted reward per state, aligned with a state space."""

    space: StateSpace
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != self.space.levels.shape:
            raise DomainError("value function needs exactly one value per state")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __getitem__(self, index: int) -> float:
        return float(self.values[index])

    @property
    def at_backlash(self) -> float:
        return float(self.values[-1])


def _require_same_space(mdp: RegulationMdp, space: StateSpace):
    if space is mdp.space:
        return
    if space.levels.shape != mdp.space.levels.shape or not np.allclose(
        space.levels, mdp.space.levels, rtol=0.0, atol=1e-12
    ):
        raise FeasibilityError("policy and MDP are defined on different state spaces")


def evaluate_policy(mdp: RegulationMdp, policy: Policy) -> ValueFunction:
    """Exact discounted value of a stationary policy.

    Solves (I - gamma * P) v = r and refuses to return anything whose Bellman
    residual exceeds 1e-10 in any state.
    """
    _require_same_space(mdp, policy.space)
    r = -np.asarray(mdp.cost.value(policy.efforts))
    p = mdp.transition_matrix(policy.efforts)
    n = mdp.space.n_states
    v = np.linalg.solve(np.eye(n) - mdp.gamma * p, r)
    residual = float(np.max(np.abs(v - (r + mdp.gamma * (p @ v)))))
    if residual > BELLMAN_RESIDUAL_TOL:
        raise RuntimeError(f"policy evaluation left a Bellman residual of {residual:.3g}")
    floor = -float(mdp.cost.value(mdp.actions.e_max))
    if mdp.gamma > 0:
        floor /= 1.0 - mdp.gamma
    if v.min() < floor - 1e-8 * (1.0 + abs(floor)) or v.max() > 1e-10:
        raise RuntimeError("policy value escaped the feasible reward range")
    return ValueFunction(mdp.space, v)


def continuation_value(mdp: RegulationMdp, vfun: ValueFunction, e_c: float) -> float:
    """Expected next-state value at state e_c conditional on no harm event."""
    i = mdp.space.index_of(e_c)
    if i == 0:
        return vfun[0]
    g = mdp.drift.prob(i)
    return g * vfun[i - 1] + (1.0 - g) * vfun[i]


def q_value(mdp: RegulationMdp, vfun: ValueFunction, e_c: float, e: float) -> float:
    """One-step lookahead value of playing effort e in state e_c.

    The effort need not sit on the action grid; harm and cost are continuous,
    which is what lets threshold refinement move between grid points.
    """
    if e < e_c - 1e-12:
        raise FeasibilityError(f"effort {e} falls below the required level {e_c}")
    h = float(mdp.harm.prob(e))  # also rejects negative effort
    d = continuation_value(mdp, vfun, e_c)
    return float(-mdp.cost.value(e) + mdp.gamma * (h * vfun.at_backlash + (1.0 - h) * d))


def evaluate_threshold_policy(mdp: RegulationMdp, tau: float) -> ValueFunction:
    """Value of the policy that plays max(tau, required effort) everywhere.

    Every state at or below tau plays tau itself and, because a harm event
    lands in the same place regardless of where it happened, all of those
    states must share a single value. That structure is asserted after the
    solve (tolerance 1e-9) as a standing consistency check.
    """
    if not 0.0 <= tau <= mdp.space.backlash_level + 1e-12:
        raise DomainError(
            f"threshold must lie in [0, {mdp.space.backlash_level}], got {tau}"
        )
    vf = evaluate_policy(mdp, Policy.threshold(mdp.space, tau))
    held = mdp.space.levels <= tau
    if np.any(held):
        spread = float(np.ptp(vf.values[held]))
        if spread > _SHARED_VALUE_TOL:
            raise RuntimeError(
                f"states held at the threshold diverged by {spread:.3g}; "
                "the transition structure is broken"
            )
    return vf


def _action_value_table(mdp: RegulationMdp, v: np.ndarray) -> np.ndarray:
    """(n_states, n_actions) one-step lookahead values given state values v."""
    acts = mdp.actions.efforts
    h = np.asarray(mdp.harm.prob(acts))
    c = np.asarray(mdp.cost.value(acts))
    g = mdp.drift.probs
    down = np.empty_like(v)
    down[0] = v[0]
    down[1:] = v[:-1]
    d = g * down + (1.0 - g) * v
    return -c[None, :] + mdp.gamma * (h[None, :] * v[-1] + (1.0 - h)[None, :] * d[:, None])


def _feasible_mask(mdp: RegulationMdp) -> np.ndarray:
    return mdp.actions.efforts[None, :] >= mdp.space.levels[:, None] - 1e-12


def value_iteration(mdp: RegulationMdp, tol: float = 1e-10):
    """Brute-force optimal policy over the action grid.

    Sweeps the Bellman optimality operator until the sup-norm residual drops
    to tol, then extracts the greedy policy (ties broken toward the lowest
    effort) and returns it with its exactly evaluated value function.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    mask = _feasible_mask(mdp)
    v = np.zeros(mdp.space.n_states)
    for _ in range(_ITERATION_CAP):
        v_new = np.where(mask, _action_value_table(mdp, v), -np.inf).max(axis=1)
        if float(np.max(np.abs(v_new - v))) <= tol:
            v = v_new
            break
        v = v_new
    else:
        raise RuntimeError(f"value iteration failed to converge within {_ITERATION_CAP} sweeps")
    q = np.where(mask, _action_value_table(mdp, v), -np.inf)
    # argmax takes the first maximizer, i.e. the lowest tied effort
    greedy = Policy(mdp.space, mdp.actions.efforts[np.argmax(q, axis=1)])
    return greedy, evaluate_policy(mdp, greedy)


def policy_improvement_check(mdp: RegulationMdp, policy: Policy, tol: float = 1e-9):
    """States where some feasible action beats the policy's own value.

    Returns (state level, best improving effort, gain) for every state with a
    one-step improvement above tol. An empty list certifies the policy is
    unimprovable at that tolerance.
    """
    vf = evaluate_policy(mdp, policy)
    q = np.where(_feasible_mask(mdp), _action_value_table(mdp, vf.values), -np.inf)
    gains = q - vf.values[:, None]
    out = []
    for i in range(mdp.space.n_states):
        j = int(np.argmax(gains[i]))
        if gains[i, j] > tol:
            out.append((float(mdp.space.levels[i]), float(mdp.actions.efforts[j]), float(gains[i, j])))
    return out
