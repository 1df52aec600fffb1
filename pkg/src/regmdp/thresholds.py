"""Stable over-compliance thresholds, backlash design, and static audit limits.

The central quantity is the stable effort: the highest effort a forward-looking
platform will hold even in states that demand less, because slacking off now
raises the chance of being thrown into the costly backlash state later. This
module computes that effort from the model, inverts the relationship to design
a backlash level that makes a chosen target effort stable, and contrasts both
with what static fines can achieve.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstructionError,
    DomainError,
    InsufficientMaxEffortError,
)
from .mdp import ActionGrid, RegulationMdp, StateSpace, build_action_grid
from .policy import evaluate_threshold_policy
from .primitives import CostModel, DriftModel, HarmModel, WelfareModel, socially_optimal_effort

# ---------------------------------------------------------------------------
# static audit regime
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepAuditFailure:
    """Audit fails with a flat probability p0 whenever effort is short."""

    p0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p0 <= 1.0:
            raise ConstructionError(f"p0 must lie in (0, 1], got {self.p0}")

    def __call__(self, e, e_c):
        e = np.asarray(e, dtype=float)
        return np.where(e < e_c, self.p0, 0.0)


@dataclass(frozen=True)
class RampAuditFailure:
    """Audit failure probability grows linearly with the effort shortfall."""

    beta: float = 5.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConstructionError(f"beta must be positive, got {self.beta}")

    def __call__(self, e, e_c):
        e = np.asarray(e, dtype=float)
        return np.where(e < e_c, np.minimum(1.0, self.beta * (e_c - e)), 0.0)


@dataclass(frozen=True)
class StaticRegime:
    """One-shot enforcement: audit with some probability, fine on failure."""

    audit_prob: float
    fine: float
    fail_model: object = StepAuditFailure()

    def __post_init__(self):
        if not 0.0 <= self.audit_prob <= 1.0:
            raise ConstructionError(f"audit_prob must lie in [0, 1], got {self.audit_prob}")
        if not self.fine >= 0:
            raise ConstructionError(f"fine must be non-negative, got {self.fine}")


def static_expected_utility(regime: StaticRegime, cost: CostModel, e, e_c: float):
    """Platform payoff -cost(e) - audit_prob * P_fail(e | e_c) * fine.

    Meeting the requirement makes an audit failure impossible by definition,
    so the failure probability is forced to zero for e >= e_c no matter what
    the supplied failure family returns there.
    """
    e_arr = np.asarray(e, dtype=float)
    if np.any(e_arr < 0) or not np.all(np.isfinite(e_arr)):
        raise DomainError(f"effort must be finite and non-negative, got {e!r}")
    pf = np.where(e_arr < e_c, np.asarray(regime.fail_model(e_arr, e_c), dtype=float), 0.0)
    if np.any(pf < 0) or np.any(pf > 1):
        raise DomainError("failure model produced probabilities outside [0, 1]")
    out = -np.asarray(cost.value(e_arr)) - regime.audit_prob * pf * regime.fine
    return float(out) if out.ndim == 0 else out


def static_optimal_effort(
    regime: StaticRegime, cost: CostModel, e_c: float, actions: ActionGrid
) -> float:
    """Platform's best effort under one-shot enforcement, over the full grid.

    The search is unconstrained (any grid effort, above or below e_c), yet the
    answer can never exceed e_c: beyond the requirement the fine term is zero
    and cost strictly increases. That cap is re-checked as a postcondition so
    a broken failure family cannot slip through silently.
    """
    eu = static_expected_utility(regime, cost, actions.efforts, e_c)
    best = float(actions.efforts[int(np.argmax(eu))])  # ties go to the lowest effort
    if best > e_c + 1e-12:
        raise RuntimeError(
            f"static enforcement induced effort {best} above the requirement {e_c}; "
            "this breaks the no-overshoot guarantee"
        )
    return best


# ---------------------------------------------------------------------------
# stable effort under adaptive regulation
# ---------------------------------------------------------------------------


def _hold_margin(mdp: RegulationMdp, e: float) -> float:
    """Margin by which holding effort e beats letting the requirement slide.

    Positive means every state below e prefers holding e to any lower effort;
    the stable effort is the supremum of the region where this stays
    non-negative. Uses the fact that all states at or below the threshold
    share the low-state value, so the comparison reduces to the value gap
    against the backlash state plus the local cost/harm trade-off.
    """
    vf = evaluate_threshold_policy(mdp, e)
    gap = vf[0] - vf.at_backlash
    trade = float(mdp.cost.derivative(e)) / (mdp.gamma * float(mdp.harm.derivative(e)))
    return gap + trade


def optimal_threshold(mdp: RegulationMdp, refine_tol: float = 1e-6) -> float:
    """The stable effort: the highest threshold the platform holds voluntarily.

    Scans every action-grid effort up to the backlash level for the hold
    condition, then refines the last sign change by bisection on the
    continuous margin down to refine_tol. Returns 0 when the condition holds
    nowhere (then complying exactly is already optimal), which includes every
    myopic platform (gamma == 0).
    """
    if not refine_tol > 0:
        raise DomainError(f"refine_tol must be positive, got {refine_tol}")
    if mdp.gamma == 0.0:
        return 0.0
    cand = mdp.actions.efforts[mdp.actions.efforts <= mdp.space.backlash_level + 1e-12]
    margins = np.array([_hold_margin(mdp, float(e)) for e in cand])
    holds = margins >= 0.0
    if not holds.any():
        return 0.0
    i = int(np.max(np.nonzero(holds)[0]))
    if i == cand.size - 1:
        return float(cand[-1])
    lo, hi = float(cand[i]), float(cand[i + 1])  # margin(lo) >= 0 > margin(hi)
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        if _hold_margin(mdp, mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def overreaction_gap(mdp: RegulationMdp, welfare: WelfareModel, refine_tol: float = 1e-6) -> float:
    """Stable effort minus the socially optimal effort.

    A weak backlash level (at or below the social optimum) can never close
    the gap: holding the backlash level itself is worthless there, so the
    stable effort falls strictly short. That sign is re-checked on every call.
    """
    e_star = socially_optimal_effort(welfare, tol=1e-10, e_max=mdp.actions.e_max)
    stable = optimal_threshold(mdp, refine_tol)
    gap = stable - e_star
    if mdp.space.backlash_level <= e_star + 1e-12 and not gap < 0:
        raise RuntimeError(
            f"a backlash level of {mdp.space.backlash_level} at or below the social "
            f"optimum {e_star} produced a non-negative gap {gap}; this should be impossible"
        )
    return gap


# ---------------------------------------------------------------------------
# backlash design
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BacklashDesign:
    """Outcome of tuning the backlash level to make a target effort stable."""

    target_e_star: float
    designed_e_h: float
    achieved_threshold: float
    residual: float
    degenerate: bool = False


def design_backlash(
    welfare: WelfareModel,
    gamma: float,
    space_template: StateSpace,
    drift: DriftModel,
    tol: float = 1e-6,
    *,
    e_max: float = 1.0,
    action_step: float = 1e-3,
    refine_tol: float = 1e-6,
    verify_tol: float | None = None,
) -> BacklashDesign:
    """Pick the backlash level that makes the socially optimal effort stable.

    The template's lower levels stay fixed while its top level is replaced by
    each probe, so the comparison isolates the backlash parameter. Holding the
    target effort is exactly break-even when the backlash state is painful
    enough that its value shortfall matches a constant K built from the cost
    and harm curves at the target; the probe function

        G(e_h) = -value_at_backlash(threshold policy at target) - K

    is negative for weak backlash levels and crosses zero before the effort
    ceiling whenever the ceiling's cost is sufficiently large. Bisection on
    the bracket pins the level to within tol, then the designed MDP is
    re-solved and the achieved stable effort must land within verify_tol of
    the target (default: two action-grid steps).
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError(
            f"backlash design needs a forward-looking platform with gamma in (0, 1), got {gamma}"
        )
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if space_template.n_states < 2:
        raise ConstructionError("the space template needs at least one level below the top")
    lower = space_template.levels[:-1]
    if lower[-1] >= e_max:
        raise ConstructionError("the template's fixed levels must sit below the effort ceiling")
    if verify_tol is None:
        verify_tol = 2.0 * action_step

    harm, cost = welfare.harm, welfare.cost
    e_star = socially_optimal_effort(welfare, tol=1e-10, e_max=e_max)

    def probe_mdp(e_h: float) -> RegulationMdp:
        space = StateSpace(np.append(lower, e_h))
        grid = build_action_grid(e_max, action_step, space.levels)
        return RegulationMdp(space, grid, harm, cost, drift, gamma)

    if e_star <= 1e-12:
        # a zero target makes the design problem vacuous: any regulation
        # overshoots it. Report the weakest valid backlash level, flag the
        # result, and leave achieved_threshold as information only; the
        # template's fixed levels alone may force over-compliance here.
        e_h = min(float(lower[-1]) + max(tol, action_step), e_max)
        achieved = optimal_threshold(probe_mdp(e_h), refine_tol)
        return BacklashDesign(e_star, e_h, achieved, math.nan, degenerate=True)

    h_star = float(harm.prob(e_star))
    k_constant = (
        cost.value(e_star)
        - cost.derivative(e_star) * (1.0 - gamma * (1.0 - h_star)) / (gamma * harm.derivative(e_star))
    ) / (1.0 - gamma)

    def probe_gap(e_h: float) -> float:
        vf = evaluate_threshold_policy(probe_mdp(e_h), e_star)
        return -vf.at_backlash - k_constant

    lo = max(e_star, float(lower[-1]) + 1e-9)
    if lo >= e_max:
        raise InsufficientMaxEffortError(k_constant, float(cost.value(e_max)))
    gap_hi = probe_gap(e_max)
    if gap_hi <= 0.0:
        raise InsufficientMaxEffortError(k_constant, float(cost.value(e_max)))
    gap_lo = probe_gap(lo)
    if gap_lo > 0.0:
        raise ConstructionError(
            "the template's fixed levels sit too high: the probe already overshoots "
            f"at the smallest valid backlash level {lo:.6g}"
        )
    hi = e_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe_gap(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    e_h = 0.5 * (lo + hi)
    residual = probe_gap(e_h)

    achieved = optimal_threshold(probe_mdp(e_h), refine_tol)
    if abs(achieved - e_star) > verify_tol:
        raise RuntimeError(
            f"designed backlash level {e_h:.6g} yields stable effort {achieved:.6g}, "
            f"off the target {e_star:.6g} by more than {verify_tol:.3g}"
        )
    if not e_h > e_star:
        raise RuntimeError(
            f"designed backlash level {e_h:.6g} failed to exceed the target {e_star:.6g}"
        )
    return BacklashDesign(e_star, e_h, achieved, residual)


# ---------------------------------------------------------------------------
# one requirement cannot serve two cost structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ImpossibilityReport:
    """Sweep showing no single static requirement fits two cost structures."""

    e_star_1: float
    e_star_2: float
    degenerate: bool
    attain_tol: float
    rows: tuple
    conclusion: bool

    def records(self):
        return [dict(r) for r in self.rows]


def impossibility_report(
    h: HarmModel,
    damage: float,
    cost_1: CostModel,
    cost_2: CostModel,
    gamma: float,
    drift: DriftModel,
    *,
    e_max: float = 1.0,
    candidate_step: float = 1e-3,
    attain_tol: float = 1e-3,
) -> ImpossibilityReport:
    """Demonstrate that one required effort cannot be right for two platforms.

    Two platforms share the harm curve but differ in cost structure, so their
    socially optimal efforts differ. Under one-shot enforcement a platform
    complies exactly with the requirement and never exceeds it, hence the
    induced effort per candidate requirement is the requirement itself. The
    sweep tabulates, for each candidate, the distance to each platform's
    optimum and the per-period and discounted welfare losses; the conclusion
    flag records that no candidate lands within attain_tol of both optima.

    The demonstration itself is static: gamma only converts per-period losses
    into discounted totals, and drift is accepted for interface symmetry with
    the adaptive machinery but plays no role here.
    """
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if drift is not None and len(drift) < 1:
        raise ConstructionError("drift, when given, must define at least one state")
    w1 = WelfareModel(h, cost_1, damage)
    w2 = WelfareModel(h, cost_2, damage)
    e1 = socially_optimal_effort(w1, tol=1e-10, e_max=e_max)
    e2 = socially_optimal_effort(w2, tol=1e-10, e_max=e_max)
    degenerate = abs(e1 - e2) <= attain_tol

    # both optima anchor the candidate grid; collapse them when they coincide
    anchors = (e1,) if abs(e1 - e2) <= 1e-12 else (e1, e2)
    grid = build_action_grid(e_max, candidate_step, anchors).efforts
    horizon_factor = 1.0 / (1.0 - gamma)
    rows = []
    all_miss = True
    for e_c in grid:
        e_c = float(e_c)
        gap1, gap2 = e_c - e1, e_c - e2
        loss1 = float(w1.expected_welfare(e1) - w1.expected_welfare(e_c))
        loss2 = float(w2.expected_welfare(e2) - w2.expected_welfare(e_c))
        attains_both = abs(gap1) <= attain_tol and abs(gap2) <= attain_tol
        if attains_both:
            all_miss = False
        rows.append(
            (
                ("required_effort", e_c),
                ("induced_effort", e_c),
                ("gap_to_optimum_1", gap1),
                ("gap_to_optimum_2", gap2),
                ("welfare_loss_1", loss1),
                ("welfare_loss_2", loss2),
                ("discounted_loss_1", loss1 * horizon_factor),
                ("discounted_loss_2", loss2 * horizon_factor),
                ("attains_both", attains_both),
            )
        )
    conclusion = all_miss and not degenerate
    return ImpossibilityReport(e1, e2, degenerate, attain_tol, tuple(rows), conclusion)
