"""State space, action grid, policies, and transition structure."""

import numpy as np
import pytest

from regmdp import (
    ActionGrid,
    ConstructionError,
    DomainError,
    DriftModel,
    FeasibilityError,
    NoLowerStateError,
    Policy,
    RegulationMdp,
    StateSpace,
    build_action_grid,
    build_state_space,
)


class TestStateSpace:
    def test_build_uniform_levels(self, space):
        assert space.n_states == 11
        assert np.allclose(space.levels, np.linspace(0.0, 1.0, 11))
        assert space.backlash_index == 10
        assert space.backlash_level == 1.0

    def test_build_rejects_bad_shapes(self):
        with pytest.raises(ConstructionError):
            build_state_space(0.0, 1.0, 1, 1.0)
        with pytest.raises(ConstructionError):
            build_state_space(0.5, 1.0, 5, 0.5)  # min not below backlash
        with pytest.raises(ConstructionError):
            build_state_space(0.0, 1.0, 5, 1.5)  # backlash above the ceiling

    def test_rejects_unsorted_or_negative_levels(self):
        with pytest.raises(ConstructionError):
            StateSpace(np.array([0.0, 0.5, 0.5]))
        with pytest.raises(ConstructionError):
            StateSpace(np.array([-0.1, 0.5]))
        with pytest.raises(ConstructionError):
            StateSpace(np.array([0.3]))

    def test_index_of_matches_with_tolerance(self, space):
        assert space.index_of(0.5) == 5
        assert space.index_of(0.5 + 1e-12) == 5
        with pytest.raises(DomainError):
            space.index_of(0.55)

    def test_next_lower(self, space):
        assert space.next_lower(0.5) == pytest.approx(0.4)
        with pytest.raises(NoLowerStateError):
            space.next_lower(0.0)

    def test_floor_snaps_and_clamps(self, space):
        assert space.floor(0.35) == pytest.approx(0.3)
        assert space.floor(0.3 - 1e-10) == pytest.approx(0.3)  # snaps up to the level
        assert space.floor(0.0) == 0.0
        assert space.floor(5.0) == 1.0
        with pytest.raises(DomainError):
            space.floor(-0.05)

    def test_levels_are_read_only(self, space):
        with pytest.raises(ValueError):
            space.levels[0] = 0.7


class TestActionGrid:
    def test_uniform_grid(self):
        grid = build_action_grid(1.0, 1e-3)
        assert grid.efforts.size == 1001
        assert grid.efforts[0] == 0.0
        assert grid.e_max == 1.0
        assert np.allclose(np.diff(grid.efforts), 1e-3)

    def test_appends_ceiling_when_step_misses_it(self):
        grid = build_action_grid(0.9995, 1e-3)
        assert grid.e_max == 0.9995
        assert grid.efforts[-2] == pytest.approx(0.999)

    def test_levels_become_exact_members(self, space):
        grid = build_action_grid(1.0, 1e-3, space.levels)
        for lv in space.levels:
            assert grid.require_member(float(lv)) == float(lv)
        assert np.all(np.diff(grid.efforts) > 0)

    def test_merges_offgrid_levels(self):
        grid = build_action_grid(1.0, 1e-3, (0.12345,))
        assert grid.require_member(0.12345) == 0.12345
        assert grid.efforts.size == 1002  # nothing collided, so one extra point

    def test_rejects_levels_beyond_ceiling(self):
        with pytest.raises(ConstructionError):
            build_action_grid(1.0, 1e-3, (1.2,))

    def test_rejects_malformed_grids(self):
        with pytest.raises(ConstructionError):
            ActionGrid(np.array([0.1, 0.5]), 0.4)  # must start at zero
        with pytest.raises(ConstructionError):
            ActionGrid(np.array([0.0, 0.5]), 0.0)
        with pytest.raises(ConstructionError):
            ActionGrid(np.array([0.0]), 1.0)

    def test_require_member_rejects_offgrid(self):
        grid = build_action_grid(1.0, 1e-3)
        with pytest.raises(DomainError):
            grid.require_member(0.00051)


class TestPolicy:
    def test_comply_plays_the_requirement(self, space):
        pol = Policy.comply(space)
        assert np.array_equal(pol.efforts, space.levels)
        assert pol.effort_at(3) == pytest.approx(0.3)

    def test_threshold_plays_the_max(self, space):
        pol = Policy.threshold(space, 0.45)
        assert np.allclose(pol.efforts, np.maximum(space.levels, 0.45))

    def test_threshold_rejects_negative(self, space):
        with pytest.raises(DomainError):
            Policy.threshold(space, -0.2)

    def test_infeasible_policy_names_the_state(self, space):
        efforts = space.levels.copy()
        efforts[3] = 0.1  # below the 0.3 requirement
        with pytest.raises(FeasibilityError, match="state 0.3"):
            Policy(space, efforts)

    def test_shape_mismatch(self, space):
        with pytest.raises(ConstructionError):
            Policy(space, np.zeros(4))


class TestRegulationMdp:
    def test_rejects_bad_gamma(self, space, actions, harm, cost, drift):
        for gamma in (1.0, -0.1, 1.5):
            with pytest.raises(DomainError):
                RegulationMdp(space, actions, harm, cost, drift, gamma)

    def test_accepts_myopic_gamma(self, space, actions, harm, cost, drift):
        assert RegulationMdp(space, actions, harm, cost, drift, 0.0).gamma == 0.0

    def test_rejects_drift_length_mismatch(self, space, actions, harm, cost):
        with pytest.raises(ConstructionError):
            RegulationMdp(space, actions, harm, cost, DriftModel.constant(0.3, 7), 0.9)

    def test_rejects_grid_missing_a_level(self, space, harm, cost, drift):
        grid = ActionGrid(np.array([0.0, 1.0]), 1.0)  # reaches the top but skips levels
        with pytest.raises(DomainError):
            RegulationMdp(space, grid, harm, cost, drift, 0.9)

    def test_rejects_grid_below_backlash(self, space, harm, cost, drift):
        grid = build_action_grid(0.5, 1e-3)
        with pytest.raises(ConstructionError):
            RegulationMdp(space, grid, harm, cost, drift, 0.9)


class TestTransitions:
    def test_interior_state_three_outcomes(self, mdp, harm):
        pairs = mdp.transition_distribution(0.5, 0.7)
        h = harm.prob(0.7)
        expected = [(0.4, (1 - h) * 0.3), (0.5, (1 - h) * 0.7), (1.0, h)]
        assert len(pairs) == 3
        for (lv, p), (lv_e, p_e) in zip(pairs, expected):
            assert lv == pytest.approx(lv_e)
            assert p == pytest.approx(p_e, rel=1e-14)
        assert sum(p for _, p in pairs) == pytest.approx(1.0, abs=1e-12)

    def test_bottom_state_cannot_drift(self, mdp, harm):
        pairs = mdp.transition_distribution(0.0, 0.0)
        assert pairs == [
            (0.0, pytest.approx(1 - harm.prob(0.0))),
            (1.0, pytest.approx(harm.prob(0.0))),
        ]

    def test_backlash_state_merges_harm_and_stay(self, mdp, harm):
        pairs = mdp.transition_distribution(1.0, 1.0)
        h = harm.prob(1.0)
        assert len(pairs) == 2  # harm and staying put coincide at the top
        assert pairs[0] == (pytest.approx(0.9), pytest.approx((1 - h) * 0.3))
        assert pairs[1] == (pytest.approx(1.0), pytest.approx(h + (1 - h) * 0.7))

    def test_rejects_shirking(self, mdp):
        with pytest.raises(FeasibilityError):
            mdp.transition_distribution(0.5, 0.3)

    def test_rejects_offgrid_effort(self, mdp):
        with pytest.raises(DomainError):
            mdp.transition_distribution(0.5, 0.70001)

    def test_matrix_rows_are_distributions(self, mdp, space):
        for efforts in (space.levels, np.maximum(space.levels, 0.45)):
            p = mdp.transition_matrix(efforts)
            assert p.shape == (11, 11)
            assert np.all(p >= 0)
            assert np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_matrix_agrees_with_distribution(self, mdp, space):
        efforts = np.maximum(space.levels, 0.45)
        p = mdp.transition_matrix(efforts)
        for i, lv in enumerate(space.levels):
            pairs = dict(mdp.transition_distribution(float(lv), float(efforts[i])))
            for j, target in enumerate(space.levels):
                assert p[i, j] == pytest.approx(pairs.get(float(target), 0.0), abs=1e-15)
