import pytest

from regmdp import (
    CostModel,
    DriftModel,
    HarmModel,
    RegulationMdp,
    WelfareModel,
    build_action_grid,
    build_state_space,
)

# the canonical scenario used across the suite: exponential harm decay from
# 0.9 to 0.1, quadratic cost 0.5 e^2 + 0.1 e, damage 2, gamma 0.9, eleven
# evenly spaced requirement levels up to a backlash level of 1.0


@pytest.fixture(scope="session")
def harm():
    return HarmModel(0.1, 0.9, 3.0)


@pytest.fixture(scope="session")
def cost():
    return CostModel(0.5, 0.1)


@pytest.fixture(scope="session")
def welfare(harm, cost):
    return WelfareModel(harm, cost, 2.0)


@pytest.fixture(scope="session")
def space():
    return build_state_space(0.0, 1.0, 11, 1.0)


@pytest.fixture(scope="session")
def actions(space):
    return build_action_grid(1.0, 1e-3, space.levels)


@pytest.fixture(scope="session")
def drift():
    return DriftModel.constant(0.3, 11)


@pytest.fixture(scope="session")
def mdp(space, actions, harm, cost, drift):
    return RegulationMdp(space, actions, harm, cost, drift, 0.9)
