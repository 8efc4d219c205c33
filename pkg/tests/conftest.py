import numpy as np
import pytest

from fvwake import model


def tiny_config_2d(n_r=5, spacing=1.5):
    return model.ModelConfig(
        n_d=2, n_r=n_r, n_e=2, h=0.3, sigma=0.12, n_u=5,
        turbine_positions=np.array([[0.0, 0.0], [spacing, 0.0]]),
        turbine_is_virtual=(False, True),
    )


def tiny_config_3d(n_r=4, n_e=6):
    return model.ModelConfig(
        n_d=3, n_r=n_r, n_e=n_e, h=0.3, sigma=0.16, n_u=16,
        rotor_area=np.pi / 4,
        turbine_positions=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        turbine_is_virtual=(False, True),
    )


@pytest.fixture(scope="session")
def uniform_inflow():
    return model.InflowScenario()


@pytest.fixture(scope="session")
def tiny2d_state(uniform_inflow):
    cfg = tiny_config_2d()
    m = np.array([0.30, 0.15, 0.33, -0.1])
    state = model.spin_up(cfg, uniform_inflow, m, 2 * cfg.n_r)
    return cfg, state, m


@pytest.fixture(scope="session")
def tiny3d_state(uniform_inflow):
    cfg = tiny_config_3d()
    m = np.array([0.30, 0.2, 0.33, -0.1])
    state = model.spin_up(cfg, uniform_inflow, m, 2 * cfg.n_r)
    return cfg, state, m


@pytest.fixture(scope="session")
def table1_2d_greedy(uniform_inflow):
    """Full-size 2D state spun up under greedy controls."""
    cfg = model.ModelConfig.defaults_2d()
    m = np.array([0.33, 0.0, 0.33, 0.0])
    state = model.spin_up(cfg, uniform_inflow, m)
    return cfg, state, m


@pytest.fixture(scope="session")
def table1_3d_greedy(uniform_inflow):
    """Full-size 3D state spun up under greedy aligned controls."""
    cfg = model.ModelConfig.defaults_3d()
    m = np.array([0.33, 0.0, 0.33, 0.0])
    state = model.spin_up(cfg, uniform_inflow, m)
    return cfg, state, m


@pytest.fixture(scope="session")
def table1_3d_yawed(uniform_inflow):
    """Full-size 3D state spun up at 30 degrees yaw misalignment."""
    cfg = model.ModelConfig.defaults_3d()
    m = np.array([0.33, np.deg2rad(30.0), 0.33, 0.0])
    state = model.spin_up(cfg, uniform_inflow, m)
    return cfg, state, m
