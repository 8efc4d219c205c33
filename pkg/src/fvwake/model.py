"""Discrete state-space wake model.

The state stacks vortex element positions, circulations, stored inflow
velocities and the previously applied controls, q = [X | G | U | M] in
ring-major order with ring 0 the newest ring at the rotor. One turbine
sheds vorticity; any further turbines are virtual and only sample the
flow. Each step transports rings downstream with the locally induced
velocity, re-initializes ring 0 at the rotor edge, and pushes the oldest
ring out of the fixed-size state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels, rotor

# Stored-inflow interpolation weight: exp(-W_DECAY * squared distance).
W_DECAY = 10.0

CONTROLS_PER_TURBINE = 2  # axial induction, yaw angle


@dataclass
class ModelConfig:
    """Dimensionality, discretization and turbine layout."""

    n_d: int = 2
    n_r: int = 60
    n_e: int = 2
    h: float = 0.2
    sigma: float = 0.1
    n_u: int = 9
    rotor_area: float = 1.0
    ct1: float = rotor.DEFAULT_CT1
    turbine_positions: np.ndarray = field(
        default_factory=lambda: np.array([[0.0, 0.0], [5.0, 0.0]])
    )
    turbine_is_virtual: tuple = (False, True)

    def __post_init__(self):
        self.turbine_positions = np.atleast_2d(
            np.asarray(self.turbine_positions, dtype=float)
        )
        self.turbine_is_virtual = tuple(bool(v) for v in self.turbine_is_virtual)
        if self.n_d not in (2, 3):
            raise ValueError(f"n_d must be 2 or 3, got {self.n_d}")
        if self.n_d == 2 and self.n_e != 2:
            raise ValueError("2D wakes shed exactly two vortex points per ring")
        if self.n_r < 2:
            raise ValueError("need at least two rings")
        if self.h <= 0 or self.sigma <= 0:
            raise ValueError("h and sigma must be positive")
        if self.turbine_positions.shape != (self.n_t, self.n_d):
            raise ValueError("turbine_positions shape must be (n_t, n_d)")
        if sum(not v for v in self.turbine_is_virtual) != 1:
            raise ValueError("exactly one turbine must shed vorticity (non-virtual)")

    @classmethod
    def defaults_2d(cls) -> "ModelConfig":
        return cls()

    @classmethod
    def defaults_3d(cls) -> "ModelConfig":
        return cls(
            n_d=3,
            n_r=40,
            n_e=16,
            h=0.3,
            sigma=0.16,
            n_u=64,
            rotor_area=np.pi / 4.0,
            turbine_positions=np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]]),
            turbine_is_virtual=(False, True),
        )

    @property
    def n_p(self) -> int:
        return self.n_e if self.n_d == 2 else self.n_e + 1

    @property
    def n_t(self) -> int:
        return len(self.turbine_is_virtual)

    @property
    def n_c(self) -> int:
        return CONTROLS_PER_TURBINE

    @property
    def n_m_full(self) -> int:
        return self.n_t * self.n_c

    @property
    def n_s(self) -> int:
        return 2 * self.n_r * self.n_p * self.n_d + self.n_r * self.n_e + self.n_m_full

    @property
    def shed_turbine(self) -> int:
        return self.turbine_is_virtual.index(False)

    @property
    def slices(self):
        """Slices of the flat state vector for the X, G, U, M blocks."""
        nx = self.n_r * self.n_p * self.n_d
        ng = self.n_r * self.n_e
        return (
            slice(0, nx),
            slice(nx, nx + ng),
            slice(nx + ng, 2 * nx + ng),
            slice(2 * nx + ng, 2 * nx + ng + self.n_m_full),
        )

    def element_signs(self) -> np.ndarray:
        """Orientation of each element within a ring.

        The 2D pair represents the two cross-sections of a ring: the
        upper point carries positive and the lower point negative
        circulation so a positive shed value produces a momentum deficit
        behind the rotor. 3D rings encode orientation geometrically.
        """
        if self.n_d == 2:
            return np.array([1.0, -1.0])
        return np.ones(self.n_e)

    def to_dict(self) -> dict:
        return {
            "n_d": self.n_d,
            "n_r": self.n_r,
            "n_e": self.n_e,
            "h": self.h,
            "sigma": self.sigma,
            "n_u": self.n_u,
            "rotor_area": self.rotor_area,
            "ct1": self.ct1,
            "turbine_positions": self.turbine_positions.tolist(),
            "turbine_is_virtual": list(self.turbine_is_virtual),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {
            "n_d", "n_r", "n_e", "h", "sigma", "n_u", "rotor_area", "ct1",
            "turbine_positions", "turbine_is_virtual",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        base = cls.defaults_3d() if data.get("n_d") == 3 else cls.defaults_2d()
        merged = base.to_dict()
        merged.update(data)
        merged["turbine_positions"] = np.asarray(merged["turbine_positions"], float)
        merged["turbine_is_virtual"] = tuple(merged["turbine_is_virtual"])
        return cls(**merged)


@dataclass
class WakeState:
    """One snapshot of the wake: q = [X | G | U | M]."""

    x: np.ndarray  # (n_r, n_p, n_d)
    gamma: np.ndarray  # (n_r, n_e)
    u: np.ndarray  # (n_r, n_p, n_d)
    m: np.ndarray  # (n_t * n_c,), controls saved from the previous step

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.x.ravel(), self.gamma.ravel(), self.u.ravel(), self.m.ravel()]
        )

    @staticmethod
    def from_vector(vec: np.ndarray, config: ModelConfig) -> "WakeState":
        sx, sg, su, sm = config.slices
        shape = (config.n_r, config.n_p, config.n_d)
        return WakeState(
            x=vec[sx].reshape(shape).copy(),
            gamma=vec[sg].reshape(config.n_r, config.n_e).copy(),
            u=vec[su].reshape(shape).copy(),
            m=vec[sm].copy(),
        )

    def copy(self) -> "WakeState":
        return WakeState(self.x.copy(), self.gamma.copy(), self.u.copy(), self.m.copy())


@dataclass
class InflowScenario:
    """Spatially uniform free stream, optionally rotating in time.

    The direction angle follows a cosine-smoothed ramp between the start
    and end angles; the velocity vector uses the same rotation convention
    as turbine yaw, so a turbine with psi equal to the wind angle faces
    the flow exactly.
    """

    kind: str = "uniform"
    magnitude: float = 1.0
    start_angle: float = 0.0  # radians
    end_angle: float = 0.0
    ramp_start: float = 5.0  # time units after simulation start
    ramp_duration: float = 10.0

    def __post_init__(self):
        if self.kind not in ("uniform", "rotating"):
            raise ValueError(f"unknown inflow kind {self.kind!r}")
        if self.magnitude <= 0:
            raise ValueError("inflow magnitude must be positive")

    def direction(self, k: int, h: float) -> float:
        if self.kind == "uniform":
            return self.start_angle
        t = k * h
        s = (t - self.ramp_start) / self.ramp_duration
        s = min(max(s, 0.0), 1.0)
        blend = 0.5 * (1.0 - np.cos(np.pi * s))
        return self.start_angle + (self.end_angle - self.start_angle) * blend

    def velocity(self, k: int, h: float, n_d: int) -> np.ndarray:
        return self.magnitude * rotor.normal_vector(self.direction(k, h), n_d)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "magnitude": self.magnitude,
            "start_angle": self.start_angle,
            "end_angle": self.end_angle,
            "ramp_start": self.ramp_start,
            "ramp_duration": self.ramp_duration,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InflowScenario":
        known = {
            "kind", "magnitude", "start_angle", "end_angle",
            "ramp_start", "ramp_duration",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# Flow evaluation
# ---------------------------------------------------------------------------


def element_sources(x: np.ndarray, gamma: np.ndarray, config: ModelConfig):
    """Flatten the ring arrays into kernel source arrays.

    2D: (positions (n_r*n_e, 2), signed circulations). 3D: (start, end,
    circulations) where element j of a ring spans points (j-1, j).
    """
    signs = config.element_signs()
    gam = (gamma * signs[None, :]).ravel()
    if config.n_d == 2:
        return x.reshape(-1, 2), gam
    start = x[:, :-1, :].reshape(-1, 3)
    end = x[:, 1:, :].reshape(-1, 3)
    return start, end, gam


def total_induced_velocity(points, state: WakeState, config: ModelConfig) -> np.ndarray:
    """Velocity induced by every vortex element, at each query point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if config.n_d == 2:
        pos, gam = element_sources(state.x, state.gamma, config)
        return kernels.induced_sum_2d(points, pos, gam, config.sigma)
    start, end, gam = element_sources(state.x, state.gamma, config)
    return kernels.induced_sum_3d(points, start, end, gam, config.sigma)


def freestream_weights(points, state: WakeState, config: ModelConfig) -> np.ndarray:
    """Normalized interpolation weights onto the stored-inflow points,
    shape (n_points, n_r * n_p). Falls back to a uniform average where
    every weight underflows."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    stored = state.x.reshape(-1, config.n_d)
    diff = points[:, None, :] - stored[None, :, :]
    d2 = np.einsum("npd,npd->np", diff, diff)
    w = np.exp(-W_DECAY * d2)
    total = w.sum(axis=1)
    zero = total <= 0.0
    if np.any(zero):
        w[zero] = 1.0
        total = w.sum(axis=1)
    return w / total[:, None]


def freestream_at(points, state: WakeState, config: ModelConfig) -> np.ndarray:
    """Local free-stream velocity: distance-weighted average of the
    inflow velocities stored on the wake points."""
    wbar = freestream_weights(points, state, config)
    return wbar @ state.u.reshape(-1, config.n_d)


def rotor_velocity(state: WakeState, turbine: int, psi: float, config: ModelConfig) -> np.ndarray:
    """Disc-averaged velocity over the rotor sample points."""
    pts = rotor.disc_points(
        config.n_u, psi, config.turbine_positions[turbine], config.n_d
    )
    flow = freestream_at(pts, state, config) + total_induced_velocity(pts, state, config)
    return flow.mean(axis=0)


# ---------------------------------------------------------------------------
# State update and output
# ---------------------------------------------------------------------------


def step(state: WakeState, m, inflow: InflowScenario, k: int, config: ModelConfig) -> WakeState:
    """Advance the wake one time step under control vector m."""
    m = np.asarray(m, dtype=float).ravel()
    t0 = config.shed_turbine
    a, psi = m[t0 * 2], m[t0 * 2 + 1]

    u_r = rotor_velocity(state, t0, psi, config)
    gamma0 = rotor.shed_circulation(a, psi, u_r, config.h, config.ct1)

    moving = state.x[:-1].reshape(-1, config.n_d)
    u_ind = total_induced_velocity(moving, state, config)
    advected = state.x[:-1] + config.h * (
        state.u[:-1] + u_ind.reshape(state.x[:-1].shape)
    )

    x_new = np.empty_like(state.x)
    x_new[0] = rotor.new_ring_positions(
        psi, config.n_d, config.n_e, config.turbine_positions[t0]
    )
    x_new[1:] = advected

    gamma_new = np.empty_like(state.gamma)
    gamma_new[0] = gamma0
    gamma_new[1:] = state.gamma[:-1]

    u_new = np.empty_like(state.u)
    u_new[0] = inflow.velocity(k, config.h, config.n_d)
    u_new[1:] = state.u[:-1]

    return WakeState(x=x_new, gamma=gamma_new, u=u_new, m=m.copy())


def output(state: WakeState, config: ModelConfig) -> np.ndarray:
    """Per-turbine power, computed from the controls saved in the state."""
    powers = np.empty(config.n_t)
    for t in range(config.n_t):
        a, psi = state.m[t * 2], state.m[t * 2 + 1]
        u_r = rotor_velocity(state, t, psi, config)
        powers[t] = rotor.turbine_power(
            u_r, a, psi, config.turbine_is_virtual[t], config.rotor_area
        )
    return powers


def empty_state(config: ModelConfig, inflow: InflowScenario, m0) -> WakeState:
    """Wake-free initial state: rings collapsed onto the rotor edge with
    zero circulation and the inflow velocity stored everywhere."""
    m0 = np.asarray(m0, dtype=float).ravel()
    t0 = config.shed_turbine
    psi = m0[t0 * 2 + 1]
    ring = rotor.new_ring_positions(
        psi, config.n_d, config.n_e, config.turbine_positions[t0]
    )
    x = np.tile(ring, (config.n_r, 1, 1))
    u = np.tile(
        inflow.velocity(0, config.h, config.n_d), (config.n_r, config.n_p, 1)
    )
    gamma = np.zeros((config.n_r, config.n_e))
    return WakeState(x=x, gamma=gamma, u=u, m=m0.copy())


def spin_up(
    config: ModelConfig,
    inflow: InflowScenario,
    m_const,
    n_steps: int | None = None,
    k_index: int = 0,
) -> WakeState:
    """Run the model to steady conditions under constant controls.

    The inflow is frozen at step k_index so the settled state represents
    conditions before any scheduled wind change.
    """
    if n_steps is None:
        n_steps = 3 * config.n_r
    if n_steps < config.n_r:
        raise ValueError("spin-up must run at least n_r steps to fill the wake")
    state = empty_state(config, inflow, m_const)
    for _ in range(n_steps):
        state = step(state, m_const, inflow, k_index, config)
    return state


# ---------------------------------------------------------------------------
# Snapshot serialization
# ---------------------------------------------------------------------------


def save_state(path, state: WakeState, config: ModelConfig) -> None:
    """Write a snapshot: one JSON header line, then the flat state vector
    as raw little-endian float64 bytes (bit-exact round trip)."""
    vec = np.ascontiguousarray(state.to_vector(), dtype="<f8")
    header = {"config": config.to_dict(), "dtype": "<f8", "length": int(vec.size)}
    with open(path, "wb") as f:
        f.write(json.dumps(header).encode("utf-8"))
        f.write(b"\n")
        f.write(vec.tobytes())


def load_state(path):
    """Read a snapshot written by save_state; returns (state, config)."""
    with open(path, "rb") as f:
        header = json.loads(f.readline().decode("utf-8"))
        raw = f.read()
    config = ModelConfig.from_dict(header["config"])
    vec = np.frombuffer(raw, dtype=header["dtype"], count=header["length"]).astype(
        float
    )
    if vec.size != config.n_s:
        raise ValueError(
            f"snapshot length {vec.size} does not match state size {config.n_s}"
        )
    return WakeState.from_vector(vec, config), config
