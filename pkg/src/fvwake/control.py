"""Receding-horizon power optimization.

The objective trades total power (weighted negative so minimization
maximizes power) against control-move regularization. Gradients come
from the adjoint engine; the optimizer is Adam on scaled parameters with
projection onto the control bounds after every update. The outer loop
implements the first control of each optimized window, advances the
plant one step, and warm-starts the next window with the shifted
schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import adjoint, model
from .model import InflowScenario, ModelConfig, WakeState

A_BOUNDS = (0.0, 0.5)
PSI_BOUNDS = (-np.pi / 2.0, np.pi / 2.0)


class NumericalFailure(RuntimeError):
    """Simulation state became non-finite during a control run."""

    def __init__(self, step: int):
        super().__init__(f"non-finite state at plant step {step}")
        self.step = step


def clamp_controls(values: np.ndarray) -> np.ndarray:
    """Project control vectors onto the admissible box.

    Works on any array whose last axis is the full control layout
    (induction on even slots, yaw on odd slots).
    """
    out = np.array(values, dtype=float)
    out[..., 0::2] = np.clip(out[..., 0::2], *A_BOUNDS)
    out[..., 1::2] = np.clip(out[..., 1::2], *PSI_BOUNDS)
    return out


def shift_schedule(schedule: np.ndarray) -> np.ndarray:
    """Warm start for the next window: drop the implemented first entry
    and duplicate the tail."""
    return np.vstack([schedule[1:], schedule[-1:]])


@dataclass
class ObjectiveConfig:
    """Weights and free-control selection for the horizon objective."""

    q_weights: np.ndarray  # (n_t,), non-positive so minimization maximizes power
    r_matrix: np.ndarray  # (n_m, n_m) move penalty on the free controls
    horizon: int
    free_idx: np.ndarray  # indices into the full control vector

    def __post_init__(self):
        self.q_weights = np.asarray(self.q_weights, dtype=float).ravel()
        self.free_idx = np.asarray(self.free_idx, dtype=int).ravel()
        r = np.asarray(self.r_matrix, dtype=float)
        if r.ndim == 0:
            r = r.reshape(1, 1)
        elif r.ndim == 1:
            r = np.diag(r)
        self.r_matrix = r
        n_m = self.free_idx.size
        if self.r_matrix.shape != (n_m, n_m):
            raise ValueError("r_matrix must be square over the free controls")
        if np.any(self.q_weights > 0.0):
            raise ValueError("output weights must be <= 0 (power is maximized)")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        eigs = np.linalg.eigvalsh(0.5 * (self.r_matrix + self.r_matrix.T))
        if eigs.min() < -1e-12:
            raise ValueError("r_matrix must be positive semidefinite")

    def delta_m(self, m_k: np.ndarray, m_saved: np.ndarray) -> np.ndarray:
        return (np.asarray(m_k) - np.asarray(m_saved))[self.free_idx]

    def term_value(self, y: np.ndarray, m_k, m_saved) -> float:
        """One step of the objective: Q y + dm^T R dm, with dm measured
        against the controls saved in the state."""
        dm = self.delta_m(m_k, m_saved)
        return float(self.q_weights @ y + dm @ self.r_matrix @ dm)

    def term_with_partials(self, y, dy_dq, m_k, m_saved, config: ModelConfig):
        """Objective term plus its state and control partials.

        The move penalty couples to the state through the saved-control
        block (the previous control lives in the state), which is what
        feeds the cross term into the costate recursion.
        """
        dm = self.delta_m(m_k, m_saved)
        j_term = float(self.q_weights @ y + dm @ self.r_matrix @ dm)
        dj_dq = self.q_weights @ dy_dq
        rterm = 2.0 * dm @ self.r_matrix
        sm = config.slices[3]
        dj_dq[sm.start + self.free_idx] -= rterm
        dj_dm = np.zeros(config.n_m_full)
        dj_dm[self.free_idx] = rterm
        return j_term, dj_dq, dj_dm


@dataclass
class AdamConfig:
    """Adam settings plus the yaw parameter scaling.

    Yaw spans a much wider numeric range than induction, so the
    optimizer works on yaw expressed in hundredths of a degree-scale
    units: optimizer value = yaw[deg] * yaw_scale. With the default
    1e-2 scale one Adam step moves yaw by about 0.1 degree.
    """

    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    iterations: int = 50
    yaw_scale: float = 1e-2

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("decay rates must lie in [0, 1)")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")

    def scales(self, free_idx) -> np.ndarray:
        """Physical units per optimizer unit for each free control."""
        free_idx = np.asarray(free_idx, dtype=int)
        s = np.ones(free_idx.size)
        s[free_idx % 2 == 1] = (np.pi / 180.0) / self.yaw_scale
        return s


@dataclass
class AdamMoments:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "AdamMoments":
        return cls(m=np.zeros(shape), v=np.zeros(shape))


def adam_step(params, grad, moments: AdamMoments, t: int, cfg: AdamConfig, free_idx):
    """One bias-corrected Adam update on scaled parameters, followed by
    projection onto the control bounds.

    params holds the free-control columns (..., n_free); free_idx maps
    them back to full-layout slots, which fixes both the per-control
    scaling and the bounds.
    """
    if t < 1:
        raise ValueError("iteration counter starts at 1")
    free_idx = np.asarray(free_idx, dtype=int)
    scales = cfg.scales(free_idx)
    p = np.asarray(params, dtype=float) / scales
    g = np.asarray(grad, dtype=float) * scales
    moments.m = cfg.beta1 * moments.m + (1.0 - cfg.beta1) * g
    moments.v = cfg.beta2 * moments.v + (1.0 - cfg.beta2) * g**2
    m_hat = moments.m / (1.0 - cfg.beta1**t)
    v_hat = moments.v / (1.0 - cfg.beta2**t)
    p = p - cfg.alpha * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    out = p * scales
    yaw = free_idx % 2 == 1
    out[..., ~yaw] = np.clip(out[..., ~yaw], *A_BOUNDS)
    out[..., yaw] = np.clip(out[..., yaw], *PSI_BOUNDS)
    return out, moments


def optimize_horizon(
    state: WakeState,
    init_schedule: np.ndarray,
    iters: int,
    objective: ObjectiveConfig,
    adam_cfg: AdamConfig,
    inflow: InflowScenario,
    config: ModelConfig,
    k0: int = 0,
):
    """Adam descent on the horizon objective from a warm-start schedule.

    Returns (best_schedule, j_history). The best iterate by objective
    value is returned rather than the last one; Adam may overshoot.
    j_history holds the objective at each visited iterate including the
    final one.
    """
    if iters == 0:
        return np.array(init_schedule, dtype=float), []
    sched = clamp_controls(init_schedule)
    free = objective.free_idx
    moments = AdamMoments.zeros((sched.shape[0], free.size))
    best_j = np.inf
    best = sched.copy()
    history = []
    for t in range(1, iters + 1):
        j_val, grad, _ = adjoint.objective_gradient(
            state, sched, inflow, objective, config, k0
        )
        history.append(j_val)
        if j_val < best_j:
            best_j = j_val
            best = sched.copy()
        stepped, moments = adam_step(sched[:, free], grad, moments, t, adam_cfg, free)
        sched[:, free] = stepped
    j_final, _ = adjoint.simulate_objective(state, sched, inflow, objective, config, k0)
    history.append(j_final)
    if j_final < best_j:
        best_j = j_final
        best = sched.copy()
    return best, history


@dataclass
class EmpcConfig:
    """Outer receding-horizon loop settings."""

    total_steps: int
    iterations: int
    init_perturbation: float = 0.0
    snapshot_every: int = 0  # 0 disables snapshot collection

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class EmpcTrajectory:
    """Implemented controls, realized outputs and diagnostics per step."""

    times: np.ndarray  # (n_steps,)
    controls: np.ndarray  # (n_steps, n_m_full), implemented
    outputs: np.ndarray  # (n_steps, n_t), realized after each step
    j_values: np.ndarray  # (n_steps,), best window objective per step
    snapshots: list  # (step index, WakeState)
    preopt_schedules: list  # schedule handed to the optimizer per step


def empc_run(
    state0: WakeState,
    objective: ObjectiveConfig,
    adam_cfg: AdamConfig,
    empc_cfg: EmpcConfig,
    inflow: InflowScenario,
    config: ModelConfig,
    base_controls,
    seed=None,
) -> EmpcTrajectory:
    """Receding-horizon loop: optimize, implement the first control,
    advance the plant, shift.

    base_controls(k) supplies the full control vector at absolute step
    k: fixed slots are taken from it every window (they may track the
    scenario), free slots seed the very first schedule. A nonzero
    init_perturbation adds seeded noise to the free columns of that
    first schedule.
    """
    n_h = objective.horizon
    sched = np.array([base_controls(k) for k in range(n_h + 1)], dtype=float)
    if empc_cfg.init_perturbation > 0.0:
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, empc_cfg.init_perturbation, (n_h + 1, objective.free_idx.size))
        sched[:, objective.free_idx] += noise
        sched = clamp_controls(sched)

    state = state0
    fixed = np.setdiff1d(np.arange(config.n_m_full), objective.free_idx)
    times = np.empty(empc_cfg.total_steps)
    controls = np.empty((empc_cfg.total_steps, config.n_m_full))
    outputs = np.empty((empc_cfg.total_steps, config.n_t))
    j_values = np.full(empc_cfg.total_steps, np.nan)
    snapshots = []
    preopt = []

    for k0 in range(empc_cfg.total_steps):
        window = np.array(
            [base_controls(k0 + i) for i in range(n_h + 1)], dtype=float
        )
        sched[:, fixed] = window[:, fixed]
        preopt.append(sched.copy())
        if empc_cfg.iterations > 0:
            sched, history = optimize_horizon(
                state, sched, empc_cfg.iterations, objective, adam_cfg,
                inflow, config, k0,
            )
            j_values[k0] = min(history)
        m_impl = sched[0].copy()
        state = model.step(state, m_impl, inflow, k0, config)
        y = model.output(state, config)
        if not (np.all(np.isfinite(state.to_vector())) and np.all(np.isfinite(y))):
            raise NumericalFailure(k0)
        times[k0] = (k0 + 1) * config.h
        controls[k0] = m_impl
        outputs[k0] = y
        if empc_cfg.snapshot_every and (k0 + 1) % empc_cfg.snapshot_every == 0:
            snapshots.append((k0 + 1, state.copy()))
        sched = shift_schedule(sched)

    return EmpcTrajectory(
        times=times,
        controls=controls,
        outputs=outputs,
        j_values=j_values,
        snapshots=snapshots,
        preopt_schedules=preopt,
    )


def dominant_frequency(signal, h: float) -> float:
    """Frequency of the strongest non-constant spectral line.

    Mean-removed periodogram by direct discrete Fourier transform;
    resolution is 1/(len(signal)*h). Raises on constant signals.
    """
    x = np.asarray(signal, dtype=float)
    if x.size < 16:
        raise ValueError("signal too short for a meaningful spectrum")
    x = x - x.mean()
    power = np.abs(np.fft.rfft(x)) ** 2
    if power[1:].max() <= 0.0:
        raise ValueError("constant signal has no dominant frequency")
    freqs = np.fft.rfftfreq(x.size, d=h)
    return float(freqs[1 + np.argmax(power[1:])])
