"""Experiment drivers: steady sweeps, convergence tables, gradient
verification, receding-horizon runs and flow-field export.

Every driver is callable from the CLI with defaults that reproduce the
reference two-turbine cases, and writes plot-ready CSV/JSON files.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from . import adjoint, control, model, rotor
from .config import ExperimentConfig
from .model import InflowScenario, ModelConfig


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# Steady-state evaluation
# ---------------------------------------------------------------------------


def steady_powers(
    cfg: ModelConfig,
    inflow: InflowScenario,
    m_const,
    spin_steps: int | None = None,
    avg_steps: int = 20,
):
    """Time-averaged turbine powers after spinning up to steady state."""
    state = model.spin_up(cfg, inflow, m_const, spin_steps)
    outputs = []
    for _ in range(avg_steps):
        state = model.step(state, m_const, inflow, 0, cfg)
        outputs.append(model.output(state, cfg))
    return np.mean(outputs, axis=0), state


@dataclass
class SweepResult:
    parameter: str
    values: np.ndarray
    powers: np.ndarray  # (n_values, n_t)

    @property
    def totals(self) -> np.ndarray:
        return self.powers.sum(axis=1)

    def rows(self):
        for v, p in zip(self.values, self.powers):
            yield [v, *p, p.sum()]


def _sweep_point(args):
    cfg, inflow, m, spin_steps = args
    p, _ = steady_powers(cfg, inflow, m, spin_steps)
    return p


def _run_sweep(cfg, inflow, base_m, slot, values, spin_steps, threads):
    jobs = []
    for v in values:
        m = np.array(base_m, dtype=float)
        m[slot] = v
        jobs.append((cfg, inflow, m, spin_steps))
    if threads > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(threads) as pool:
            powers = pool.map(_sweep_point, jobs)
    else:
        powers = [_sweep_point(j) for j in jobs]
    return np.array(powers)


def run_sweep_induction(
    exp: ExperimentConfig, a_grid=None, out_dir=None, threads: int = 1
) -> SweepResult:
    """Steady power versus upstream induction (downstream greedy)."""
    if a_grid is None:
        a_grid = np.arange(0.0, 0.5 + 1e-12, 0.025)
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.min() < 0.0 or a_grid.max() > 0.5:
        raise ValueError("induction grid must lie within [0, 0.5]")
    cfg = exp.model
    slot = 2 * cfg.shed_turbine
    powers = _run_sweep(
        cfg, exp.scenario, exp.base_controls(0), slot, a_grid,
        exp.optimizer.spin_up_steps, threads,
    )
    res = SweepResult("a", a_grid, powers)
    if out_dir is not None:
        header = ["a"] + [f"p{t}" for t in range(cfg.n_t)] + ["p_total"]
        _write_csv(os.path.join(out_dir, "sweep_induction.csv"), header, res.rows())
    return res


def run_sweep_yaw(
    exp: ExperimentConfig, psi_grid=None, out_dir=None, threads: int = 1
) -> SweepResult:
    """Steady power versus upstream yaw (upstream induction greedy)."""
    if psi_grid is None:
        psi_grid = np.deg2rad(np.arange(-45.0, 45.0 + 1e-9, 5.0))
    psi_grid = np.asarray(psi_grid, dtype=float)
    if np.any(np.abs(psi_grid) > np.deg2rad(45.0) + 1e-9):
        raise ValueError("yaw grid must lie within [-45 deg, 45 deg]")
    cfg = exp.model
    base = exp.base_controls(0)
    base[2 * cfg.shed_turbine] = 0.33
    slot = 2 * cfg.shed_turbine + 1
    powers = _run_sweep(
        cfg, exp.scenario, base, slot, psi_grid,
        exp.optimizer.spin_up_steps, threads,
    )
    res = SweepResult("psi", psi_grid, powers)
    if out_dir is not None:
        header = ["psi"] + [f"p{t}" for t in range(cfg.n_t)] + ["p_total"]
        _write_csv(os.path.join(out_dir, "sweep_yaw.csv"), header, res.rows())
    return res


# ---------------------------------------------------------------------------
# Convergence versus momentum theory
# ---------------------------------------------------------------------------


def reference_powers(a0: float, a1: float, rotor_area: float, u_inf: float = 1.0):
    """Momentum-theory powers of the upstream turbine and of a downstream
    turbine in the fully developed wake."""
    p0 = 0.5 * rotor.power_coefficient(a0) * rotor_area * (u_inf * (1.0 - a0)) ** 3
    p1 = (
        0.5
        * rotor.power_coefficient(a1)
        * rotor_area
        * (u_inf * (1.0 - 2.0 * a0) * (1.0 - a1)) ** 3
    )
    return p0, p1


def normalized_steady_powers(cfg: ModelConfig, a0: float = 0.3, a1: float = 0.33):
    """Steady powers normalized by the momentum-theory references."""
    inflow = InflowScenario()
    m = np.zeros(cfg.n_m_full)
    m[2 * cfg.shed_turbine] = a0
    for t in range(cfg.n_t):
        if cfg.turbine_is_virtual[t]:
            m[2 * t] = a1
    p, _ = steady_powers(cfg, inflow, m)
    p0_ref, p1_ref = reference_powers(a0, a1, cfg.rotor_area)
    t0 = cfg.shed_turbine
    t1 = next(t for t in range(cfg.n_t) if cfg.turbine_is_virtual[t])
    return p[t0] / p0_ref, p[t1] / p1_ref


def run_convergence(exp: ExperimentConfig, out_dir=None):
    """Normalized-power tables over discretization parameter grids.

    Varies (h, sigma) as a cross and n_r (plus n_e in 3D) one at a time
    around the configured operating point, at inductions 0.3 / 0.33.
    """
    cfg = exp.model
    if cfg.n_d == 2:
        h_grid = [0.1, 0.15, 0.2, 0.3]
        s_grid = [0.05, 0.1, 0.16, 0.2]
        nr_grid = [30, 45, 60, 90]
        ne_grid = []
    else:
        h_grid = [0.2, 0.3, 0.4]
        s_grid = [0.12, 0.16, 0.24]
        nr_grid = [20, 30, 40, 60]
        ne_grid = [6, 10, 16, 24]

    rows = []

    def record(c: ModelConfig):
        p0n, p1n = normalized_steady_powers(c)
        rows.append([c.n_d, c.h, c.sigma, c.n_r, c.n_e, p0n, p1n])

    for h in h_grid:
        for s in s_grid:
            record(replace(cfg, h=h, sigma=s))
    for nr in nr_grid:
        record(replace(cfg, n_r=nr))
    for ne in ne_grid:
        record(replace(cfg, n_e=ne))

    if out_dir is not None:
        _write_csv(
            os.path.join(out_dir, "convergence.csv"),
            ["n_d", "h", "sigma", "n_r", "n_e", "p0_norm", "p1_norm"],
            rows,
        )
    return rows


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------

GRADCHECK_TOL = 1e-4
GRADCHECK_FLOOR = 1e-9


def _tiny_case(n_d: int):
    if n_d == 2:
        cfg = ModelConfig(
            n_d=2, n_r=5, n_e=2, h=0.3, sigma=0.12, n_u=5,
            turbine_positions=np.array([[0.0, 0.0], [1.5, 0.0]]),
            turbine_is_virtual=(False, True),
        )
        horizon = 8
    else:
        cfg = ModelConfig(
            n_d=3, n_r=4, n_e=6, h=0.3, sigma=0.16, n_u=16, rotor_area=np.pi / 4,
            turbine_positions=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            turbine_is_virtual=(False, True),
        )
        horizon = 5
    inflow = InflowScenario()
    m0 = np.array([0.30, 0.15, 0.33, -0.1])
    state = model.spin_up(cfg, inflow, m0, 2 * cfg.n_r)
    objective = control.ObjectiveConfig(
        q_weights=[-1.0, -1.0], r_matrix=np.diag([3.0, 0.5]),
        horizon=horizon, free_idx=[0, 1],
    )
    rng = np.random.default_rng(42 + n_d)
    schedule = np.tile(m0, (horizon + 1, 1))
    schedule[:, 0] += rng.normal(0.0, 0.03, horizon + 1)
    schedule[:, 1] += rng.normal(0.0, 0.08, horizon + 1)
    return cfg, inflow, state, objective, schedule


def gradient_check(n_d: int, corrupt: str | None = None):
    """Adjoint-versus-central-difference comparison on a tiny case.

    corrupt names a Jacobian block to zero on every step (fault
    injection; the check must then fail). Returns (max_rel_err, passed).
    """
    cfg, inflow, state, objective, schedule = _tiny_case(n_d)
    hook = None
    if corrupt is not None:
        def hook(i, jac):
            blk = getattr(jac, corrupt)
            if np.isscalar(blk):
                setattr(jac, corrupt, 0.0)
            else:
                blk[...] = 0.0

    j_total, tape = adjoint.forward_with_tape(
        state, schedule, inflow, objective, cfg, jac_hook=hook
    )
    lambdas = adjoint.backward_sweep(tape, cfg)
    grad = adjoint.gradient(tape, lambdas, cfg, objective.free_idx)
    fd = adjoint.finite_difference_gradient(state, schedule, inflow, objective, cfg)
    rel = np.abs(grad - fd) / np.maximum(np.abs(fd), GRADCHECK_FLOOR)
    max_rel = float(rel.max())
    return max_rel, max_rel <= GRADCHECK_TOL


def run_gradcheck(out_dir=None, corrupt: str | None = None):
    """Gradient verification on the tiny 2D and 3D cases."""
    report = {}
    ok = True
    for n_d in (2, 3):
        err, passed = gradient_check(n_d, corrupt=corrupt)
        report[f"{n_d}d"] = {"max_rel_err": err, "pass": bool(passed)}
        ok = ok and passed
    report["tolerance"] = GRADCHECK_TOL
    report["pass"] = bool(ok)
    if out_dir is not None:
        with open(os.path.join(out_dir, "gradcheck.json"), "w") as f:
            json.dump(report, f, indent=2)
    return report


# ---------------------------------------------------------------------------
# Receding-horizon experiment
# ---------------------------------------------------------------------------


def run_empc(exp: ExperimentConfig, out_dir=None, seed=None):
    """Spin up, run the receding-horizon loop, export trajectory files.

    Returns (trajectory, summary dict).
    """
    cfg = exp.model
    inflow = exp.scenario
    objective = exp.objective.resolve(cfg)
    seed = exp.seed if seed is None else seed

    state0 = model.spin_up(
        cfg, inflow, exp.base_controls(0), exp.optimizer.spin_up_steps
    )
    traj = control.empc_run(
        state0, objective, exp.optimizer.adam_config(),
        exp.optimizer.empc_config(), inflow, cfg, exp.base_controls, seed=seed,
    )
    summary = summarize_trajectory(traj, exp, objective)

    if out_dir is not None:
        header = (
            ["step", "time"]
            + [f"{n}{t}" for t in range(cfg.n_t) for n in ("a", "psi")]
            + [f"p{t}" for t in range(cfg.n_t)]
            + ["j_window"]
        )
        rows = [
            [k, traj.times[k], *traj.controls[k], *traj.outputs[k], traj.j_values[k]]
            for k in range(len(traj.times))
        ]
        _write_csv(os.path.join(out_dir, "trajectory.csv"), header, rows)
        for step_idx, snap in traj.snapshots:
            model.save_state(
                os.path.join(out_dir, f"snapshot_{step_idx:05d}.bin"), snap, cfg
            )
        with open(os.path.join(out_dir, "summary.json"), "w") as f:
            json.dump(summary, f, indent=2)
    return traj, summary


def summarize_trajectory(traj, exp: ExperimentConfig, objective) -> dict:
    """Run statistics: mean power and control behaviour over the settled
    window, dominant frequency of the first free control signal."""
    cfg = exp.model
    t_start = exp.optimizer.stats_window_start
    sel = traj.times > t_start
    total = traj.outputs.sum(axis=1)
    free0 = objective.free_idx[0]
    signal = traj.controls[:, free0]
    summary = {
        "mean_total_power": float(total[sel].mean()) if sel.any() else None,
        "stats_window_start": t_start,
        "mean_free_control": float(signal[sel].mean()) if sel.any() else None,
        "final_free_control": float(signal[-1]),
        "seed": exp.seed,
    }
    try:
        late = traj.times > min(5.0, t_start)
        summary["dominant_frequency"] = control.dominant_frequency(
            signal[late], cfg.h
        )
    except ValueError:
        summary["dominant_frequency"] = None
    if exp.optimizer.baseline_power is not None:
        base = exp.optimizer.baseline_power
        summary["baseline_power"] = base
        if summary["mean_total_power"] is not None:
            summary["gain_over_baseline"] = summary["mean_total_power"] / base - 1.0
    return summary


def run_simulate(exp: ExperimentConfig, out_dir=None):
    """Constant-control simulation: spin-up plus total_steps more steps,
    recording the power time series and the final state."""
    cfg = exp.model
    inflow = exp.scenario
    m = exp.base_controls(0)
    state = model.spin_up(cfg, inflow, m, exp.optimizer.spin_up_steps)
    rows = []
    for k in range(exp.optimizer.total_steps):
        m_k = exp.base_controls(k)
        state = model.step(state, m_k, inflow, k, cfg)
        y = model.output(state, cfg)
        if not np.all(np.isfinite(y)):
            raise control.NumericalFailure(k)
        rows.append([k, (k + 1) * cfg.h, *m_k, *y, y.sum()])
    if out_dir is not None:
        header = (
            ["step", "time"]
            + [f"{n}{t}" for t in range(cfg.n_t) for n in ("a", "psi")]
            + [f"p{t}" for t in range(cfg.n_t)]
            + ["p_total"]
        )
        _write_csv(os.path.join(out_dir, "simulate.csv"), header, rows)
        model.save_state(os.path.join(out_dir, "final_state.bin"), state, cfg)
    return state, np.array([r[1:] for r in rows])


# ---------------------------------------------------------------------------
# Flow-field sampling
# ---------------------------------------------------------------------------


def sample_flowfield(
    state, cfg: ModelConfig, xlim=(-1.0, 8.0), ylim=(-2.0, 2.0),
    nx: int = 240, ny: int = 80, z_levels=None, chunk: int = 4096,
):
    """Velocity on a regular x-y grid; 3D fields are averaged over a set
    of z-levels spanning the rotor. Returns (xs, ys, u) with u of shape
    (ny, nx, n_d)."""
    xs = np.linspace(*xlim, nx)
    ys = np.linspace(*ylim, ny)
    gx, gy = np.meshgrid(xs, ys)
    base = np.column_stack([gx.ravel(), gy.ravel()])
    if cfg.n_d == 2:
        layers = [base]
    else:
        if z_levels is None:
            z_levels = np.linspace(-0.4, 0.4, 5)
        layers = [
            np.column_stack([base, np.full(base.shape[0], z)]) for z in z_levels
        ]
    acc = np.zeros((base.shape[0], cfg.n_d))
    for pts in layers:
        for lo in range(0, pts.shape[0], chunk):
            sl = slice(lo, min(lo + chunk, pts.shape[0]))
            acc[sl] += model.freestream_at(pts[sl], state, cfg)
            acc[sl] += model.total_induced_velocity(pts[sl], state, cfg)
    acc /= len(layers)
    return xs, ys, acc.reshape(ny, nx, cfg.n_d)


def run_flowfield(
    snapshot_path, out_path, xlim=(-1.0, 8.0), ylim=(-2.0, 2.0),
    nx: int = 240, ny: int = 80, z_levels=None,
):
    """Sample the velocity field of a saved snapshot onto a CSV grid."""
    state, cfg = model.load_state(snapshot_path)
    xs, ys, u = sample_flowfield(state, cfg, xlim, ylim, nx, ny, z_levels)
    rows = []
    for iy in range(ys.size):
        for ix in range(xs.size):
            rows.append([xs[ix], ys[iy], *u[iy, ix]])
    header = ["x", "y"] + [f"u_{c}" for c in "xyz"[: cfg.n_d]]
    _write_csv(out_path, header, rows)
    return xs, ys, u
