"""Discrete-adjoint gradient engine.

A forward pass records, per step, the sparse block structure of the
state-update Jacobian df/dq, the input Jacobian df/dm, and the objective
partials. A backward sweep then propagates costate vectors from the
horizon to the start, and the gradient of the accumulated objective with
respect to every control in the schedule follows from one contraction
per step. Cost is one taped forward plus one backward pass, independent
of the number of controls.

Only blocks that can be nonzero are stored; everything else (stored
inflow rows, saved-control rows, ring-0 position rows) is structurally
zero and handled implicitly by the sweep. Degenerate kernel geometries
contribute zero, mirroring the forward convention, and are tallied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast, kernels, model, rotor
from .model import InflowScenario, ModelConfig, WakeState, W_DECAY


@dataclass
class StepJacobian:
    """Nonzero blocks of df/dq and df/dm for one step.

    xx rows cover the transported rings (rings 1..n_r-1 at the next
    step); the identity carry-over and the self-influence of the induced
    velocity at the moving point are folded into the matching diagonal
    blocks. The new ring's circulation row is identical for every
    element, so it is stored once.
    """

    xx: np.ndarray  # ((n_r-1)*n_p*n_d, n_r*n_p*n_d)
    xg: np.ndarray  # ((n_r-1)*n_p*n_d, n_r*n_e)
    g0_x: np.ndarray  # (n_r*n_p*n_d,)
    g0_g: np.ndarray  # (n_r*n_e,)
    g0_u: np.ndarray  # (n_r*n_p*n_d,)
    g0_a: float
    g0_psi: float
    x0_psi: np.ndarray  # (n_p*n_d,)
    n_degenerate: int


@dataclass
class TapeRecord:
    """Everything recorded at one step of the horizon."""

    y: np.ndarray  # (n_t,)
    j_term: float
    dj_dq: np.ndarray  # (n_s,)
    dj_dm: np.ndarray  # (n_m_full,)
    jac: StepJacobian | None  # None on the final step (no update taken)


@dataclass
class AdjointTape:
    records: list
    n_degenerate: int

    @property
    def horizon(self) -> int:
        return len(self.records) - 1

    def outputs(self) -> np.ndarray:
        return np.array([rec.y for rec in self.records])


# ---------------------------------------------------------------------------
# Pairwise partials in state-Jacobian layout
# ---------------------------------------------------------------------------


def _numpy_scattered_partials(points, state: WakeState, config: ModelConfig):
    """Reference implementation of the scattered partial layout."""
    n = points.shape[0]
    d = config.n_d
    signs = np.tile(config.element_signs(), config.n_r)
    if d == 2:
        pos, gam = model.element_sources(state.x, state.gamma, config)
        du_dr, unit, ndeg = kernels._numpy_kernel_partials_2d_pairs(
            points, pos, gam, config.sigma
        )
        src = du_dr.transpose(0, 2, 1, 3).copy()  # source point j = element j
        eval_sum = -du_dr.sum(axis=1)
        dgamma = (unit * signs[None, :, None]).transpose(0, 2, 1).copy()
        return src, eval_sum, dgamma, ndeg

    start, end, gam = model.element_sources(state.x, state.gamma, config)
    d0, d1, d2, unit, ndeg = kernels._numpy_kernel_partials_3d_pairs(
        points, start, end, gam, config.sigma
    )
    n_r, n_e, n_p = config.n_r, config.n_e, config.n_p
    src = np.zeros((n, d, n_r, n_p, d))
    src[:, :, :, :n_e, :] += d1.reshape(n, n_r, n_e, d, d).transpose(0, 3, 1, 2, 4)
    src[:, :, :, 1:, :] += d2.reshape(n, n_r, n_e, d, d).transpose(0, 3, 1, 2, 4)
    src = src.reshape(n, d, n_r * n_p, d)
    eval_sum = d0.sum(axis=1)
    dgamma = (unit * signs[None, :, None]).transpose(0, 2, 1).copy()
    return src, eval_sum, dgamma, ndeg


def _scattered_partials(points, state: WakeState, config: ModelConfig):
    """Induced-velocity partials for all (query point, element) pairs.

    Returns (src, eval_sum, dgamma, n_degenerate):
      src      (N, n_d, n_r*n_p, n_d)  d(u at point)/d(source positions)
      eval_sum (N, n_d, n_d)           d(u at point)/d(point itself)
      dgamma   (N, n_d, n_r*n_e)       d(u at point)/d(stored circulations)
    """
    if not _fast.HAVE_NUMBA:
        return _numpy_scattered_partials(points, state, config)
    points = np.ascontiguousarray(points, dtype=float)
    signs = np.tile(config.element_signs(), config.n_r)
    if config.n_d == 2:
        pos, gam = model.element_sources(state.x, state.gamma, config)
        src, eval_sum, dgamma, ndeg = _fast.scattered_partials_2d(
            points, np.ascontiguousarray(pos), gam, signs,
            config.sigma, kernels.DEGENERATE_EPS,
        )
    else:
        start, end, gam = model.element_sources(state.x, state.gamma, config)
        src, eval_sum, dgamma, ndeg = _fast.scattered_partials_3d(
            np.ascontiguousarray(points), np.ascontiguousarray(start),
            np.ascontiguousarray(end), gam, signs,
            config.sigma, kernels.DEGENERATE_EPS, config.n_e, config.n_p,
        )
    return src, eval_sum, dgamma, int(ndeg)


# ---------------------------------------------------------------------------
# Disc-averaged velocity sensitivities
# ---------------------------------------------------------------------------


@dataclass
class RotorSensitivity:
    u_r: np.ndarray  # (n_d,)
    d_x: np.ndarray  # (n_d, n_r*n_p*n_d)
    d_g: np.ndarray  # (n_d, n_r*n_e)
    w_mean: np.ndarray  # (n_r*n_p,), d(u_r)/dU is w_mean per point times I
    d_psi: np.ndarray  # (n_d,), through the yawed sampling points
    n_degenerate: int


def _disc_group_sensitivities(state: WakeState, config: ModelConfig, specs):
    """Sensitivities of the disc-averaged velocity for several discs.

    specs is a list of (turbine, psi); all discs share one pairwise
    sweep over the vortex elements and the stored-inflow points.
    """
    d = config.n_d
    n_u = rotor.disc_points(config.n_u, 0.0, np.zeros(d), d).shape[0]
    pts_list = [
        rotor.disc_points(config.n_u, psi, config.turbine_positions[t], d)
        for t, psi in specs
    ]
    dpts_list = [rotor.d_disc_points(config.n_u, psi, d) for _, psi in specs]
    points = np.vstack(pts_list)

    src, eval_sum, dgamma, ndeg = _scattered_partials(points, state, config)

    stored = state.x.reshape(-1, d)
    stored_u = state.u.reshape(-1, d)
    diff = points[:, None, :] - stored[None, :, :]
    d2 = np.einsum("npd,npd->np", diff, diff)
    w = np.exp(-W_DECAY * d2)
    total = w.sum(axis=1)
    zero = total <= 0.0
    if np.any(zero):
        w[zero] = 1.0
        total = w.sum(axis=1)
    wbar = w / total[:, None]
    ufs = wbar @ stored_u
    gam_flat = state.gamma.ravel()

    out = []
    for g, (t, psi) in enumerate(specs):
        sl = slice(g * n_u, (g + 1) * n_u)
        wb = wbar[sl]
        df = diff[sl]
        uf = ufs[sl]
        u_ind = np.einsum("ndm,m->nd", dgamma[sl], gam_flat)
        u_r = (uf + u_ind).mean(axis=0)

        delta = stored_u[None, :, :] - uf[:, None, :]
        dpos = 2.0 * W_DECAY * np.einsum("np,npd,npe->dpe", wb, delta, df)
        if np.any(zero[sl]):
            live = ~zero[sl]
            dpos = 2.0 * W_DECAY * np.einsum(
                "np,npd,npe->dpe", wb[live], delta[live], df[live]
            )
        d_x = (src[sl].sum(axis=0) + dpos).reshape(d, -1) / n_u
        d_g = dgamma[sl].sum(axis=0) / n_u
        w_mean = wb.sum(axis=0) / n_u

        term1 = np.einsum("np,pd,npe->nde", wb, stored_u, df)
        term2 = np.einsum("nd,ne->nde", uf, np.einsum("np,npe->ne", wb, df))
        deval = -2.0 * W_DECAY * (term1 - term2)
        if np.any(zero[sl]):
            deval[zero[sl]] = 0.0
        d_psi = np.einsum("nde,ne->d", eval_sum[sl] + deval, dpts_list[g]) / n_u
        out.append(RotorSensitivity(u_r, d_x, d_g, w_mean, d_psi, ndeg))
    # attribute the pair-degeneracy tally once, not per disc
    for sens in out[1:]:
        sens.n_degenerate = 0
    return out


def rotor_sensitivities(
    state: WakeState, turbine: int, psi: float, config: ModelConfig
) -> RotorSensitivity:
    """Disc-averaged velocity and its derivatives w.r.t. the state and
    the disc yaw angle."""
    return _disc_group_sensitivities(state, config, [(turbine, psi)])[0]


# ---------------------------------------------------------------------------
# Jacobian assembly
# ---------------------------------------------------------------------------


def _shed_blocks(sens: RotorSensitivity, a: float, psi: float, config: ModelConfig):
    """Circulation-row and control blocks for the newly shed ring."""
    d = config.n_d
    h = config.h
    nvec = rotor.normal_vector(psi, d)
    dnvec = rotor.d_normal_vector(psi, d)
    s_proj = float(sens.u_r @ nvec)
    ct = rotor.thrust_coefficient(a, config.ct1)
    coef = h * ct * s_proj  # d(gamma0)/d(u_r . n)

    g0_x = coef * (nvec @ sens.d_x)
    g0_g = coef * (nvec @ sens.d_g)
    g0_u = coef * np.outer(sens.w_mean, nvec).ravel()
    g0_a = h * 0.5 * s_proj**2 * rotor.d_thrust_coefficient(a, config.ct1)
    g0_psi = coef * float(sens.u_r @ dnvec + nvec @ sens.d_psi)
    base = rotor.ring_base_points(d, config.n_e)
    x0_psi = (base @ kernels.d_rotation_z(psi, d).T).ravel()
    return g0_x, g0_g, g0_u, g0_a, g0_psi, x0_psi


def _output_rows(senss, state: WakeState, config: ModelConfig):
    """Dense dy/dq rows from per-turbine disc sensitivities."""
    d = config.n_d
    sx, sg, su, sm = config.slices
    dy_dq = np.zeros((config.n_t, config.n_s))
    for t in range(config.n_t):
        a, psi = state.m[t * 2], state.m[t * 2 + 1]
        virtual = config.turbine_is_virtual[t]
        sens = senss[t]
        nvec = rotor.normal_vector(psi, d)
        dnvec = rotor.d_normal_vector(psi, d)
        scale = (1.0 - a) if virtual else 1.0
        proj = float(sens.u_r @ nvec)
        s_eff = scale * proj
        cp = rotor.power_coefficient(a)
        area = config.rotor_area

        dy_dur = 1.5 * cp * area * s_eff**2 * scale * nvec
        dy_dq[t, sx] = dy_dur @ sens.d_x
        dy_dq[t, sg] = dy_dur @ sens.d_g
        dy_dq[t, su] = np.outer(sens.w_mean, dy_dur).ravel()

        if virtual:
            dp_da = 0.5 * area * proj**3 * (4.0 * (1.0 - a) ** 2 - 8.0 * a * (1.0 - a))
        else:
            dp_da = 0.5 * area * proj**3 * rotor.d_power_coefficient(a)
        dp_dpsi = 1.5 * cp * area * s_eff**2 * scale * float(
            sens.u_r @ dnvec
        ) + float(dy_dur @ sens.d_psi)
        dy_dq[t, sm.start + t * 2] = dp_da
        dy_dq[t, sm.start + t * 2 + 1] = dp_dpsi
    return dy_dq


def _assemble_step(state: WakeState, m, config: ModelConfig, want_step: bool, want_output: bool):
    """Shared per-step assembly: step Jacobian and/or output Jacobian.

    All requested discs (the shedding disc at the commanded yaw plus one
    disc per turbine at the saved yaw) share a single pairwise sweep.

    Returns (jac | None, y | None, dy_dq | None, n_degenerate).
    """
    specs = []
    t0 = config.shed_turbine
    if want_step:
        m = np.asarray(m, dtype=float).ravel()
        a_shed, psi_shed = m[t0 * 2], m[t0 * 2 + 1]
        specs.append((t0, psi_shed))
    if want_output:
        for t in range(config.n_t):
            specs.append((t, state.m[t * 2 + 1]))
    senss = _disc_group_sensitivities(state, config, specs)
    ndeg = sum(s.n_degenerate for s in senss)

    jac = None
    if want_step:
        d = config.n_d
        h = config.h
        targets = state.x[:-1].reshape(-1, d)
        n_tgt = targets.shape[0]
        src, eval_sum, dgamma_t, ndeg_t = _scattered_partials(targets, state, config)
        ndeg += ndeg_t
        src *= h
        tt = np.arange(n_tgt)
        src[tt, :, tt, :] += np.eye(d)[None, :, :] + h * eval_sum
        xx = src.reshape(n_tgt * d, config.n_r * config.n_p * d)
        dgamma_t *= h
        xg = dgamma_t.reshape(n_tgt * d, config.n_r * config.n_e)
        g0_x, g0_g, g0_u, g0_a, g0_psi, x0_psi = _shed_blocks(
            senss[0], a_shed, psi_shed, config
        )
        jac = StepJacobian(
            xx=xx, xg=xg, g0_x=g0_x, g0_g=g0_g, g0_u=g0_u,
            g0_a=g0_a, g0_psi=g0_psi, x0_psi=x0_psi, n_degenerate=ndeg,
        )

    y = dy_dq = None
    if want_output:
        y = model.output(state, config)
        dy_dq = _output_rows(senss[1:] if want_step else senss, state, config)
    return jac, y, dy_dq, ndeg


def step_jacobians(
    state: WakeState, m, inflow: InflowScenario, k: int, config: ModelConfig
) -> StepJacobian:
    """All nonzero blocks of the state-update Jacobians at (state, m).

    The inflow enters the update only through the stored ring-0
    velocity, which carries no state or control dependence for spatially
    uniform scenarios, so no inflow block is recorded.
    """
    jac, _, _, _ = _assemble_step(state, m, config, want_step=True, want_output=False)
    return jac


def output_jacobian(state: WakeState, config: ModelConfig):
    """Power outputs and their dense Jacobian over the full state.

    Returns (y, dy_dq, n_degenerate). The saved-control columns combine
    the direct loading/orientation dependence with the rotation of the
    sampling disc.
    """
    _, y, dy_dq, ndeg = _assemble_step(
        state, None, config, want_step=False, want_output=True
    )
    return y, dy_dq, ndeg


# ---------------------------------------------------------------------------
# Forward pass with tape, backward sweep, gradient
# ---------------------------------------------------------------------------


def forward_with_tape(
    state0: WakeState,
    schedule: np.ndarray,
    inflow: InflowScenario,
    objective,
    config: ModelConfig,
    k0: int = 0,
    jac_hook=None,
):
    """Simulate the horizon, accumulating the objective and the tape.

    schedule has one full control vector per step, shape (N_h+1,
    n_m_full). The objective object supplies per-step values and
    partials (see control.ObjectiveConfig). jac_hook, if given, may
    modify each StepJacobian in place (fault-injection hook for
    verification drivers).

    Returns (j_total, tape).
    """
    schedule = np.atleast_2d(np.asarray(schedule, dtype=float))
    n_h = schedule.shape[0] - 1
    state = state0
    records = []
    ndeg = 0
    j_total = 0.0
    for i in range(n_h + 1):
        m_i = schedule[i]
        jac, y, dy_dq, nd = _assemble_step(
            state, m_i, config, want_step=i < n_h, want_output=True
        )
        ndeg += nd
        j_term, dj_dq, dj_dm = objective.term_with_partials(
            y, dy_dq, m_i, state.m, config
        )
        j_total += j_term
        if jac is not None:
            if jac_hook is not None:
                jac_hook(i, jac)
            state = model.step(state, m_i, inflow, k0 + i, config)
        records.append(TapeRecord(y=y, j_term=j_term, dj_dq=dj_dq, dj_dm=dj_dm, jac=jac))
    return j_total, AdjointTape(records=records, n_degenerate=ndeg)


def simulate_objective(
    state0: WakeState,
    schedule: np.ndarray,
    inflow: InflowScenario,
    objective,
    config: ModelConfig,
    k0: int = 0,
):
    """Plain forward evaluation of the accumulated objective (no tape)."""
    schedule = np.atleast_2d(np.asarray(schedule, dtype=float))
    n_h = schedule.shape[0] - 1
    state = state0
    j_total = 0.0
    outputs = []
    for i in range(n_h + 1):
        y = model.output(state, config)
        outputs.append(y)
        j_total += objective.term_value(y, schedule[i], state.m)
        if i < n_h:
            state = model.step(state, schedule[i], inflow, k0 + i, config)
    return j_total, np.array(outputs)


def _apply_df_dq_transpose(lam: np.ndarray, jac: StepJacobian, config: ModelConfig):
    """Covector-Jacobian product lam^T df/dq using the stored blocks."""
    n_r, n_p, d, n_e = config.n_r, config.n_p, config.n_d, config.n_e
    sx, sg, su, sm = config.slices
    lam_x = lam[sx].reshape(n_r, n_p, d)
    lam_g = lam[sg].reshape(n_r, n_e)
    lam_u = lam[su].reshape(n_r, n_p, d)

    out = np.zeros_like(lam)
    out_x = out[sx]
    out_g = out[sg].reshape(n_r, n_e)
    out_u = out[su].reshape(n_r, n_p, d)

    lam_moved = lam_x[1:].ravel()
    lam_g0 = lam_g[0].sum()

    out_x += lam_moved @ jac.xx
    out_x += lam_g0 * jac.g0_x

    out_g += (lam_moved @ jac.xg).reshape(n_r, n_e)
    out_g += lam_g0 * jac.g0_g.reshape(n_r, n_e)
    out_g[:-1] += lam_g[1:]

    out_u += (lam_g0 * jac.g0_u).reshape(n_r, n_p, d)
    out_u[:-1] += config.h * lam_x[1:]
    out_u[:-1] += lam_u[1:]
    return out


def backward_sweep(tape: AdjointTape, config: ModelConfig):
    """Solve the costate recursion backwards from the horizon.

    Returns the list of costates indexed by step; entry 0 is unused by
    the gradient and left as None.
    """
    n_h = tape.horizon
    lambdas: list = [None] * (n_h + 1)
    lam = tape.records[n_h].dj_dq.copy()
    lambdas[n_h] = lam
    for i in range(n_h - 1, 0, -1):
        lam = tape.records[i].dj_dq + _apply_df_dq_transpose(
            lam, tape.records[i].jac, config
        )
        lambdas[i] = lam
    return lambdas


def gradient(tape: AdjointTape, lambdas, config: ModelConfig, free_idx) -> np.ndarray:
    """Objective gradient per schedule entry, shape (N_h+1, n_free)."""
    n_h = tape.horizon
    free_idx = np.asarray(free_idx, dtype=int)
    sx, sg, su, sm = config.slices
    n_p, d, n_e = config.n_p, config.n_d, config.n_e
    t0 = config.shed_turbine
    grads = np.zeros((n_h + 1, config.n_m_full))
    for i in range(n_h):
        jac = tape.records[i].jac
        lam = lambdas[i + 1]
        lam_x0 = lam[sx].reshape(config.n_r, n_p, d)[0].ravel()
        lam_g0 = lam[sg].reshape(config.n_r, n_e)[0].sum()
        lam_m = lam[sm]
        g = tape.records[i].dj_dm.copy()
        g += lam_m  # saved-control rows carry the identity
        g[t0 * 2] += lam_g0 * jac.g0_a
        g[t0 * 2 + 1] += lam_g0 * jac.g0_psi + lam_x0 @ jac.x0_psi
        grads[i] = g
    grads[n_h] = tape.records[n_h].dj_dm
    return grads[:, free_idx]


def objective_gradient(
    state0: WakeState,
    schedule: np.ndarray,
    inflow: InflowScenario,
    objective,
    config: ModelConfig,
    k0: int = 0,
):
    """Convenience wrapper: taped forward, backward sweep, gradient.

    Returns (j_total, grad, tape) with grad of shape (N_h+1, n_free).
    """
    j_total, tape = forward_with_tape(state0, schedule, inflow, objective, config, k0)
    lambdas = backward_sweep(tape, config)
    grad = gradient(tape, lambdas, config, objective.free_idx)
    return j_total, grad, tape


def finite_difference_gradient(
    state0: WakeState,
    schedule: np.ndarray,
    inflow: InflowScenario,
    objective,
    config: ModelConfig,
    eps: float = 1e-6,
    k0: int = 0,
) -> np.ndarray:
    """Central-difference gradient over every free schedule entry.

    Independent verification oracle for the adjoint; costs
    2*(N_h+1)*n_free forward simulations.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    schedule = np.array(schedule, dtype=float)
    free_idx = np.asarray(objective.free_idx, dtype=int)
    grads = np.zeros((schedule.shape[0], free_idx.size))
    for i in range(schedule.shape[0]):
        for j, idx in enumerate(free_idx):
            pert = schedule.copy()
            pert[i, idx] += eps
            j_up, _ = simulate_objective(state0, pert, inflow, objective, config, k0)
            pert[i, idx] -= 2.0 * eps
            j_dn, _ = simulate_objective(state0, pert, inflow, objective, config, k0)
            grads[i, j] = (j_up - j_dn) / (2.0 * eps)
    return grads


# ---------------------------------------------------------------------------
# Dense assembly (verification-scale only) and tape dump
# ---------------------------------------------------------------------------


def assemble_dense(jac: StepJacobian, config: ModelConfig):
    """Expand one step's blocks to dense (df_dq, df_dm) for testing."""
    n_r, n_p, d, n_e = config.n_r, config.n_p, config.n_d, config.n_e
    sx, sg, su, sm = config.slices
    n_s = config.n_s
    f_q = np.zeros((n_s, n_s))
    npd = n_p * d

    rows_x = slice(sx.start + npd, sx.start + n_r * npd)
    f_q[rows_x, sx] = jac.xx
    f_q[rows_x, sg] = jac.xg
    for b in range(1, n_r):
        rs = sx.start + b * npd
        cs = su.start + (b - 1) * npd
        f_q[rs : rs + npd, cs : cs + npd] = config.h * np.eye(npd)

    for e in range(n_e):
        r = sg.start + e
        f_q[r, sx] = jac.g0_x
        f_q[r, sg] = jac.g0_g
        f_q[r, su] = jac.g0_u
    for b in range(1, n_r):
        rs = sg.start + b * n_e
        cs = sg.start + (b - 1) * n_e
        f_q[rs : rs + n_e, cs : cs + n_e] = np.eye(n_e)

    for b in range(1, n_r):
        rs = su.start + b * npd
        cs = su.start + (b - 1) * npd
        f_q[rs : rs + npd, cs : cs + npd] = np.eye(npd)

    f_m = np.zeros((n_s, config.n_m_full))
    t0 = config.shed_turbine
    f_m[sx.start : sx.start + npd, t0 * 2 + 1] = jac.x0_psi
    f_m[sg.start : sg.start + n_e, t0 * 2] = jac.g0_a
    f_m[sg.start : sg.start + n_e, t0 * 2 + 1] = jac.g0_psi
    f_m[sm, :] = np.eye(config.n_m_full)
    return f_q, f_m


def dump_tape(tape: AdjointTape, path) -> None:
    """Debug dump: per step and block, a tag line followed by the dense
    block values as little-endian float64 bytes.

    Layout per block: ASCII line "step <i> <name> <n_rows> <n_cols>\\n"
    then n_rows*n_cols little-endian 64-bit reals, row-major.
    """

    def blocks(rec: TapeRecord):
        yield "dj_dq", rec.dj_dq[None, :]
        yield "dj_dm", rec.dj_dm[None, :]
        if rec.jac is not None:
            jac = rec.jac
            yield "xx", jac.xx
            yield "xg", jac.xg
            yield "g0_x", jac.g0_x[None, :]
            yield "g0_g", jac.g0_g[None, :]
            yield "g0_u", jac.g0_u[None, :]
            yield "g0_am", np.array([[jac.g0_a, jac.g0_psi]])
            yield "x0_psi", jac.x0_psi[None, :]

    with open(path, "wb") as f:
        for i, rec in enumerate(tape.records):
            for name, arr in blocks(rec):
                arr = np.atleast_2d(np.asarray(arr, dtype="<f8"))
                f.write(f"step {i} {name} {arr.shape[0]} {arr.shape[1]}\n".encode())
                f.write(np.ascontiguousarray(arr).tobytes())
