"""Time integration with step control, positivity guarding, and monitors.

Two schemes: classic explicit RK4 (the verification reference) and a
second-order exponential IMEX step (ETDRK2) that treats a constant-coefficient
Laplacian — the stiff linearization of the dissipative operators — exactly in
Fourier space and everything else explicitly.

Positivity failure is a hard stop with diagnostics, never clamping: the
no-vacuum regime is a property to observe, not enforce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField, VectorField, grad_arr, lap_arr, quad
from .functionals import (DISSIPATION_KEYS, MonitorRecord, bd_entropy,
                          energy, energy_dissipation, mv_functional)
from .physics import State, VacuumError, check_constraints, to_u, to_w
from .systems import rhs_approx_u, rhs_for

SCHEMES = ("rk4-explicit", "imex")


class PositivityError(RuntimeError):
    """Post-step density fell to or below the positivity floor."""

    def __init__(self, time, bad_nodes, rho_min):
        self.time = float(time)
        self.bad_nodes = int(bad_nodes)
        self.rho_min = float(rho_min)
        super().__init__(f"positivity failure at t={time:.6g}: "
                         f"{bad_nodes} node(s), rho_min={rho_min:.6g}")


class StepUnderflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "imex"
    dt_init: float = 1e-3
    dt_min: float = 1e-8
    dt_max: float = 1e-2
    cfl_target: float = 0.5
    t_end: float = 0.1
    monitor_every: int = 1
    positivity_floor: float = 1e-10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not (0 < self.cfl_target <= 1):
            raise ValueError("cfl_target must be in (0, 1]")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be >= 1")
        if self.positivity_floor <= 0:
            raise ValueError("positivity_floor must be positive")

    @classmethod
    def fixed_dt(cls, dt, t_end, **kw):
        return cls(dt_init=dt, dt_min=dt, dt_max=dt, t_end=t_end, **kw)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    dissipation_time_integrals: dict = field(default_factory=dict)
    status: str = "completed"

    @property
    def final_state(self):
        return self.states[-1]


def _linear_coeffs(formulation, params, dim):
    """Constant-coefficient implicit Laplacian weights (c_rho, c_vel).

    In 1D the full degenerate viscous operator linearizes to 2*nu*Lap; in
    higher dimensions only the nu*Lap part is taken implicitly and the
    grad-div remainder stays explicit.
    """
    visc = 2 * params.nu if dim == 1 else params.nu
    c_vel = visc + math.sqrt(params.eps)
    c_rho = params.mu if formulation == "approx-w" else 0.0
    return c_rho, c_vel


def _phi1(z):
    out = np.where(np.abs(z) > 1e-7, np.expm1(z) / np.where(z == 0, 1.0, z),
                   1.0 + z / 2 + z * z / 6)
    return out


def _phi2(z):
    out = np.where(np.abs(z) > 1e-5,
                   (np.expm1(z) - z) / np.where(z == 0, 1.0, z) ** 2,
                   0.5 + z / 6 + z * z / 24)
    return out


def step(state, params, rhs_fn, dt, scheme="rk4-explicit",
         positivity_floor=1e-10, use_dealias=True):
    """Advance one step; raises PositivityError if the density drops."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = state.grid

    def pack(s):
        return s.rho.values, s.vel.values

    def unpack(r, vel, t):
        return State(ScalarField(grid, r), VectorField(grid, vel),
                     form=state.form, time=t)

    def f(r, vel, t):
        try:
            rhs = rhs_fn(unpack(r, vel, t), params, use_dealias=use_dealias)
        except VacuumError as exc:
            # a stage value already left the positive cone: same failure
            # mode as a post-step violation
            raise PositivityError(t, exc.bad_nodes, exc.rho_min) from exc
        return rhs.drho.values, rhs.dvel.values

    r0, u0 = pack(state)
    t0 = state.time

    if scheme == "rk4-explicit":
        k1r, k1u = f(r0, u0, t0)
        k2r, k2u = f(r0 + 0.5 * dt * k1r, u0 + 0.5 * dt * k1u, t0 + dt / 2)
        k3r, k3u = f(r0 + 0.5 * dt * k2r, u0 + 0.5 * dt * k2u, t0 + dt / 2)
        k4r, k4u = f(r0 + dt * k3r, u0 + dt * k3u, t0 + dt)
        r1 = r0 + dt / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
        u1 = u0 + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
    elif scheme == "imex":
        formulation = {"u": "approx-u", "w": "approx-w"}.get(state.form)
        c_rho, c_vel = _linear_coeffs(formulation, params, grid.dim)
        lapm = grid._lap_mult

        def lin(arr, c):
            if c == 0.0:
                return np.zeros_like(arr)
            return np.real(np.fft.ifftn(c * lapm * np.fft.fftn(arr)))

        def etd(arr, c, n_first, n_diff, phase):
            z = c * lapm * dt
            if phase == "predict":
                E = np.exp(z)
                p1 = _phi1(z)
                ahat = E * np.fft.fftn(arr) + dt * p1 * np.fft.fftn(n_first)
                return np.real(np.fft.ifftn(ahat))
            p2 = _phi2(z)
            return arr + dt * np.real(np.fft.ifftn(p2 * np.fft.fftn(n_diff)))

        fr, fu = f(r0, u0, t0)
        n0r = fr - lin(r0, c_rho)
        n0u = np.stack([fu[i] - lin(u0[i], c_vel) for i in range(grid.dim)])
        ra = etd(r0, c_rho, n0r, None, "predict")
        ua = np.stack([etd(u0[i], c_vel, n0u[i], None, "predict")
                       for i in range(grid.dim)])
        fra, fua = f(ra, ua, t0 + dt)
        n1r = fra - lin(ra, c_rho)
        n1u = np.stack([fua[i] - lin(ua[i], c_vel) for i in range(grid.dim)])
        r1 = etd(ra, c_rho, None, n1r - n0r, "correct")
        u1 = np.stack([etd(ua[i], c_vel, None, n1u[i] - n0u[i], "correct")
                       for i in range(grid.dim)])
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    rmin = float(np.min(r1))
    if rmin <= positivity_floor:
        bad = int(np.count_nonzero(r1 <= positivity_floor))
        raise PositivityError(t0 + dt, bad, rmin)
    return unpack(r1, u1, t0 + dt)


def cfl_dt(state, params, config):
    """Advective + acoustic + explicit-stiffness step estimate.

    Dispersive (Bohm) stiffness is treated like diffusion, kappa * k_max^2.
    The implicitly integrated diffusion is excluded for the imex scheme.
    """
    grid = state.grid
    r = state.rho.values
    u = state.vel.values
    kmax = max(np.max(np.abs(k)) for k in grid._kd)
    umax = float(np.max(np.sqrt(np.sum(u * u, axis=0))))
    cs = math.sqrt(params.a * params.gamma) * float(
        np.max(r ** ((params.gamma - 1) / 2)))
    rate = (umax + cs) * kmax + params.kappa * kmax ** 2
    if config.scheme != "imex":
        rate += (2 * params.nu + math.sqrt(params.eps) + params.mu) * kmax ** 2
    if rate <= 0:
        return config.dt_max
    return config.cfl_target / rate


def integrate(initial, params, config, formulation=None, use_dealias=True,
              check_strict=True, keep_states=True):
    """Advance to t_end (or failure), recording monitors at cadence.

    Time-integrated dissipation is accumulated by the trapezoid rule over
    monitor samples. The mass-balance residual column is the discrete form of
    d(int rho)/dt + eps*int|grad v|^4 - eps*int rho^-p0.
    """
    if check_strict:
        check_constraints(params)
    if formulation is None:
        formulation = {"u": "approx-u", "w": "approx-w"}[initial.form]
    rhs_fn = rhs_for(formulation)

    traj = Trajectory()
    state = initial
    accum = {k: 0.0 for k in DISSIPATION_KEYS}
    prev_diss = None
    prev_monitor = None

    def mass_flux(s):
        # eps * int |grad v|^4 - eps * int rho^-p0 (continuity source terms)
        if params.eps == 0:
            return 0.0
        grid = s.grid
        gv = grad_arr(grid, np.sqrt(s.rho.values))
        gv2 = np.sum(gv * gv, axis=0)
        return params.eps * (quad(grid, gv2 ** 2)
                             - quad(grid, s.rho.values ** -params.p0))

    def record(s, residual):
        u_state = s if s.form == "u" else to_u(s, params)
        diss = energy_dissipation(u_state, params)
        rec = MonitorRecord(
            time=s.time,
            mass=quad(s.grid, s.rho.values),
            energy=energy(u_state, params),
            bd_entropy=bd_entropy(u_state, params),
            mv=mv_functional(u_state),
            rho_min=float(np.min(s.rho.values)),
            rho_max=float(np.max(s.rho.values)),
            mass_balance_residual=residual,
            dissipation=diss,
        )
        traj.times.append(s.time)
        if keep_states:
            traj.states.append(s)
        traj.records.append(rec)
        return rec, diss

    rec, diss = record(state, 0.0)
    prev_diss = (state.time, diss)
    prev_monitor = (state.time, rec.mass, mass_flux(state))

    steps_since_monitor = 0
    while state.time < config.t_end - 1e-14:
        dt = min(cfl_dt(state, params, config), config.dt_max)
        dt = max(dt, config.dt_min)
        dt = min(dt, config.t_end - state.time)
        if dt < config.dt_min * (1 - 1e-12) and dt < config.t_end - state.time:
            traj.status = "step-underflow"
            return traj
        try:
            state = step(state, params, rhs_fn, dt, scheme=config.scheme,
                         positivity_floor=config.positivity_floor,
                         use_dealias=use_dealias)
        except PositivityError as exc:
            traj.status = (f"positivity-failure at t={exc.time:.6g} "
                           f"({exc.bad_nodes} nodes, rho_min={exc.rho_min:g})")
            return traj
        steps_since_monitor += 1
        at_end = state.time >= config.t_end - 1e-14
        if steps_since_monitor >= config.monitor_every or at_end:
            t_prev, m_prev, flux_prev = prev_monitor
            flux_now = mass_flux(state)
            m_now = quad(state.grid, state.rho.values)
            dt_mon = state.time - t_prev
            residual = abs((m_now - m_prev) / dt_mon
                           + 0.5 * (flux_now + flux_prev))
            rec, diss = record(state, residual)
            # trapezoid accumulation of the dissipation integrals
            t0, d0 = prev_diss
            for k in DISSIPATION_KEYS:
                accum[k] += 0.5 * (d0[k] + diss[k]) * (state.time - t0)
            prev_diss = (state.time, diss)
            prev_monitor = (state.time, m_now, flux_now)
            steps_since_monitor = 0
    traj.dissipation_time_integrals = accum
    traj.status = "completed"
    return traj


# ---------------------------------------------------------------------------
# energy budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyBudgetReport:
    times: np.ndarray
    energies: np.ndarray
    rates: np.ndarray          # analytic dE/dt (dissipation + sources)
    residuals: np.ndarray      # per-step |(dE/dt)_discrete - rate|
    dissipation: np.ndarray    # positive-definite group, per sample
    sources: np.ndarray        # everything else in the rate, per sample

    @property
    def max_residual(self):
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0


def _budget_rate(state, params, use_dealias=True):
    """Analytic instantaneous dE/dt, grouped as -(dissipation) + sources.

    Kinetic part from the weak-form decomposition of the momentum equation
    (dissipation integrals, pressure work, the epsilon exchange terms); the
    remaining energy parts by the chain rule through the continuity source.
    """
    grid = state.grid
    r = state.rho.values
    u = state.vel.values
    eps, mu, p0 = params.eps, params.mu, params.p0
    v = np.sqrt(r)

    from .fields import div_arr, hess_arr, jac_arr

    J = jac_arr(grid, u)
    D = 0.5 * (J + np.swapaxes(J, 0, 1))
    u2 = np.sum(u * u, axis=0)
    gv = grad_arr(grid, v)
    gv2 = np.sum(gv * gv, axis=0)
    glog = grad_arr(grid, np.log(r))
    w = u + mu * glog
    w3 = np.sum(w * w, axis=0) ** 1.5

    diss = (2 * params.nu * quad(grid, r * np.sum(D * D, axis=(0, 1)))
            + math.sqrt(eps) * quad(grid, r * np.sum(J * J, axis=(0, 1)))
            + params.r0 * quad(grid, u2)
            + params.r1 * quad(grid, r * u2 ** 2))
    sources = -quad(grid, np.sum(
        u * grad_arr(grid, params.a * r ** params.gamma), axis=0))

    if params.kappa > 0 or eps > 0:
        from .physics import bohm_force
        bf = bohm_force(state.rho).values
        sources += (params.kappa ** 2 + math.sqrt(eps) * mu) * quad(
            grid, np.sum(bf * u, axis=0))

    if eps > 0:
        flux = gv2 * gv
        Q = div_arr(grid, flux)
        neg_p = r ** (-p0)
        Hlog = hess_arr(grid, np.log(r))
        diss += (eps / 2 * quad(grid, neg_p * u2)
                 + eps ** 1.5 * quad(grid, r * w3 * u2)
                 + eps / 2 * quad(grid, gv2 ** 2 * u2))
        sources += (
            - eps * mu * quad(grid, np.sum(
                u * grad_arr(grid, neg_p), axis=0))
            + eps * mu * quad(grid, v * np.sum(
                np.einsum("ij...,j...->i...", Hlog, flux) * u, axis=0))
            + eps * mu * quad(grid, v * Q * np.sum(glog * u, axis=0))
            - eps * mu * quad(grid, np.sum(
                grad_arr(grid, v * Q) * u, axis=0)))

    kinetic_rate = 2 * (sources - diss)

    # chain rule through d rho/dt for the non-kinetic energy parts
    drho = rhs_approx_u(state, params, use_dealias=use_dealias).drho.values
    lv = lap_arr(grid, v)
    pot_rate = quad(grid, drho)
    pot_rate += params.a * params.gamma * quad(
        grid, r ** (params.gamma - 1) * drho)
    cgrad = 2 * params.kappa ** 2 + 2 * mu * math.sqrt(eps)
    pot_rate += cgrad * (-quad(grid, lv / v * drho))
    if eps > 0:
        Q = div_arr(grid, gv2 * gv)
        pot_rate += -eps * p0 * quad(grid, r ** (-p0 - 1) * drho)
        pot_rate += eps * mu * (-2 * quad(grid, Q / v * drho))

    return kinetic_rate + pot_rate, 2 * diss, kinetic_rate + pot_rate + 2 * diss


def energy_budget(trajectory, params, use_dealias=True):
    """Per-step residual of the discrete energy identity.

    Requires monitor cadence 1 (a state snapshot at every step) from an
    approx-u run. The residual compares the discrete energy increment per
    step against the trapezoid of the analytic rate; it shrinks at the
    scheme's temporal order.
    """
    states = trajectory.states
    if len(states) < 2:
        raise ValueError("trajectory too short for a budget")
    for s in states:
        if s.form != "u":
            raise ValueError("energy budget requires u-form snapshots")
    times = np.asarray(trajectory.times)
    if len(times) > 2:
        dts = np.diff(times)
        if np.max(dts) > 1.5 * np.min(dts):
            raise ValueError("energy budget requires monitor cadence 1 "
                             "(uniform per-step snapshots)")
    energies = np.array([energy(s, params) for s in states])
    rates, disses, srcs = [], [], []
    for s in states:
        rate, d, src = _budget_rate(s, params, use_dealias=use_dealias)
        rates.append(rate)
        disses.append(d)
        srcs.append(src)
    rates = np.asarray(rates)
    dE = np.diff(energies) / np.diff(times)
    mid_rate = 0.5 * (rates[1:] + rates[:-1])
    residuals = np.abs(dE - mid_rate)
    return EnergyBudgetReport(times, energies, rates, residuals,
                              np.asarray(disses), np.asarray(srcs))


# ---------------------------------------------------------------------------
# formulation equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    times: np.ndarray
    rho_l2_errors: np.ndarray
    vel_l2_errors: np.ndarray
    status_u: str
    status_w: str

    @property
    def max_rho_error(self):
        return float(np.max(self.rho_l2_errors))

    @property
    def max_vel_error(self):
        return float(np.max(self.vel_l2_errors))

    @property
    def max_error(self):
        return max(self.max_rho_error, self.max_vel_error)


def equivalence_run(initial, params, config, use_dealias=True):
    """Integrate matched data through both formulations and compare.

    The same initial u-form data is run once via approx-u and once via
    approx-w (after the effective-velocity transform); w-snapshots are mapped
    back with to_u and max-over-time L2 discrepancies reported.
    """
    if initial.form != "u":
        raise ValueError("equivalence_run expects u-form initial data")
    traj_u = integrate(initial, params, config, formulation="approx-u",
                       use_dealias=use_dealias)
    if traj_u.status != "completed":
        raise RuntimeError(f"u-form run failed: {traj_u.status}")
    traj_w = integrate(to_w(initial, params), params, config,
                       formulation="approx-w", use_dealias=use_dealias)
    if traj_w.status != "completed":
        raise RuntimeError(f"w-form run failed: {traj_w.status}")
    if len(traj_u.times) != len(traj_w.times):
        raise RuntimeError("snapshot cadences diverged between runs")
    grid = initial.grid
    rho_errs, vel_errs = [], []
    for su, sw in zip(traj_u.states, traj_w.states):
        sw_u = to_u(sw, params)
        dr = su.rho.values - sw_u.rho.values
        du = su.vel.values - sw_u.vel.values
        rho_errs.append(math.sqrt(quad(grid, dr * dr)))
        vel_errs.append(math.sqrt(quad(grid, np.sum(du * du, axis=0))))
    return EquivalenceReport(np.asarray(traj_u.times),
                             np.asarray(rho_errs), np.asarray(vel_errs),
                             traj_u.status, traj_w.status)
