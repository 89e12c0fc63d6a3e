"""Scalar functionals and pointwise-integral inequality checkers.

Energy, BD entropy, and Mellet-Vasseur functionals, the named instantaneous
dissipation integrals, and quadrature verifications of the unconditional
functional inequalities (Jungel bounds, the |grad v|^6 bound, the div-vs-D
bound) and exact identities (quartic-flux pairing, the sqrt(rho)u product
rule).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fields import grad_arr, hess_arr, jac_arr, lap_arr, quad
from .physics import require_positive

# Inequality pass criterion: quadrature and roundoff must not flag true
# inequalities.
REL_TOL = 1e-10
ABS_TOL = 1e-12

DISSIPATION_KEYS = (
    "nu_rho_Du2",            # nu * int rho |D u|^2
    "r0_u2",                 # r0 * int |u|^2
    "r1_rho_u4",             # r1 * int rho |u|^4
    "sqrt_eps_rho_gradu2",   # sqrt(eps) * int rho |grad u|^2
    "eps_gradv4",            # eps * int |grad v|^4
    "eps_gradv4_u2",         # eps * int |grad v|^4 |u|^2
    "eps_rho_negp_u2",       # eps * int rho^-p0 |u|^2
    "eps32_rho_w3_u2",       # eps^(3/2) * int rho |w|^3 |u|^2
    "kappa_quartic_group",   # (2k^2+2mu*sqrt(eps))*eps * int(|gv|^2|hv|^2
                             #   + |grad|gv|^2|^2 + (2p0+1)|gv|^2 v^(-2p0-2))
    "kappa2_rho_hesslog2",   # kappa^2 * int rho |hess log rho|^2
    "grad_rho_gamma_half2",  # int |grad rho^(gamma/2)|^2
    "grad_sqrtrho_u2",       # int |grad(sqrt(rho) u) - u (x) grad sqrt(rho)|^2
)


@dataclass(frozen=True)
class FunctionalReport:
    """One inequality or identity instance: lhs vs rhs with a margin."""

    name: str
    lhs: float
    rhs: float = None
    rel_tol: float = REL_TOL
    abs_tol: float = ABS_TOL

    @property
    def margin(self):
        return None if self.rhs is None else self.rhs - self.lhs

    @property
    def passed(self):
        if self.rhs is None:
            return True
        return self.lhs <= self.rhs * (1 + self.rel_tol) + self.abs_tol

    def to_json(self):
        return json.dumps({
            "name": self.name, "lhs": self.lhs, "rhs": self.rhs,
            "margin": self.margin, "passed": self.passed,
            "rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
        })


@dataclass(frozen=True)
class MonitorRecord:
    """One time sample of every tracked functional."""

    time: float
    mass: float
    energy: float
    bd_entropy: float
    mv: float
    rho_min: float
    rho_max: float
    mass_balance_residual: float
    dissipation: dict = field(default_factory=dict)

    def is_finite(self):
        vals = [self.mass, self.energy, self.bd_entropy, self.mv,
                self.rho_min, self.rho_max, self.mass_balance_residual]
        vals += list(self.dissipation.values())
        return bool(np.all(np.isfinite(vals)))


def _u_form(state, params):
    if state.form == "u":
        return state
    from .physics import to_u
    return to_u(state, params)


def log_minus(rho_values):
    """log_-(g) = log(min(1, g)), i.e. min(log g, 0) nodally."""
    return np.minimum(np.log(rho_values), 0.0)


def energy(state, params):
    """int(rho|u|^2 + rho + a rho^g + eps rho^-p0
           + (2k^2 + 2 mu sqrt(eps)) |grad v|^2 + eps mu |grad v|^4)."""
    state = _u_form(state, params)
    require_positive(state.rho.values)
    grid = state.grid
    r = state.rho.values
    u = state.vel.values
    v = np.sqrt(r)
    gv = grad_arr(grid, v)
    gv2 = np.sum(gv * gv, axis=0)
    u2 = np.sum(u * u, axis=0)
    eps, mu = params.eps, params.mu
    integrand = r * u2 + r + params.a * r ** params.gamma
    if eps > 0:
        integrand = integrand + eps * r ** (-params.p0)
    cgrad = 2 * params.kappa ** 2 + 2 * mu * np.sqrt(eps)
    integrand = integrand + cgrad * gv2 + eps * mu * gv2 ** 2
    return quad(grid, integrand)


def bd_entropy(state, params):
    """int(|grad v|^2 + eps |grad v|^4 - r0 log_-(rho))."""
    state = _u_form(state, params)
    require_positive(state.rho.values)
    grid = state.grid
    v = np.sqrt(state.rho.values)
    gv2 = np.sum(grad_arr(grid, v) ** 2, axis=0)
    integrand = gv2 + params.eps * gv2 ** 2 \
        - params.r0 * log_minus(state.rho.values)
    return quad(grid, integrand)


def mv_functional(state, params=None):
    """Mellet-Vasseur functional int rho (e + |u|^2) ln(e + |u|^2)."""
    if state.form != "u" and params is None:
        raise ValueError("w-form state needs params to map back to u")
    if state.form != "u":
        state = _u_form(state, params)
    require_positive(state.rho.values)
    u2 = np.sum(state.vel.values ** 2, axis=0)
    arg = np.e + u2
    return quad(state.grid, state.rho.values * arg * np.log(arg))


def energy_dissipation(state, params):
    """Instantaneous values of the named dissipation integrals.

    Time integration of these is the time loop's job; this returns the
    integrands' quadratures at the given state.
    """
    state = _u_form(state, params)
    require_positive(state.rho.values)
    grid = state.grid
    r = state.rho.values
    u = state.vel.values
    v = np.sqrt(r)
    eps, mu, p0 = params.eps, params.mu, params.p0

    J = jac_arr(grid, u)                       # J[i,j] = d_j u_i
    D = 0.5 * (J + np.swapaxes(J, 0, 1))
    D2 = np.sum(D * D, axis=(0, 1))
    J2 = np.sum(J * J, axis=(0, 1))
    u2 = np.sum(u * u, axis=0)

    gv = grad_arr(grid, v)
    gv2 = np.sum(gv * gv, axis=0)
    Hv = hess_arr(grid, v)
    Hv2 = np.sum(Hv * Hv, axis=(0, 1))
    g_gv2 = grad_arr(grid, gv2)
    g_gv2_2 = np.sum(g_gv2 * g_gv2, axis=0)

    w = u + mu * grad_arr(grid, np.log(r))
    w3 = np.sum(w * w, axis=0) ** 1.5

    Hlog = hess_arr(grid, np.log(r))
    Hlog2 = np.sum(Hlog * Hlog, axis=(0, 1))

    g_rg = grad_arr(grid, r ** (params.gamma / 2))
    g_rg2 = np.sum(g_rg * g_rg, axis=0)

    # grad(sqrt(rho) u) - u (x) grad(sqrt(rho)), Frobenius norm squared
    gsr = grad_arr(grid, v)
    sru = v * u
    Jsru = jac_arr(grid, sru)
    diff = Jsru - u[:, None] * gsr[None, :]
    diff2 = np.sum(diff * diff, axis=(0, 1))

    ckap = (2 * params.kappa ** 2 + 2 * mu * np.sqrt(eps)) * eps
    quartic = gv2 * Hv2 + g_gv2_2 + (2 * p0 + 1) * gv2 * v ** (-2 * p0 - 2)

    neg_p = r ** (-p0) if eps > 0 else np.zeros_like(r)

    return {
        "nu_rho_Du2": params.nu * quad(grid, r * D2),
        "r0_u2": params.r0 * quad(grid, u2),
        "r1_rho_u4": params.r1 * quad(grid, r * u2 ** 2),
        "sqrt_eps_rho_gradu2": np.sqrt(eps) * quad(grid, r * J2),
        "eps_gradv4": eps * quad(grid, gv2 ** 2),
        "eps_gradv4_u2": eps * quad(grid, gv2 ** 2 * u2),
        "eps_rho_negp_u2": eps * quad(grid, neg_p * u2),
        "eps32_rho_w3_u2": eps ** 1.5 * quad(grid, r * w3 * u2),
        "kappa_quartic_group": ckap * quad(grid, quartic) if eps > 0 else 0.0,
        "kappa2_rho_hesslog2": params.kappa ** 2 * quad(grid, r * Hlog2),
        "grad_rho_gamma_half2": quad(grid, g_rg2),
        "grad_sqrtrho_u2": quad(grid, diff2),
    }


# ---------------------------------------------------------------------------
# inequality / identity checkers
# ---------------------------------------------------------------------------

def check_jungel(rho):
    """int |grad rho^(1/4)|^4 <= 8 int rho |hess log rho|^2 and
       int |hess rho^(1/2)|^2 <= 7 int rho |hess log rho|^2."""
    require_positive(rho.values)
    grid = rho.grid
    r = rho.values
    g14 = grad_arr(grid, r ** 0.25)
    lhs1 = quad(grid, np.sum(g14 * g14, axis=0) ** 2)
    Hs = hess_arr(grid, np.sqrt(r))
    lhs2 = quad(grid, np.sum(Hs * Hs, axis=(0, 1)))
    Hlog = hess_arr(grid, np.log(r))
    base = quad(grid, r * np.sum(Hlog * Hlog, axis=(0, 1)))
    return (FunctionalReport("jungel_quartic", lhs1, 8.0 * base),
            FunctionalReport("jungel_hessian", lhs2, 7.0 * base))


def check_grad6(v):
    """int v^-2 |grad v|^6 <= 2 int |grad v|^2 |lap v|^2
                              + 8 int |grad |grad v|^2|^2."""
    require_positive(v.values)
    grid = v.grid
    gv = grad_arr(grid, v.values)
    gv2 = np.sum(gv * gv, axis=0)
    lhs = quad(grid, v.values ** -2 * gv2 ** 3)
    lv = lap_arr(grid, v.values)
    g_gv2 = grad_arr(grid, gv2)
    rhs = (2.0 * quad(grid, gv2 * lv * lv)
           + 8.0 * quad(grid, np.sum(g_gv2 * g_gv2, axis=0)))
    return FunctionalReport("grad6", lhs, rhs)


def check_div_vs_D(rho, u):
    """int rho (div u)^2 <= 3 int rho |D u|^2 (dimension bound, d <= 3)."""
    require_positive(rho.values)
    grid = rho.grid
    J = jac_arr(grid, u.values)
    divu = np.trace(J, axis1=0, axis2=1)
    D = 0.5 * (J + np.swapaxes(J, 0, 1))
    lhs = quad(grid, rho.values * divu ** 2)
    rhs = 3.0 * quad(grid, rho.values * np.sum(D * D, axis=(0, 1)))
    return FunctionalReport("div_vs_D", lhs, rhs)


def check_flux_identity(v, r, rel_tol=1e-8):
    """Pairing identity for the quartic flux, exponent r >= 0:

    int div(|gv|^r gv) div(|gv|^2 gv)
      = int( 2r (gv . Hv gv)^2 |gv|^(r-4) |gv|^2
             + (r+2) |Hv gv|^2 |gv|^r + |gv|^(r+2) |Hv|^2 )

    written with q = Hv gv, the first term is 2r (q.gv)^2 |gv|^(r-2).
    Checked as a two-sided equality within rel_tol.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    grid = v.grid
    gv = grad_arr(grid, v.values)
    gv2 = np.sum(gv * gv, axis=0)
    Hv = hess_arr(grid, v.values)
    Hv2 = np.sum(Hv * Hv, axis=(0, 1))
    q = np.einsum("ij...,j...->i...", Hv, gv)
    q2 = np.sum(q * q, axis=0)
    qg = np.sum(q * gv, axis=0)

    from .fields import div_arr
    flux_r = gv2 ** (r / 2) * gv
    flux_2 = gv2 * gv
    lhs = quad(grid, div_arr(grid, flux_r) * div_arr(grid, flux_2))

    if r == 0:
        first = np.zeros_like(gv2)
    else:
        safe = np.where(gv2 > 0, gv2, 1.0)
        first = np.where(gv2 > 0, 2 * r * qg ** 2 * safe ** (r / 2 - 1), 0.0)
    rhs = quad(grid, first + (r + 2) * q2 * gv2 ** (r / 2)
               + gv2 ** (r / 2 + 1) * Hv2)

    scale = max(abs(lhs), abs(rhs), 1e-300)
    return FunctionalReport("flux_identity", abs(lhs - rhs), rel_tol * scale,
                            rel_tol=0.0, abs_tol=ABS_TOL)


def check_grad_sqrtrho_u(rho, u, tol=1e-8):
    """Nodal product rule grad(sqrt(rho) u) = sqrt(rho) grad u
       + 2 rho^(1/4) u (x) grad rho^(1/4)."""
    require_positive(rho.values)
    grid = rho.grid
    v = np.sqrt(rho.values)
    lhs = jac_arr(grid, v * u.values)
    g14 = grad_arr(grid, rho.values ** 0.25)
    rhs = v * jac_arr(grid, u.values) \
        + 2 * rho.values ** 0.25 * u.values[:, None] * g14[None, :]
    err = float(np.max(np.abs(lhs - rhs)))
    scale = max(float(np.max(np.abs(lhs))), 1.0)
    return FunctionalReport("grad_sqrtrho_u", err, tol * scale,
                            rel_tol=0.0, abs_tol=0.0)
