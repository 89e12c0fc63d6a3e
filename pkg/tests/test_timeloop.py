"""Time integration: schemes, step control, monitors, budgets, equivalence."""

import numpy as np
import pytest

from qnslab.fields import Grid, ScalarField, VectorField
from qnslab.functionals import DISSIPATION_KEYS
from qnslab.physics import QnsParams, State, to_w
from qnslab.systems import rhs_approx_u
from qnslab.timeloop import (IntegratorConfig, PositivityError, cfl_dt,
                             energy_budget, equivalence_run, integrate, step)


def _acoustic(n=128, amp=0.1):
    g = Grid(n)
    x = g.coords()[0]
    return State(ScalarField(g, 1.0 + amp * np.sin(x)), VectorField.zero(g))


PARAMS = QnsParams(nu=1.0, kappa=1.0 / 11.0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(scheme="euler")
        with pytest.raises(ValueError):
            IntegratorConfig(dt_init=1.0, dt_max=0.5)
        with pytest.raises(ValueError):
            IntegratorConfig(t_end=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(monitor_every=0)

    def test_fixed_dt(self):
        c = IntegratorConfig.fixed_dt(1e-3, t_end=0.1)
        assert c.dt_min == c.dt_init == c.dt_max == 1e-3


class TestStep:
    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step(_acoustic(32), PARAMS, rhs_approx_u, 0.0)

    def test_rk4_matches_imex_to_scheme_order(self):
        st = _acoustic(64)
        a = step(st, PARAMS, rhs_approx_u, 1e-4, scheme="rk4-explicit")
        b = step(st, PARAMS, rhs_approx_u, 1e-4, scheme="imex")
        assert np.max(np.abs(a.rho.values - b.rho.values)) < 1e-10
        assert np.max(np.abs(a.vel.values - b.vel.values)) < 1e-8

    def test_advances_time(self):
        st = _acoustic(32)
        out = step(st, PARAMS, rhs_approx_u, 1e-3)
        assert out.time == pytest.approx(1e-3)

    def test_positivity_hard_stop(self):
        # a huge step on strong data drives the density negative
        st = _acoustic(32, amp=0.9)
        with pytest.raises(PositivityError):
            step(st, PARAMS.with_(nu=1e-6, kappa=0.0), rhs_approx_u, 5.0,
                 scheme="rk4-explicit")

    def test_imex_second_order_in_time(self):
        st = _acoustic(64)
        ref = st
        for _ in range(64):
            ref = step(ref, PARAMS, rhs_approx_u, 0.02 / 64,
                       scheme="rk4-explicit")
        errs = []
        for m in (4, 8, 16):
            cur = st
            for _ in range(m):
                cur = step(cur, PARAMS, rhs_approx_u, 0.02 / m, scheme="imex")
            errs.append(np.max(np.abs(cur.rho.values - ref.rho.values)))
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert order1 > 1.7 and order2 > 1.7


class TestIntegrate:
    def test_reaches_t_end_exactly(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=0.01)
        traj = integrate(_acoustic(64), PARAMS, cfg)
        assert traj.status == "completed"
        assert traj.times[-1] == pytest.approx(0.01, abs=1e-12)

    def test_monitor_cadence(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=0.01, monitor_every=5)
        traj = integrate(_acoustic(64), PARAMS, cfg)
        assert len(traj.records) == 3  # t=0, t=0.005, t=0.01

    def test_records_contain_dissipation_keys(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=5e-3)
        traj = integrate(_acoustic(64), PARAMS, cfg)
        assert set(traj.records[-1].dissipation) == set(DISSIPATION_KEYS)
        assert all(rec.is_finite() for rec in traj.records)

    def test_dissipation_time_integrals_accumulate(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=0.01)
        traj = integrate(_acoustic(64), PARAMS, cfg)
        acc = traj.dissipation_time_integrals
        assert acc["nu_rho_Du2"] > 0.0
        assert acc["r0_u2"] == 0.0  # r0 = 0 here

    def test_positivity_failure_reported_in_status(self):
        st = _acoustic(32, amp=0.95)
        p = PARAMS.with_(nu=1e-8, kappa=0.0)
        cfg = IntegratorConfig.fixed_dt(0.5, t_end=5.0,
                                        positivity_floor=0.2)
        traj = integrate(st, p, cfg)
        assert traj.status.startswith("positivity-failure")

    def test_keep_states_false_drops_snapshots(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=5e-3)
        traj = integrate(_acoustic(64), PARAMS, cfg, keep_states=False)
        assert traj.states == []
        assert len(traj.records) > 1

    def test_cfl_estimate_positive_and_resolution_dependent(self):
        coarse = cfl_dt(_acoustic(32), PARAMS,
                        IntegratorConfig(scheme="imex"))
        fine = cfl_dt(_acoustic(128), PARAMS,
                      IntegratorConfig(scheme="imex"))
        assert 0 < fine < coarse

    def test_w_form_integration(self):
        st = to_w(_acoustic(64), PARAMS)
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=5e-3)
        traj = integrate(st, PARAMS, cfg)
        assert traj.status == "completed"
        assert traj.states[-1].form == "w"


class TestEnergyBudget:
    def test_steady_state_zero_residual(self):
        g = Grid(64)
        st = State(ScalarField.constant(g, 1.0), VectorField.zero(g))
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=0.01)
        traj = integrate(st, PARAMS, cfg)
        assert energy_budget(traj, PARAMS).max_residual < 1e-10

    def test_requires_uniform_cadence(self):
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=9e-3, monitor_every=4)
        traj = integrate(_acoustic(64), PARAMS, cfg)
        with pytest.raises(ValueError):
            energy_budget(traj, PARAMS)  # cadence 4 then remainder 1

    def test_residual_second_order(self):
        st = _acoustic(64, amp=0.3)
        p = QnsParams(nu=1.0, kappa=1.0 / 11.0, eps=1e-3)
        res = []
        for dt in (4e-4, 2e-4, 1e-4):
            cfg = IntegratorConfig.fixed_dt(dt, t_end=0.01)
            traj = integrate(st, p, cfg)
            res.append(energy_budget(traj, p).max_residual)
        assert np.log2(res[0] / res[1]) == pytest.approx(2.0, abs=0.3)
        assert np.log2(res[1] / res[2]) == pytest.approx(2.0, abs=0.3)

    def test_dissipation_column_nonnegative(self):
        cfg = IntegratorConfig.fixed_dt(2e-4, t_end=4e-3)
        p = PARAMS.with_(r0=0.1, r1=0.1)
        traj = integrate(_acoustic(64), p, cfg)
        budget = energy_budget(traj, p)
        assert np.all(budget.dissipation >= 0.0)


class TestEquivalence:
    def test_matched_runs_agree(self):
        st = _acoustic(128)
        p = QnsParams(nu=1.0, kappa=1.0 / 11.0, eps=1e-3)
        cfg = IntegratorConfig.fixed_dt(1e-4, t_end=0.01, monitor_every=10)
        rep = equivalence_run(st, p, cfg)
        assert rep.max_error < 1e-6
        assert rep.status_u == rep.status_w == "completed"

    def test_requires_u_form(self):
        st = to_w(_acoustic(64), PARAMS)
        cfg = IntegratorConfig.fixed_dt(1e-3, t_end=5e-3)
        with pytest.raises(ValueError):
            equivalence_run(st, PARAMS, cfg)
