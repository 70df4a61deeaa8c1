"""Mean-field tier: full four-variable dynamics, reduced model, fixed points."""

import numpy as np
import pytest

from msiblockade.model import SystemParams
from msiblockade.semiclassical import (
    MeanFieldState,
    full_rhs,
    full_steady_state,
    integrate_full,
    linear_fixed_point,
    nonlinear_coefficient,
    reduced_fixed_point,
    reduced_rhs,
)


def params(**kw):
    base = dict(
        omega_m=1.0e6, kappa_c=5.0e3, kappa_e=5.0e3, gamma=2.0e3,
        g_omega=200.0, g_kappa=500.0, J=2.0e5,
        delta_c=-1.0e5, delta_e=-1.0e5, eps_c=5.0e3, eps_e=5.0e3,
    )
    base.update(kw)
    return SystemParams(**base)


class TestFullDynamics:
    def test_origin_fixed_without_drive(self):
        p = params(eps_c=0.0, eps_e=0.0)
        d = full_rhs(MeanFieldState(), p)
        assert d.q == 0.0 and d.p == 0.0
        assert d.alpha_c == 0.0 and d.alpha_e == 0.0
        final = integrate_full(p, [1e-3])[-1]
        assert abs(final.alpha_c) < 1e-12 and abs(final.q) < 1e-12

    def test_g_omega_zero_mechanics_rings_down(self):
        p = params(g_omega=0.0)
        s0 = MeanFieldState(q=1.0, p=0.0)
        final = integrate_full(p, [50.0 / p.gamma], initial=s0)[-1]
        assert abs(final.q) < 1e-8
        assert abs(final.p) < 1e-8

    def test_steady_mechanical_displacement(self):
        # classical elimination: Q_ss = -g_omega |alpha_c|^2 / omega_m
        p = params()
        st = full_steady_state(p)
        n_c = abs(st.alpha_c) ** 2
        assert st.q == pytest.approx(-p.g_omega * n_c / p.omega_m, rel=1e-6)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            integrate_full(params(), [2.0, 1.0])

    def test_undamped_needs_explicit_settle_time(self):
        p = params(kappa_c=0.0, kappa_e=0.0, gamma=0.0, g_kappa=0.0)
        with pytest.raises(ValueError, match="settle_time"):
            full_steady_state(p)


class TestReducedModel:
    def test_nonlinear_coefficient_sign_structure(self):
        # real part +g_kappa g_omega / 2 omega_m opposes the -kappa_c/2 loss
        p = params()
        c = nonlinear_coefficient(p)
        assert c.real == pytest.approx(p.g_kappa * p.g_omega / (2.0 * p.omega_m))
        assert c.real > 0.0
        assert c.imag == pytest.approx(2.0 * p.g_omega**2 / (2.0 * p.omega_m))

    def test_nonlinear_term_vanishes_at_origin(self):
        p = params()
        dac, dae = reduced_rhs(0.0, 0.0, p)
        assert dac == p.eps_c and dae == p.eps_e

    def test_linear_fixed_point_solves_system(self):
        p = params(g_omega=0.0, g_kappa=0.0)
        ac, ae = linear_fixed_point(p)
        dac, dae = reduced_rhs(ac, ae, p)
        assert abs(dac) < 1e-8 * abs(p.eps_c)
        assert abs(dae) < 1e-8 * abs(p.eps_e)

    def test_reduced_fixed_point_converges_and_is_stationary(self):
        p = params()
        ac, ae, ok = reduced_fixed_point(p)
        assert ok
        dac, dae = reduced_rhs(ac, ae, p)
        assert abs(dac) < 1e-6 and abs(dae) < 1e-6

    def test_reduced_matches_full_on_preset(self):
        # elimination validity at delta = -0.1 omega_m
        p = params()
        full = full_steady_state(p)
        ac, ae, ok = reduced_fixed_point(p)
        assert ok
        assert abs(ac) ** 2 == pytest.approx(abs(full.alpha_c) ** 2, rel=1e-3)
        assert abs(ae) ** 2 == pytest.approx(abs(full.alpha_e) ** 2, rel=1e-3)

    def test_weak_drive_linearity(self):
        p = params()
        a1, _, _ = reduced_fixed_point(p)
        a2, _, _ = reduced_fixed_point(p.with_(eps_c=p.eps_c / 2.0, eps_e=p.eps_e / 2.0))
        assert abs(a2) == pytest.approx(abs(a1) / 2.0, rel=1e-2)
