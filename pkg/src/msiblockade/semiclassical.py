"""Mean-field (noise-free) tier.

Classical limits of the Langevin equations: the full four-variable system
(Q, P, alpha_c, alpha_e), the mechanically eliminated two-mode reduced
system with its cubic nonlinearity, and their fixed points. This tier is
a cross-check on occupations only; it makes no g2 claims.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root

from .model import SystemParams


@dataclass(frozen=True)
class MeanFieldState:
    q: float = 0.0
    p: float = 0.0
    alpha_c: complex = 0.0
    alpha_e: complex = 0.0

    def photon_numbers(self) -> tuple[float, float]:
        return abs(self.alpha_c) ** 2, abs(self.alpha_e) ** 2


def full_rhs(s: MeanFieldState, p: SystemParams) -> MeanFieldState:
    """Time derivative of the full mean-field system (vacuum input, no noise)."""
    nq = p.omega_m * s.p
    np_ = -p.g_omega * abs(s.alpha_c) ** 2 - p.omega_m * s.q - p.gamma * s.p
    # kappa_c/2 (1 + g_kappa/kappa_c Q) written as (kappa_c + g_kappa Q)/2
    dac = (
        (1j * (p.delta_c - p.g_omega * s.q) - 0.5 * (p.kappa_c + p.g_kappa * s.q)) * s.alpha_c
        - 1j * p.J * s.alpha_e
        + p.eps_c
    )
    dae = (1j * p.delta_e - 0.5 * p.kappa_e) * s.alpha_e - 1j * p.J * s.alpha_c + p.eps_e
    return MeanFieldState(q=nq, p=np_, alpha_c=dac, alpha_e=dae)


def _pack(s: MeanFieldState) -> np.ndarray:
    return np.array([s.q, s.p, s.alpha_c.real, s.alpha_c.imag, s.alpha_e.real, s.alpha_e.imag])


def _unpack(y) -> MeanFieldState:
    return MeanFieldState(q=y[0], p=y[1], alpha_c=y[2] + 1j * y[3], alpha_e=y[4] + 1j * y[5])


def integrate_full(
    p: SystemParams, t_grid, initial: MeanFieldState | None = None, rtol: float = 1e-8
) -> list[MeanFieldState]:
    """Adaptive integration of the full mean-field system over ``t_grid``."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    s0 = initial or MeanFieldState()

    def rhs(t, y):
        return _pack(full_rhs(_unpack(y), p))

    t0 = min(0.0, t_grid[0])
    sol = solve_ivp(rhs, (t0, t_grid[-1]), _pack(s0), t_eval=t_grid, method="DOP853", rtol=rtol, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"mean-field integration failed: {sol.message}")
    return [_unpack(sol.y[:, k]) for k in range(sol.y.shape[1])]


def full_steady_state(p: SystemParams, settle_time: float | None = None) -> MeanFieldState:
    """Long-time state of the full system (needs gamma > 0 and kappa > 0 to settle)."""
    if settle_time is None:
        rates = [r for r in (p.gamma, p.kappa_c, p.kappa_e) if r > 0]
        if not rates:
            raise ValueError("undamped system does not settle; give settle_time explicitly")
        settle_time = 50.0 / min(rates)
    return integrate_full(p, np.array([settle_time]))[-1]


# -- reduced two-mode dynamics ---------------------------------------------


def nonlinear_coefficient(p: SystemParams) -> complex:
    """Coefficient of |alpha_c|^2 alpha_c in the reduced equation.

    (2 i g_omega^2 + g_kappa g_omega) / (2 omega_m): its real part
    +g_kappa g_omega / (2 omega_m) opposes the -kappa_c/2 linear loss.
    """
    return (2j * p.g_omega**2 + p.g_kappa * p.g_omega) / (2.0 * p.omega_m)


def reduced_rhs(alpha_c: complex, alpha_e: complex, p: SystemParams) -> tuple[complex, complex]:
    """Time derivatives of the mechanically eliminated optical amplitudes."""
    dac = (
        (1j * p.delta_c - 0.5 * p.kappa_c) * alpha_c
        + nonlinear_coefficient(p) * abs(alpha_c) ** 2 * alpha_c
        - 1j * p.J * alpha_e
        + p.eps_c
    )
    dae = (1j * p.delta_e - 0.5 * p.kappa_e) * alpha_e - 1j * p.J * alpha_c + p.eps_e
    return dac, dae


def linear_fixed_point(p: SystemParams) -> tuple[complex, complex]:
    """Fixed point of the reduced system with the nonlinear term dropped."""
    m = np.array(
        [
            [1j * p.delta_c - 0.5 * p.kappa_c, -1j * p.J],
            [-1j * p.J, 1j * p.delta_e - 0.5 * p.kappa_e],
        ],
        dtype=complex,
    )
    ac, ae = np.linalg.solve(m, [-p.eps_c, -p.eps_e])
    return complex(ac), complex(ae)


def reduced_fixed_point(p: SystemParams, tol: float = 1e-12) -> tuple[complex, complex, bool]:
    """Fixed point of the reduced nonlinear system.

    Damped root iteration seeded from the linear solution; returns
    (alpha_c, alpha_e, converged).
    """
    ac0, ae0 = linear_fixed_point(p)

    def residual(y):
        dac, dae = reduced_rhs(y[0] + 1j * y[1], y[2] + 1j * y[3], p)
        return [dac.real, dac.imag, dae.real, dae.imag]

    sol = root(residual, [ac0.real, ac0.imag, ae0.real, ae0.imag], method="hybr", tol=tol)
    ac = complex(sol.x[0], sol.x[1])
    ae = complex(sol.x[2], sol.x[3])
    ok = bool(sol.success) and float(np.max(np.abs(residual(sol.x)))) < max(abs(p.eps_c), abs(p.eps_e), 1.0) * 1e-8
    return ac, ae, ok
