"""Thermoelastic material point: entropy form, constitutive closure, dynamics.

Base coordinates, in fixed order everywhere (forms, configs, CSV):
eps, F11..F33 (row-major), H1..H3.  The entropy form is

    eta = theta^-1 d(eps) - (theta rho)^-1 (sigma:F^-1) : dF
          - rho^-1 (grad theta^-1) . dH

and closes exactly when its coefficients come from a potential U(eps, F, H):
theta^-1 = dU/d(eps), sigma:F^-1 = -rho theta dU/dF, grad theta^-1 = -rho dU/dH.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import ScalarField, const, div, mul, neg
from .geometry import OneForm

__all__ = [
    "EPS_NAME",
    "F_NAMES",
    "H_NAMES",
    "BASE_COORDS",
    "ETA_PRIME_COORDS",
    "ThermoelasticState",
    "ThermoelasticConstitutive",
    "ThermoelasticForcing",
    "ModelError",
    "TemperatureSingularity",
    "constitutive_from_potential",
    "potential_coefficients",
    "entropy_form",
    "step",
    "rates",
    "closeness_system_residual",
]

EPS_NAME = "eps"
F_NAMES = tuple(f"F{i}{j}" for i in range(1, 4) for j in range(1, 4))
H_NAMES = ("H1", "H2", "H3")
BASE_COORDS = (EPS_NAME,) + F_NAMES + H_NAMES

BETA_NAMES = ("beta1", "beta2", "beta3")
ETA_PRIME_COORDS = (EPS_NAME,) + F_NAMES + BETA_NAMES + ("t",)


class ModelError(Exception):
    pass


class TemperatureSingularity(ModelError):
    """dU/d(eps) vanished: the inverse temperature is undefined."""


@dataclass
class ThermoelasticState:
    eps: float
    F: np.ndarray  # 3x3
    H: np.ndarray  # 3-vector

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=float).reshape(3, 3)
        self.H = np.asarray(self.H, dtype=float).reshape(3)
        if np.linalg.det(self.F) <= 0.0:
            raise ModelError("deformation gradient must have positive determinant")

    def binding(self) -> dict[str, float]:
        out = {EPS_NAME: self.eps}
        out.update(zip(F_NAMES, self.F.ravel()))
        out.update(zip(H_NAMES, self.H))
        return out

    def vector(self) -> np.ndarray:
        return np.concatenate(([self.eps], self.F.ravel(), self.H))

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "ThermoelasticState":
        return cls(eps=float(y[0]), F=y[1:10].reshape(3, 3), H=y[10:13])


@dataclass(frozen=True)
class ThermoelasticConstitutive:
    potential: ScalarField  # over BASE_COORDS
    rho: float
    k: float  # Fourier coefficient, grad theta^-1 = k q

    def __post_init__(self):
        if self.potential.coords != BASE_COORDS:
            raise ModelError("potential must be a field over the 13 base coordinates")
        if self.rho <= 0 or self.k <= 0:
            raise ModelError("rho and k must be positive")


@dataclass(frozen=True)
class ThermoelasticForcing:
    L: Callable[[float], np.ndarray]  # velocity gradient
    divq: Callable[[float], float]


def constitutive_from_potential(c: ThermoelasticConstitutive,
                                x: ThermoelasticState) -> tuple[float, np.ndarray, np.ndarray]:
    """(theta^-1, sigma:F^-1 tensor, grad theta^-1) from exact gradients of U."""
    g = c.potential.grad(x.binding())
    u_eps = float(g[0])
    if u_eps == 0.0:
        raise TemperatureSingularity("dU/d(eps) = 0 at the probe state")
    theta = 1.0 / u_eps
    stress_term = -c.rho * theta * g[1:10].reshape(3, 3)
    grad_thetainv = -c.rho * g[10:13]
    return u_eps, stress_term, grad_thetainv


def potential_coefficients(c: ThermoelasticConstitutive):
    """The constitutive fields as expressions: theta^-1, sigma:F^-1 (9), grad theta^-1 (3)."""
    u = c.potential
    thetainv = u.partial(EPS_NAME)
    stress = tuple(
        ScalarField(
            neg(mul(const(c.rho), div(u.partial(name).expression, thetainv.expression))),
            BASE_COORDS,
        )
        for name in F_NAMES
    )
    grad_thetainv = tuple(
        ScalarField(mul(const(-c.rho), u.partial(name).expression), BASE_COORDS)
        for name in H_NAMES
    )
    return thetainv, stress, grad_thetainv


def entropy_form(thetainv: ScalarField, stress: tuple[ScalarField, ...],
                 grad_thetainv: tuple[ScalarField, ...], rho: float) -> OneForm:
    """Assemble eta from free coefficient fields, signs fixed by the balance."""
    if len(stress) != 9 or len(grad_thetainv) != 3:
        raise ModelError("need 9 stress components and 3 gradient components")
    coeffs = [thetainv]
    for s in stress:  # -(theta rho)^-1 sigma:F^-1 = -(1/rho) thetainv * s
        coeffs.append(ScalarField(
            neg(mul(div(thetainv.expression, const(rho)), s.expression)), BASE_COORDS))
    for g in grad_thetainv:  # -rho^-1 grad theta^-1
        coeffs.append(ScalarField(neg(div(g.expression, const(rho))), BASE_COORDS))
    return OneForm(BASE_COORDS, tuple(coeffs))


def rates(x: ThermoelasticState, c: ThermoelasticConstitutive, f: ThermoelasticForcing,
          t: float) -> np.ndarray:
    """Right-hand side of the 13-dim system at (t, x)."""
    g = c.potential.grad(x.binding())
    u_eps = float(g[0])
    if u_eps == 0.0:
        raise TemperatureSingularity("dU/d(eps) = 0 during integration")
    theta = 1.0 / u_eps
    stress_term = -c.rho * theta * g[1:10].reshape(3, 3)  # sigma:F^-1 dual to dF

    L = np.asarray(f.L(t), dtype=float).reshape(3, 3)
    F_dot = L @ x.F
    eps_dot = float((stress_term * F_dot).sum()) / c.rho - f.divq(t) / c.rho
    H_dot = (c.rho / c.k) * g[10:13]
    return np.concatenate(([eps_dot], F_dot.ravel(), H_dot))


def _rhs(y: np.ndarray, c, f, t: float) -> np.ndarray:
    return rates(ThermoelasticState.from_vector(y), c, f, t)


def step(x: ThermoelasticState, c: ThermoelasticConstitutive, f: ThermoelasticForcing,
         t: float, dt: float) -> ThermoelasticState:
    """One classical RK4 step; rejects loss of orientation (det F <= 0)."""
    if dt <= 0:
        raise ModelError("dt must be positive")
    y = x.vector()
    k1 = _rhs(y, c, f, t)
    k2 = _rhs(y + 0.5 * dt * k1, c, f, t + 0.5 * dt)
    k3 = _rhs(y + 0.5 * dt * k2, c, f, t + 0.5 * dt)
    k4 = _rhs(y + dt * k3, c, f, t + dt)
    y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ThermoelasticState.from_vector(y_next)  # det check in constructor


def closeness_system_residual(thetainv: ScalarField, stress_over_theta: tuple[ScalarField, ...],
                              q_dot_beta: ScalarField, x: dict[str, float]) -> np.ndarray:
    """Residuals of the six closeness conditions for the time-extended form eta'.

    Coefficient fields live over (eps, F, beta, t).  Conditions in order:
    (eps,F) curl; d(theta^-1)/d(beta); d(sigma:F^-1/theta)/d(beta);
    d(q.beta)/d(beta); (F,t) curl; (eps,t) curl.  Each entry is the max-abs
    residual of its block.
    """
    coords = ETA_PRIME_COORDS
    for fld in (thetainv, q_dot_beta, *stress_over_theta):
        if fld.coords != coords:
            raise ModelError("eta' coefficients must live over (eps, F, beta, t)")
    if len(stress_over_theta) != 9:
        raise ModelError("need 9 components of sigma:F^-1/theta")

    g_thetainv = thetainv.grad(x)
    g_stress = np.array([s.grad(x) for s in stress_over_theta])
    g_qb = q_dot_beta.grad(x)

    i_eps = 0
    i_f = slice(1, 10)
    i_beta = slice(10, 13)
    i_t = 13

    r1 = np.abs(g_thetainv[i_f] + g_stress[:, i_eps]).max()
    r2 = np.abs(g_thetainv[i_beta]).max()
    r3 = np.abs(g_stress[:, i_beta]).max()
    r4 = np.abs(g_qb[i_beta]).max()
    r5 = np.abs(g_stress[:, i_t] + g_qb[i_f]).max()
    r6 = abs(g_thetainv[i_t] - g_qb[i_eps])
    return np.array([r1, r2, r3, r4, r5, r6])
