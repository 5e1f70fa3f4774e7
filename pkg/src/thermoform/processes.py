"""Process curves, entropy action integrals, admissibility and the state-space metric.

A process is a time-sampled curve in the base coordinates.  Admissibility is
the per-point sign test d(sigma)(tangent) >= 0 along the lifted curve on a
constitutive surface; the entropy change decomposes as
delta s = delta U + delta sigma.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .expr import ScalarField
from .geometry import OneForm
from .legendre import ConstitutiveSurface

__all__ = [
    "ProcessCurve",
    "AdmissibilityReport",
    "ProcessError",
    "entropy_action",
    "admissibility",
    "thermo_metric",
    "godograph_det",
    "rate_relation_residual",
    "spinodal_scan",
    "DEGENERATE_DET",
]

DEGENERATE_DET = 1e-12


class ProcessError(Exception):
    pass


@dataclass(frozen=True)
class ProcessCurve:
    """Ordered samples (t_i, q_i) over fixed base coordinates; t strictly increasing."""

    coords: tuple[str, ...]
    times: np.ndarray
    points: np.ndarray  # shape (len(times), len(coords))

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        q = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", q)
        if t.ndim != 1 or len(t) < 2:
            raise ProcessError("a curve needs at least 2 time samples")
        if np.any(np.diff(t) <= 0):
            raise ProcessError("times must be strictly increasing")
        if q.shape != (len(t), len(self.coords)):
            raise ProcessError("points must be (n_samples, n_coords)")

    @classmethod
    def from_bindings(cls, times, bindings: list[dict[str, float]],
                      coords: tuple[str, ...]) -> "ProcessCurve":
        pts = np.array([[b[name] for name in coords] for b in bindings])
        return cls(coords, np.asarray(times, dtype=float), pts)

    def binding(self, i: int) -> dict[str, float]:
        return dict(zip(self.coords, map(float, self.points[i])))

    def reversed(self) -> "ProcessCurve":
        t = self.times
        return ProcessCurve(self.coords, t[0] + t[-1] - t[::-1], self.points[::-1].copy())


@dataclass(frozen=True)
class AdmissibilityReport:
    rates: np.ndarray           # interior production rates d(sigma)(tangent)
    admissible: bool
    violating_intervals: tuple[int, ...]
    delta_sigma: float
    delta_U: float
    delta_s: float


def entropy_action(curve: ProcessCurve, form: OneForm, nodes: int = 4) -> float:
    """Integral of the pulled-back form along the piecewise-linear curve.

    Per-interval Gauss-Legendre quadrature of a_i(gamma(t)) gamma'^i(t).
    """
    if set(curve.coords) != set(form.coords):
        raise ProcessError("curve and form must share a coordinate space")
    col = [curve.coords.index(name) for name in form.coords]
    pts = curve.points[:, col]  # reorder to the form's coordinate order

    xs, ws = leggauss(max(nodes, 4))
    total = 0.0
    for i in range(len(curve.times) - 1):
        a, b = pts[i], pts[i + 1]
        dq = b - a
        for xi, wi in zip(xs, ws):
            lam = 0.5 * (xi + 1.0)
            point = dict(zip(form.coords, map(float, a + lam * dq)))
            coeff = form.values(point)
            total += 0.5 * wi * float(coeff @ dq)
    return total


def admissibility(surface: ConstitutiveSurface, curve: ProcessCurve,
                  tol: float = 1e-9, include_endpoints: bool = False) -> AdmissibilityReport:
    """Sign test of the production rate along the curve.

    Tangents use central differences on the grid (one-sided at endpoints);
    endpoint rates are excluded from the verdict by default because their
    stencils are first-order.
    """
    if set(curve.coords) != set(surface.chart.q_names):
        raise ProcessError("curve coordinates must match the surface's base coordinates")
    col = [curve.coords.index(name) for name in surface.chart.q_names]
    pts = curve.points[:, col]
    t = curve.times
    n = len(t)

    tangents = np.empty_like(pts)
    tangents[0] = (pts[1] - pts[0]) / (t[1] - t[0])
    tangents[-1] = (pts[-1] - pts[-2]) / (t[-1] - t[-2])
    for i in range(1, n - 1):
        tangents[i] = (pts[i + 1] - pts[i - 1]) / (t[i + 1] - t[i - 1])

    all_rates = np.empty(n)
    for i in range(n):
        b = dict(zip(surface.chart.q_names, map(float, pts[i])))
        all_rates[i] = float(surface.production.grad(b) @ tangents[i])

    judged = slice(0, n) if include_endpoints else slice(1, n - 1)
    rates = all_rates[judged]
    offset = 0 if include_endpoints else 1
    bad = tuple(int(i + offset) for i in np.nonzero(rates < -tol)[0])

    b0 = dict(zip(surface.chart.q_names, map(float, pts[0])))
    b1 = dict(zip(surface.chart.q_names, map(float, pts[-1])))
    d_sigma = surface.production.value(b1) - surface.production.value(b0)
    d_u = surface.potential.value(b1) - surface.potential.value(b0)
    return AdmissibilityReport(
        rates=rates,
        admissible=len(bad) == 0,
        violating_intervals=bad,
        delta_sigma=d_sigma,
        delta_U=d_u,
        delta_s=d_u + d_sigma,
    )


def thermo_metric(potential: ScalarField, q: dict[str, float]) -> np.ndarray:
    """Hessian of the potential: the thermodynamic metric at q."""
    return potential.hessian(q)


def godograph_det(potential: ScalarField, q: dict[str, float]) -> float:
    """det of the Hessian; |det| < 1e-12 means the dual map is locally non-invertible."""
    return float(np.linalg.det(thermo_metric(potential, q)))


def rate_relation_residual(potential: ScalarField, curve: ProcessCurve) -> np.ndarray:
    """Residual of dp_i/dt = U_{,q^i q^j} dq^j/dt (+ U_{,q^i t}) per interior sample.

    Time derivatives of p come from central differences; the right side uses
    exact second derivatives.  O(h^2) in the grid spacing for smooth data.
    """
    has_t = "t" in potential.coords
    q_names = tuple(n for n in potential.coords if n != "t")
    if set(curve.coords) != set(q_names):
        raise ProcessError("curve coordinates must match the potential's space coordinates")
    col = [curve.coords.index(name) for name in q_names]
    pts = curve.points[:, col]
    t = curve.times
    n = len(t)

    def bind(i: int) -> dict[str, float]:
        b = dict(zip(q_names, map(float, pts[i])))
        if has_t:
            b["t"] = float(t[i])
        return b

    p = np.array([potential.grad(bind(i), q_names) for i in range(n)])
    out = np.empty(n - 2)
    for i in range(1, n - 1):
        dt = t[i + 1] - t[i - 1]
        p_dot = (p[i + 1] - p[i - 1]) / dt
        q_dot = (pts[i + 1] - pts[i - 1]) / dt
        hess = potential.hessian(bind(i), q_names)
        rhs = hess @ q_dot
        if has_t:
            rhs = rhs + np.array(
                [potential.hessian(bind(i), (name, "t"))[0, 1] for name in q_names])
        out[i - 1] = float(np.abs(p_dot - rhs).max())
    return out


def spinodal_scan(potential: ScalarField, scan_name: str, lo: float, hi: float,
                  fixed: dict[str, float], samples: int = 200,
                  xtol: float = 1e-4) -> list[float]:
    """Sign changes of the godograph determinant along one coordinate, by bisection."""
    def det_at(v: float) -> float:
        b = dict(fixed)
        b[scan_name] = v
        return godograph_det(potential, b)

    xs = np.linspace(lo, hi, samples)
    ds = [det_at(v) for v in xs]
    roots = []
    for i in range(len(xs) - 1):
        if ds[i] == 0.0:
            roots.append(float(xs[i]))
            continue
        if ds[i] * ds[i + 1] < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            fa = ds[i]
            while b - a > xtol:
                mid = 0.5 * (a + b)
                fm = det_at(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            roots.append(0.5 * (a + b))
    return roots
