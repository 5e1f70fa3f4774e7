"""Contact charts on R^(2n+1), exterior-derivative residuals and potentials.

The canonical contact form theta = ds - sum_i p_i dq^i is implied by a chart,
never stored.  Closeness of 1-forms is certified on finite sample sets; the
residual matrix is the pointwise exterior derivative evaluated with exact
forward-mode derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from .expr import ScalarField

__all__ = [
    "ContactChart",
    "OneForm",
    "GeometryError",
    "contact_eval",
    "reeb_flow",
    "d_residual",
    "is_closed",
    "reconstruct_potential",
    "contact_nondegeneracy",
    "low_discrepancy_samples",
    "potential_form",
]


class GeometryError(Exception):
    pass


@dataclass(frozen=True)
class ContactChart:
    """Canonical chart (s; q^1..q^n; p_1..p_n) with theta = ds - sum p_i dq^i."""

    n: int
    s_name: str = "s"
    q_names: tuple[str, ...] = ()
    p_names: tuple[str, ...] = ()
    time_extended: bool = False  # marks q^n as the time coordinate

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("chart dimension n must be >= 1")
        q = self.q_names or tuple(f"q{i}" for i in range(1, self.n + 1))
        p = self.p_names or tuple(f"p{i}" for i in range(1, self.n + 1))
        object.__setattr__(self, "q_names", q)
        object.__setattr__(self, "p_names", p)
        if len(q) != self.n or len(p) != self.n:
            raise GeometryError("need exactly n extensive and n intensive names")
        names = (self.s_name,) + q + p
        if len(set(names)) != len(names):
            raise GeometryError("coordinate names must be distinct")

    @property
    def coords(self) -> tuple[str, ...]:
        return (self.s_name,) + self.q_names + self.p_names


def contact_eval(chart: ContactChart, x: dict[str, float], v: dict[str, float]) -> float:
    """Value of the canonical contact form on tangent vector v at x."""
    unknown = set(v) - set(chart.coords)
    if unknown:
        raise GeometryError(f"tangent components for unknown coordinates: {sorted(unknown)}")
    out = v.get(chart.s_name, 0.0)
    for qn, pn in zip(chart.q_names, chart.p_names):
        out -= x[pn] * v.get(qn, 0.0)
    return out


def reeb_flow(x: dict[str, float], tau: float, s_name: str = "s") -> dict[str, float]:
    """Flow of the Reeb field d/ds for time tau: shifts s only."""
    out = dict(x)
    out[s_name] = out[s_name] + tau
    return out


@dataclass(frozen=True)
class OneForm:
    """1-form sum_i a_i dx^i with scalar-field coefficients over shared coordinates."""

    coords: tuple[str, ...]
    coefficients: tuple[ScalarField, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(self.coords):
            raise GeometryError("coefficient count must equal coordinate count")
        for c in self.coefficients:
            if c.coords != self.coords:
                raise GeometryError("all coefficients must live on the form's coordinate space")

    def values(self, x: dict[str, float]) -> np.ndarray:
        return np.array([c.value(x) for c in self.coefficients])


def potential_form(potential: ScalarField) -> OneForm:
    """The exact form dU, with symbolically differentiated coefficients."""
    return OneForm(
        coords=potential.coords,
        coefficients=tuple(potential.partial(name) for name in potential.coords),
    )


def d_residual(form: OneForm, x: dict[str, float]) -> np.ndarray:
    """C_ij = da_i/dx^j - da_j/dx^i; exactly antisymmetric, zero iff closed at x."""
    m = len(form.coords)
    jac = np.array([c.grad(x) for c in form.coefficients])
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            c = jac[i, j] - jac[j, i]
            out[i, j] = c
            out[j, i] = -c
    return out


def is_closed(form: OneForm, samples: list[dict[str, float]], tol: float = 1e-8) -> tuple[bool, float]:
    """Closeness verdict over a sample set, with the worst residual for reporting."""
    if not samples:
        raise GeometryError("empty sample set")
    worst = 0.0
    for x in samples:
        worst = max(worst, float(np.abs(d_residual(form, x)).max()))
    return worst <= tol, worst


def _leg_integral(form: OneForm, axis: int, start: float, stop: float,
                  fixed: dict[str, float], nodes: int) -> float:
    """Gauss-Legendre integral of a_i dx^i along one axis-parallel leg."""
    if start == stop:
        return 0.0
    xs, ws = leggauss(nodes)
    mid, half = 0.5 * (start + stop), 0.5 * (stop - start)
    name = form.coords[axis]
    total = 0.0
    point = dict(fixed)
    for xi, wi in zip(xs, ws):
        point[name] = mid + half * xi
        total += wi * form.coefficients[axis].value(point)
    return half * total


def _staircase(form: OneForm, base: dict[str, float], target: dict[str, float],
               order: list[int], nodes: int) -> float:
    current = {name: base[name] for name in form.coords}
    total = 0.0
    for axis in order:
        name = form.coords[axis]
        total += _leg_integral(form, axis, current[name], target[name], current, nodes)
        current[name] = target[name]
    return total


def reconstruct_potential(form: OneForm, base: dict[str, float], target: dict[str, float],
                          nodes: int = 32) -> tuple[float, float]:
    """Line-integral potential with U(base) = 0, plus a path-dependence report.

    Integrates along the axis-ordered staircase path; the residual compares
    against the reversed axis order and is nonzero for non-exact forms.
    """
    order = list(range(len(form.coords)))
    u_fwd = _staircase(form, base, target, order, nodes)
    u_rev = _staircase(form, base, target, order[::-1], nodes)
    return u_fwd, abs(u_fwd - u_rev)


def contact_nondegeneracy(chart: ContactChart, x: dict[str, float]) -> float:
    """det of d(theta) on the computed basis of D = ker theta; nonzero certifies contact."""
    n = chart.n
    dim = 2 * n + 1
    coords = chart.coords
    idx = {name: k for k, name in enumerate(coords)}

    basis = []
    for pn in chart.p_names:  # vertical-in-p directions
        v = np.zeros(dim)
        v[idx[pn]] = 1.0
        basis.append(v)
    for qn, pn in zip(chart.q_names, chart.p_names):  # horizontal lifts d_q + p d_s
        v = np.zeros(dim)
        v[idx[qn]] = 1.0
        v[idx[chart.s_name]] = x[pn]
        basis.append(v)

    def dtheta(u: np.ndarray, v: np.ndarray) -> float:
        # d(theta) = -sum_i dp_i ^ dq^i
        total = 0.0
        for qn, pn in zip(chart.q_names, chart.p_names):
            total -= u[idx[pn]] * v[idx[qn]] - v[idx[pn]] * u[idx[qn]]
        return total

    mat = np.array([[dtheta(u, v) for v in basis] for u in basis])
    return float(np.linalg.det(mat))


def low_discrepancy_samples(box: dict[str, tuple[float, float]], count: int,
                            seed: int = 0) -> list[dict[str, float]]:
    """Halton points in an axis-aligned box; deterministic for a given seed."""
    names = list(box)
    sampler = qmc.Halton(d=len(names), scramble=False)
    if seed:
        sampler.fast_forward(seed)
    unit = sampler.random(count)
    lo = np.array([box[n][0] for n in names])
    hi = np.array([box[n][1] for n in names])
    pts = lo + unit * (hi - lo)
    return [dict(zip(names, map(float, row))) for row in pts]
