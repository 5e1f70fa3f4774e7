"""Shared finite-difference oracles and random-input builders for the suite."""
import numpy as np
import pytest


def fd_grad(f, x: dict, names, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with scale-adaptive step."""
    out = np.empty(len(names))
    for i, name in enumerate(names):
        step = h * max(1.0, abs(x[name]))
        hi, lo = dict(x), dict(x)
        hi[name] = x[name] + step
        lo[name] = x[name] - step
        out[i] = (f(hi) - f(lo)) / (2.0 * step)
    return out


def fd_hessian(f, x: dict, names, h: float = 1e-4) -> np.ndarray:
    """Second-order central-difference Hessian."""
    n = len(names)
    out = np.empty((n, n))
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            ha = h * max(1.0, abs(x[a]))
            hb = h * max(1.0, abs(x[b]))
            if i == j:
                hi, lo = dict(x), dict(x)
                hi[a] = x[a] + ha
                lo[a] = x[a] - ha
                out[i, i] = (f(hi) - 2.0 * f(x) + f(lo)) / ha ** 2
            else:
                pp, pm, mp, mm = dict(x), dict(x), dict(x), dict(x)
                pp[a] += ha; pp[b] += hb
                pm[a] += ha; pm[b] -= hb
                mp[a] -= ha; mp[b] += hb
                mm[a] -= ha; mm[b] -= hb
                out[i, j] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * ha * hb)
    return out


def fd_curl(form, x: dict, h: float = 1e-6) -> np.ndarray:
    """Finite-difference exterior-derivative matrix of a OneForm."""
    names = form.coords
    m = len(names)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            def coeff_i(point, _i=i):
                return form.coefficients[_i].value(point)
            out[i, j] = fd_grad(coeff_i, x, (names[j],), h)[0]
    return out - out.T


def random_polynomial_text(names, rng, terms: int = 8, degree: int = 3,
                           offset: str | None = None) -> str:
    """Random multivariate polynomial as expression text."""
    parts = []
    for _ in range(terms):
        c = rng.uniform(-1.0, 1.0)
        k = int(rng.integers(1, degree + 1))
        factors = rng.choice(names, size=k)
        parts.append(f"{c!r}*" + "*".join(factors))
    text = " + ".join(parts)
    if offset is not None:
        text = offset + " + " + text
    return text


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
