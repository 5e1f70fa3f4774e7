"""Command-line surface: closeness checks, simulations, surfaces, process reports.

All outputs are deterministic: CSV cells are printed with 17 significant
digits and LF line endings, JSON keys are sorted.  Exit codes: 0 success,
1 config/schema error, 2 closeness check failed, 3 mid-run domain exit.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys

import numpy as np

from . import config as cfg
from .expr import DomainError, ScalarField
from .ferroelectric import (
    FE_COORDS,
    FerroelectricConstitutive,
    FerroelectricForcing,
    FerroelectricState,
    fe_step,
)
from .geometry import ContactChart, OneForm, d_residual, low_discrepancy_samples, potential_form
from .legendre import ConstitutiveSurface, GibbsConnection, connection_curvature, pullback_contact, surface_embed
from .processes import ProcessCurve, admissibility, entropy_action, spinodal_scan, thermo_metric
from .thermoelastic import (
    BASE_COORDS,
    ModelError,
    ThermoelasticConstitutive,
    ThermoelasticForcing,
    ThermoelasticState,
    step,
)
from .vdw import VDW_COORDS, vdw_potential

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CLOSED = 2
EXIT_DOMAIN = 3


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def _write_csv(path: str | None, header: list[str], rows: list[list[float]]) -> None:
    def emit(fh):
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    if path is None:
        emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _read_curve(path: str, coords: tuple[str, ...]) -> ProcessCurve:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[0] != "t":
                raise cfg.ConfigError(f"curve file {path}: first column must be 't'")
            cols = tuple(header[1:])
            missing = set(coords) - set(cols)
            if missing:
                raise cfg.ConfigError(f"curve file {path}: missing columns {sorted(missing)}")
            times, rows = [], []
            for line in reader:
                if not line:
                    continue
                times.append(float(line[0]))
                rows.append([float(v) for v in line[1:]])
    except OSError as exc:
        raise cfg.ConfigError(f"cannot read curve file: {exc}") from exc
    pts = np.array(rows)[:, [cols.index(name) for name in coords]]
    return ProcessCurve(coords, np.array(times), pts)


def _load_box(doc, coords: tuple[str, ...], path: str) -> dict[str, tuple[float, float]]:
    if not isinstance(doc, dict):
        raise cfg.ConfigError(f"{path}: expected a mapping of name -> [lo, hi]")
    cfg.check_keys(doc, set(coords), path)
    box = {}
    for name in coords:
        entry = cfg.need(doc, name, path)
        if not isinstance(entry, list) or len(entry) != 2:
            raise cfg.ConfigError(f"{path}.{name}: expected [lo, hi]")
        lo, hi = (cfg.as_number(v, f"{path}.{name}") for v in entry)
        if not lo < hi:
            raise cfg.ConfigError(f"{path}.{name}: need lo < hi")
        box[name] = (lo, hi)
    return box


def _load_form(doc: dict, coords: tuple[str, ...], path: str = "") -> OneForm:
    has_pot = "potential" in doc
    has_coeff = "coefficients" in doc
    if has_pot == has_coeff:
        raise cfg.ConfigError(f"{path or 'config'}: give exactly one of 'potential' or 'coefficients'")
    if has_pot:
        return potential_form(cfg.field_from(doc["potential"], coords, f"{path}potential"))
    entries = doc["coefficients"]
    if not isinstance(entries, dict):
        raise cfg.ConfigError(f"{path}coefficients: expected a mapping name -> expression")
    cfg.check_keys(entries, set(coords), f"{path}coefficients")
    coeffs = tuple(
        cfg.field_from(cfg.need(entries, name, f"{path}coefficients"), coords,
                       f"{path}coefficients.{name}")
        for name in coords
    )
    return OneForm(coords, coeffs)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check_closed(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"coords", "potential", "coefficients", "box", "count", "tol"}, "config")
    coords = cfg.as_name_list(cfg.need(doc, "coords", "config"), "config.coords")
    form = _load_form(doc, coords)
    box = _load_box(cfg.need(doc, "box", "config"), coords, "config.box")
    count = int(cfg.as_number(doc.get("count", 64), "config.count"))
    tol = args.tol if args.tol is not None else cfg.as_number(doc.get("tol", 1e-8), "config.tol")

    samples = low_discrepancy_samples(box, count, seed=args.seed)
    worst, worst_pair = 0.0, (coords[0], coords[0])
    for x in samples:
        res = np.abs(d_residual(form, x))
        i, j = np.unravel_index(int(res.argmax()), res.shape)
        if res[i, j] > worst:
            worst = float(res[i, j])
            worst_pair = (coords[i], coords[j])
    closed = worst <= tol
    _print_json({
        "closed": closed,
        "max_residual": worst,
        "worst_pair": list(worst_pair),
        "tol": tol,
        "samples": count,
    })
    return EXIT_OK if closed else EXIT_NOT_CLOSED


def _init_vector(doc, key: str, size: int, path: str) -> np.ndarray:
    value = doc.get(key)
    if value is None:
        return np.zeros(size)
    flat = np.asarray(value, dtype=float).ravel()
    if flat.size != size:
        raise cfg.ConfigError(f"{path}.{key}: expected {size} numbers")
    return flat


def _simulate_thermoelastic(doc, args) -> int:
    cfg.check_keys(doc, {"model", "potential", "rho", "k", "initial", "forcing",
                         "integration", "surface", "output"}, "config")
    u = cfg.field_from(cfg.need(doc, "potential", "config"), BASE_COORDS, "config.potential")
    constitutive = ThermoelasticConstitutive(
        potential=u,
        rho=cfg.as_number(doc.get("rho", 1.0), "config.rho"),
        k=cfg.as_number(doc.get("k", 1.0), "config.k"),
    )
    init = cfg.need(doc, "initial", "config")
    cfg.check_keys(init, {"eps", "F", "H"}, "config.initial")
    state = ThermoelasticState(
        eps=cfg.as_number(cfg.need(init, "eps", "config.initial"), "config.initial.eps"),
        F=_init_vector(init, "F", 9, "config.initial") if "F" in init else np.eye(3).ravel(),
        H=_init_vector(init, "H", 3, "config.initial"),
    )
    forcing_doc = doc.get("forcing") or {}
    cfg.check_keys(forcing_doc, {"L", "divq"}, "config.forcing")
    forcing = ThermoelasticForcing(
        L=cfg.time_fn_matrix(forcing_doc.get("L"), "config.forcing.L"),
        divq=cfg.time_fn_scalar(forcing_doc.get("divq"), "config.forcing.divq"),
    )
    t0, t1, dt = _load_integration(cfg.need(doc, "integration", "config"))

    sigma = None
    if "surface" in doc:
        sdoc = doc["surface"]
        cfg.check_keys(sdoc, {"sigma"}, "config.surface")
        sigma = cfg.field_from(cfg.need(sdoc, "sigma", "config.surface"), BASE_COORDS,
                               "config.surface.sigma")

    header = ["t", "eps", *BASE_COORDS[1:10], "H1", "H2", "H3", "theta", "U"]
    if sigma is not None:
        header += ["sigma_prod", "s"]

    def row(t: float, x: ThermoelasticState) -> list[float]:
        b = x.binding()
        u_eps = float(u.grad(b)[0])
        out = [t, x.eps, *x.F.ravel(), *x.H, 1.0 / u_eps, u.value(b)]
        if sigma is not None:
            sv = sigma.value(b)
            out += [sv, out[-1] + sv]
        return out

    return _run_trace(args, header, row, state, t0, t1, dt,
                      lambda x, t: step(x, constitutive, forcing, t, dt))


def _simulate_ferroelectric(doc, args) -> int:
    cfg.check_keys(doc, {"model", "potential", "rho", "k", "inertia", "initial",
                         "forcing", "integration", "output"}, "config")
    u = cfg.field_from(cfg.need(doc, "potential", "config"), FE_COORDS, "config.potential")
    constitutive = FerroelectricConstitutive(
        potential=u,
        rho=cfg.as_number(doc.get("rho", 1.0), "config.rho"),
        k=cfg.as_number(doc.get("k", 1.0), "config.k"),
        inertia=cfg.as_number(doc.get("inertia", 1.0), "config.inertia"),
    )
    init = cfg.need(doc, "initial", "config")
    cfg.check_keys(init, {"eps", "F", "H", "pi", "grad_pi", "u", "grad_u"}, "config.initial")
    state = FerroelectricState(
        eps=cfg.as_number(cfg.need(init, "eps", "config.initial"), "config.initial.eps"),
        F=_init_vector(init, "F", 9, "config.initial") if "F" in init else np.eye(3).ravel(),
        H=_init_vector(init, "H", 3, "config.initial"),
        pi=_init_vector(init, "pi", 3, "config.initial"),
        grad_pi=_init_vector(init, "grad_pi", 9, "config.initial"),
        u=_init_vector(init, "u", 3, "config.initial"),
        grad_u=_init_vector(init, "grad_u", 9, "config.initial"),
    )
    fdoc = doc.get("forcing") or {}
    cfg.check_keys(fdoc, {"E", "L", "divq", "poynting", "div_e_tensor",
                          "div_J_grad_u", "source_grad_u"}, "config.forcing")
    forcing = FerroelectricForcing(
        E_ext=cfg.time_fn_vector(fdoc.get("E"), "config.forcing.E"),
        L=cfg.time_fn_matrix(fdoc.get("L"), "config.forcing.L"),
        divq=cfg.time_fn_scalar(fdoc.get("divq"), "config.forcing.divq"),
        poynting_term=cfg.time_fn_scalar(fdoc.get("poynting"), "config.forcing.poynting"),
        div_e_tensor=cfg.time_fn_vector(fdoc.get("div_e_tensor"), "config.forcing.div_e_tensor"),
        div_J_grad_u=cfg.time_fn_matrix(fdoc.get("div_J_grad_u"), "config.forcing.div_J_grad_u"),
        source_grad_u=cfg.time_fn_matrix(fdoc.get("source_grad_u"), "config.forcing.source_grad_u"),
    )
    t0, t1, dt = _load_integration(cfg.need(doc, "integration", "config"))

    header = (["t", "eps", *FE_COORDS[1:10], "H1", "H2", "H3",
               "pi1", "pi2", "pi3", *FE_COORDS[13:22], "u1", "u2", "u3",
               "gu11", "gu12", "gu13", "gu21", "gu22", "gu23", "gu31", "gu32", "gu33",
               "theta", "U"])

    def row(t: float, x: FerroelectricState) -> list[float]:
        b = x.binding()
        u_eps = float(u.grad(b)[0])
        return [t, x.eps, *x.F.ravel(), *x.H, *x.pi, *x.grad_pi.ravel(),
                *x.u, *x.grad_u.ravel(), 1.0 / u_eps, u.value(b)]

    return _run_trace(args, header, row, state, t0, t1, dt,
                      lambda x, t: fe_step(x, constitutive, forcing, t, dt))


def _load_integration(doc) -> tuple[float, float, float]:
    cfg.check_keys(doc, {"t0", "t1", "dt"}, "config.integration")
    t0 = cfg.as_number(doc.get("t0", 0.0), "config.integration.t0")
    t1 = cfg.as_number(cfg.need(doc, "t1", "config.integration"), "config.integration.t1")
    dt = cfg.as_number(cfg.need(doc, "dt", "config.integration"), "config.integration.dt")
    if dt <= 0 or t1 <= t0:
        raise cfg.ConfigError("config.integration: need dt > 0 and t1 > t0")
    return t0, t1, dt


def _run_trace(args, header, row, state, t0, t1, dt, advance) -> int:
    n_steps = int(round((t1 - t0) / dt))
    rows = [row(t0, state)]
    code = EXIT_OK
    for i in range(n_steps):
        t = t0 + i * dt
        try:
            state = advance(state, t)
        except (ModelError, DomainError) as exc:
            print(f"domain exit at t={t}: {exc}", file=sys.stderr)
            code = EXIT_DOMAIN
            break
        rows.append(row(t0 + (i + 1) * dt, state))
    _write_csv(args.out, header, rows)
    return code


def cmd_simulate(args) -> int:
    doc = cfg.load_yaml(args.config)
    model = cfg.need(doc, "model", "config")
    if model == "thermoelastic":
        return _simulate_thermoelastic(doc, args)
    if model == "ferroelectric":
        return _simulate_ferroelectric(doc, args)
    raise cfg.ConfigError(f"config.model: unknown model {model!r}")


def _surface_from(doc, path: str = "config") -> ConstitutiveSurface:
    coords = cfg.as_name_list(cfg.need(doc, "coords", path), f"{path}.coords")
    u = cfg.field_from(cfg.need(doc, "potential", path), coords, f"{path}.potential")
    sigma = cfg.field_from(doc.get("sigma", "0"), coords, f"{path}.sigma")
    chart = ContactChart(n=len(coords), q_names=coords,
                         p_names=tuple("p_" + c for c in coords))
    return ConstitutiveSurface(chart, u, sigma)


def cmd_surface(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"coords", "potential", "sigma", "grid", "output"}, "config")
    surface = _surface_from(doc)
    coords = surface.chart.q_names
    grid_doc = cfg.need(doc, "grid", "config")
    cfg.check_keys(grid_doc, set(coords), "config.grid")
    axes = []
    for name in coords:
        entry = cfg.need(grid_doc, name, "config.grid")
        if not isinstance(entry, list) or len(entry) != 3:
            raise cfg.ConfigError(f"config.grid.{name}: expected [start, stop, count]")
        start, stop = cfg.as_number(entry[0], "grid"), cfg.as_number(entry[1], "grid")
        count = int(cfg.as_number(entry[2], "grid"))
        axes.append(np.linspace(start, stop, count))

    header = [*coords, "s", *(f"p_{c}" for c in coords), *(f"res_{c}" for c in coords)]
    rows = []
    for values in itertools.product(*axes):
        q = dict(zip(coords, map(float, values)))
        point = surface_embed(surface, q)
        res = pullback_contact(surface, q)
        rows.append([*values, point[surface.chart.s_name],
                     *(point[p] for p in surface.chart.p_names), *res])
    _write_csv(args.out or doc.get("output"), header, rows)
    return EXIT_OK


def cmd_admissible(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"coords", "potential", "sigma", "curve", "tol"}, "config")
    surface = _surface_from(doc)
    curve = _read_curve(cfg.need(doc, "curve", "config"), surface.chart.q_names)
    tol = args.tol if args.tol is not None else cfg.as_number(doc.get("tol", 1e-9), "config.tol")
    report = admissibility(surface, curve, tol=tol)
    _print_json({
        "admissible": report.admissible,
        "violating_intervals": list(report.violating_intervals),
        "rates": [float(r) for r in report.rates],
        "delta_sigma": report.delta_sigma,
        "delta_U": report.delta_U,
        "delta_s": report.delta_s,
        "tol": tol,
    })
    if args.out:
        _write_csv(args.out, ["sample", "rate"],
                   [[float(i + 1), float(r)] for i, r in enumerate(report.rates)])
    return EXIT_OK


def cmd_metric(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"coords", "potential", "point"}, "config")
    coords = cfg.as_name_list(cfg.need(doc, "coords", "config"), "config.coords")
    u = cfg.field_from(cfg.need(doc, "potential", "config"), coords, "config.potential")
    point = _load_point(cfg.need(doc, "point", "config"), coords, "config.point")
    metric = thermo_metric(u, point)
    _print_json({
        "metric": [[float(v) for v in row] for row in metric],
        "det": float(np.linalg.det(metric)),
    })
    return EXIT_OK


def _load_point(doc, coords: tuple[str, ...], path: str) -> dict[str, float]:
    if not isinstance(doc, dict):
        raise cfg.ConfigError(f"{path}: expected a mapping name -> value")
    cfg.check_keys(doc, set(coords), path)
    return {name: cfg.as_number(cfg.need(doc, name, path), f"{path}.{name}") for name in coords}


def cmd_action(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"coords", "potential", "coefficients", "curve"}, "config")
    coords = cfg.as_name_list(cfg.need(doc, "coords", "config"), "config.coords")
    form = _load_form(doc, coords)
    curve = _read_curve(cfg.need(doc, "curve", "config"), coords)
    _print_json({"action": entropy_action(curve, form)})
    return EXIT_OK


def cmd_curvature(args) -> int:
    doc = cfg.load_yaml(args.config)
    cfg.check_keys(doc, {"s", "coords", "coefficients", "point"}, "config")
    s_name = doc.get("s", "s")
    q_names = cfg.as_name_list(cfg.need(doc, "coords", "config"), "config.coords")
    space = (s_name,) + q_names
    entries = cfg.need(doc, "coefficients", "config")
    cfg.check_keys(entries, set(q_names), "config.coefficients")
    fields = tuple(
        cfg.field_from(cfg.need(entries, name, "config.coefficients"), space,
                       f"config.coefficients.{name}")
        for name in q_names
    )
    connection = GibbsConnection(s_name, q_names, fields)
    point = _load_point(cfg.need(doc, "point", "config"), space, "config.point")
    omega = connection_curvature(connection, point)
    _print_json({"curvature": [[float(v) for v in row] for row in omega]})
    return EXIT_OK


def cmd_vdw(args) -> int:
    u = vdw_potential(a=args.a, b=args.b, R=args.r, c_V=args.cv)
    s_axis = np.linspace(args.smin, args.smax, args.sn)
    v_axis = np.linspace(args.vmin, args.vmax, args.vn)
    rows = []
    for s_val in s_axis:
        for v_val in v_axis:
            q = {"S": float(s_val), "V": float(v_val)}
            g = u.grad(q)
            rows.append([s_val, v_val, u.value(q), float(g[0]), -float(g[1])])
    _write_csv(args.out, ["S", "V", "U", "T", "p"], rows)
    roots = spinodal_scan(u, "V", args.vmin, args.vmax, {"S": 0.0}, xtol=1e-4)
    _print_json({
        "params": {"a": args.a, "b": args.b, "R": args.r, "c_V": args.cv},
        "spinodal_V_at_S0": roots,
    })
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, needs_config: bool = True) -> None:
    if needs_config:
        p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")
    p.add_argument("--seed", type=int, default=0, help="sample-point generation seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermoform")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in [("check-closed", cmd_check_closed), ("simulate", cmd_simulate),
                     ("surface", cmd_surface), ("admissible", cmd_admissible),
                     ("metric", cmd_metric), ("action", cmd_action),
                     ("curvature", cmd_curvature)]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("vdw", help="built-in van der Waals constitutive law")
    _add_common(p, needs_config=False)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.1)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--cv", type=float, default=1.5)
    p.add_argument("--smin", type=float, default=-0.5)
    p.add_argument("--smax", type=float, default=0.5)
    p.add_argument("--sn", type=int, default=5)
    p.add_argument("--vmin", type=float, default=0.15)
    p.add_argument("--vmax", type=float, default=3.0)
    p.add_argument("--vn", type=int, default=60)
    p.set_defaults(fn=cmd_vdw)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except cfg.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ModelError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
