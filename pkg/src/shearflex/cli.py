"""Command line driver: shearflex {construct,verify,sweep,classify,energy,evolve}.

Exit status 0 when every check passes, 1 when a check fails (or a
numerical routine gives up), 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, parse_grid
from .energy import (coarea_energy, dirichlet_energy, distribution_defect, level_rows,
                     rearranged_shear)
from .errors import (ConditionVError, ConfigurationError, GridMismatchError, PlateauViolation,
                     QuiescenceViolation, ShearflexError, WindowOverlap)
from .evolve import fit_speed, initial_state, orbit_experiment, run, track_core, truncate
from .grid import ScalarField, VectorField, advect_residual, gradient, perp_gradient
from .io import read_scalar, read_vector, write_csv, write_efk, write_table
from .shear import norm_decay_sweep
from .topology import (extract_level_curves, find_subdomain, laminar_check, recover_f,
                       shear_detect)
from .vortex import (FlowSpec, closeness, c2_distance, compose_flexible, shear_only, _tree)

CONFIG_ERRORS = (ConfigurationError, WindowOverlap, QuiescenceViolation, PlateauViolation,
                 ConditionVError, GridMismatchError)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name, value, threshold, passed, note=""):
        self.items.append({"name": name, "value": value, "threshold": threshold,
                           "status": "pass" if passed else "fail", "note": note})

    def skip(self, name, note):
        self.items.append({"name": name, "value": None, "threshold": None,
                           "status": "skipped", "note": note})

    def info(self, name, value, note=""):
        self.items.append({"name": name, "value": value, "threshold": None,
                           "status": "info", "note": note})

    @property
    def ok(self) -> bool:
        return all(c["status"] != "fail" for c in self.items)


# -- shared pieces ------------------------------------------------------------------------

def _fields(cfg: RunConfig):
    """(u, omega, psi, flow) from field files if configured, else from the flow spec."""
    p_psi, p_om, p_u = (cfg.field_path(k) for k in ("psi", "omega", "u"))
    if p_psi is not None or p_om is not None:
        if p_psi is None or p_om is None:
            raise ConfigurationError("fields needs both psi and omega")
        psi = read_scalar(p_psi)
        omega = read_scalar(p_om)
        if psi.grid != omega.grid:
            raise GridMismatchError(f"psi grid {psi.grid} differs from omega grid {omega.grid}")
        u = read_vector(p_u) if p_u is not None else perp_gradient(psi)
        return u, omega, psi, None
    flow = cfg.flow()
    u, omega, psi = compose_flexible(flow, cfg.grid())
    return u, omega, psi, flow


def _base_shear_velocity(flow: FlowSpec, grid):
    return [np.broadcast_to(flow.shear(grid.y), grid.shape), np.zeros(grid.shape)]


def _steadiness(u: VectorField, omega: ScalarField) -> tuple[float, float]:
    res = advect_residual(u, omega).max_abs()
    scale = u.max_abs() * gradient(omega).max_abs()
    return res, (res / scale if scale > 0 else 0.0)


def _seed_level(psi: ScalarField, seed) -> float:
    g = psi.grid
    i = int(round((seed[0] % (2 * np.pi)) / g.dx)) % g.nx
    j = int(np.argmin(np.abs(g.y - seed[1])))
    return float(psi.values[i, j])


def _write_fields(out: Path, fmt: str, grid, u, omega, psi) -> list:
    if fmt == "csv":
        return [str(write_csv(out / "fields.csv", grid,
                              {"u1": u.u1, "u2": u.u2, "omega": omega.values, "psi": psi.values}))]
    return [str(write_efk(out / "u.efk", [u.u1, u.u2])),
            str(write_efk(out / "omega.efk", [omega.values])),
            str(write_efk(out / "psi.efk", [psi.values]))]


# -- commands -----------------------------------------------------------------------------

def cmd_construct(cfg: RunConfig, out: Path, plots: bool):
    flow = cfg.flow()
    grid = cfg.grid()
    u, omega, psi = compose_flexible(flow, grid)
    files = _write_fields(out, cfg["output"]["format"], grid, u, omega, psi)
    checks = Checks()
    quiet = []
    for v in flow.vortices:
        w = flow.window_of(v)
        ys = np.linspace(v.center[1] - v.radius, v.center[1] + v.radius, 2001)
        quiet.append({"center": list(v.center), "eps": v.eps,
                      "ambient_max": float(np.max(np.abs(flow.ambient(ys, comoving=w))))})
    summary = {"grid": [grid.nx, grid.ny], "files": [Path(f).name for f in files],
               "vortex_nodes": sum(1 for r in flow.vortices for _ in _tree(r)),
               "max_speed": u.max_abs(), "quiescence": quiet}
    if flow.windows:
        alpha = cfg["alpha"]
        dist = closeness(flow, alpha)
        summary["closeness"] = dist
        checks.info(f"C^{{{flow.shear.n - 1},{alpha:g}}} distance to base shear", dist["total"])
    if flow.shear.n >= 1 and flow.shear.name != "rest":
        c2 = c2_distance(u, _base_shear_velocity(flow, grid))
        summary["c2_distance"] = c2
        checks.info("C2 distance to base shear", c2["total"])
    for q in quiet:
        checks.add(f"quiescence at {q['center']}", q["ambient_max"], 1e-14, q["ambient_max"] <= 1e-14)
    if plots:
        from . import plotting
        plotting.heatmap(out / "omega.png", grid, omega.values, "vorticity")
        plotting.heatmap(out / "psi.png", grid, psi.values, "stream function")
    return summary, checks


def cmd_verify(cfg: RunConfig, out: Path, plots: bool):
    u, omega, psi, flow = _fields(cfg)
    tol = cfg["tolerances"]
    checks = Checks()
    res, rel = _steadiness(u, omega)
    checks.add("steadiness max|u.grad w| / (max|u| max|grad w|)", rel, tol["steady_rel"],
               rel <= tol["steady_rel"])
    lam = laminar_check(psi, cfg["levels"]["laminar"])
    is_shear, dev = shear_detect(u, tol["shear"])
    checks.info("laminar_check", lam.laminar, f"{lam.n_levels} levels, {len(lam.contractible_levels)} contractible")
    checks.info("shear_detect", is_shear, f"deviation {dev:.3e}")
    steady = rel <= tol["steady_rel"]
    checks.add("rigidity consistency (steady and laminar => shear)", bool(is_shear or not lam.laminar or not steady),
               True, is_shear or not lam.laminar or not steady)
    c0 = _seed_level(psi, cfg["seed"])
    try:
        band = find_subdomain(psi, c0, cfg["levels"]["subdomain"], near=tuple(cfg["seed"]))
        rep = recover_f(psi, omega, band, cfg["levels"]["bins"])
        where = f"band ({band.c_minus:.6g}, {band.c_plus:.6g})"
        if lam.laminar:
            checks.add("recover_f max_spread", rep.max_spread, tol["spread"],
                       rep.max_spread <= tol["spread"], where)
        else:
            # sub-domains are only certified for laminar fields
            checks.info("recover_f max_spread", rep.max_spread, where + ", field not laminar")
    except ShearflexError as exc:
        if lam.laminar:
            checks.add("recover_f max_spread", None, tol["spread"], False, str(exc))
        else:
            checks.info("recover_f max_spread", None, str(exc))
    if flow is not None and flow.shear.name == "y^2" and not is_shear:
        c2 = c2_distance(u, _base_shear_velocity(flow, u.grid))["total"]
        checks.add("C2 distance to (y^2, 0) for a non-shear steady flow", c2, 2.0, c2 >= 2.0)
    else:
        checks.skip("C2 threshold", "applies to non-shear constructions over y^2 only")
    if lam.laminar:
        _energy_checks(psi, cfg, checks)
    else:
        checks.skip("energy chain", "field is not laminar")
    summary = {"grid": [u.grid.nx, u.grid.ny], "steady_residual": res, "laminar": lam.laminar,
               "shear": is_shear, "shear_deviation": dev}
    if plots:
        from . import plotting
        plotting.heatmap(out / "psi.png", psi.grid, psi.values, "stream function")
    return summary, checks


def _energy_checks(psi: ScalarField, cfg: RunConfig, checks: Checks):
    tol = cfg["tolerances"]["energy_rel"]
    rep = coarea_energy(psi, cfg["levels"]["energy"])
    star = rearranged_shear(psi, check=False)
    e_star = dirichlet_energy(star)
    rel = abs(rep.E_direct - rep.E_coarea) / max(rep.E_direct, 1e-300)
    checks.add("coarea consistency |E - E_coarea| / E", rel, tol, rel <= tol)
    checks.add("E_direct >= lower_bound", rep.E_direct - rep.lower_bound, -tol * rep.E_direct,
               rep.E_direct >= rep.lower_bound * (1 - tol))
    checks.add("lower_bound >= E(rearranged)", rep.lower_bound - e_star, -tol * rep.E_direct,
               rep.lower_bound >= e_star * (1 - tol))
    worst = min((r.relative_slack for r in rep.rows if r.regular), default=0.0)
    checks.add("Cauchy-Schwarz slack >= 0", worst, -1e-9, worst >= -1e-9)
    return rep, star, e_star


def cmd_sweep(cfg: RunConfig, out: Path, plots: bool):
    shear = cfg.shear()
    sw = cfg["sweep"]
    table = norm_decay_sweep(shear, cfg["alpha"], cfg.sweep_eps(), sw["y0"], sw["samples"])
    n = shear.n
    header = ["eps"] + [f"sup_d{k}" for k in range(n)] + ["seminorm", "total"]
    write_table(out / "slopes.csv", header, table.as_rows())
    checks = Checks()
    tol = cfg["tolerances"]["slope"]
    for k, s in enumerate(table.sup_slopes):
        checks.add(f"slope of sup|d^{k}(v - v_eps)|", s, tol, abs(s - (n - k)) <= tol,
                   f"expected {n - k}")
    rate = 1 - cfg["alpha"]
    checks.add("slope of the Hölder seminorm", table.seminorm_slope, tol,
               abs(table.seminorm_slope - rate) <= tol, f"expected {rate:g}")
    summary = {"eps": table.eps, "sup_slopes": table.sup_slopes,
               "seminorm_slope": table.seminorm_slope, "totals": table.totals}
    if plots:
        from . import plotting
        series = {f"sup d^{k}": [s[k] for s in table.sup_norms] for k in range(n)}
        series["seminorm"] = table.seminorms
        plotting.slopes(out / "slopes.png", table.eps, series, f"v - v_eps for {shear.name}")
    return summary, checks


def cmd_classify(cfg: RunConfig, out: Path, plots: bool):
    _, _, psi, _ = _fields(cfg)
    lo, hi = float(psi.values.min()), float(psi.values.max())
    levels = list(cfg["levels"]["classify"]) or list(lo + (np.arange(16) + 0.5) * (hi - lo) / 16)
    rows, curves = [], []
    for c in levels:
        for i, cv in enumerate(extract_level_curves(psi, c)):
            curves.append(cv)
            rows.append([c, i, cv.winding, cv.classification, cv.length, cv.grad_min, cv.grad_max])
    write_table(out / "curves.csv", ["level", "component", "winding", "classification",
                                     "length", "grad_min", "grad_max"], rows)
    lam = laminar_check(psi, cfg["levels"]["laminar"])
    checks = Checks()
    checks.info("laminar_check", lam.laminar, f"{len(lam.contractible_levels)} contractible levels")
    counts = {}
    for r in rows:
        counts[r[3]] = counts.get(r[3], 0) + 1
    summary = {"levels": levels, "components": len(rows), "classification_counts": counts,
               "laminar": lam.laminar}
    if plots:
        from . import plotting
        plotting.curves(out / "curves.png", psi.grid, psi.values, curves)
    return summary, checks


def cmd_energy(cfg: RunConfig, out: Path, plots: bool):
    _, _, psi, _ = _fields(cfg)
    checks = Checks()
    lam = laminar_check(psi, cfg["levels"]["laminar"])
    if not lam.laminar:
        raise ConfigurationError("energy chain needs a laminar stream function")
    rep, star, e_star = _energy_checks(psi, cfg, checks)
    defect = distribution_defect(psi, star)
    checks.add("equimeasurability defect (grid cells)", defect, 2.0, defect <= 2.0)
    write_table(out / "levels.csv", ["c", "length", "flux", "mu", "slack"],
                [[r.c, r.length, r.flux, r.mu, r.slack] for r in rep.rows])
    summary = {"E_direct": rep.E_direct, "E_coarea": rep.E_coarea, "lower_bound": rep.lower_bound,
               "E_rearranged": e_star, "excluded_measure": rep.excluded_measure}
    if plots:
        from . import plotting
        plotting.energy_levels(out / "levels.png", rep.rows)
        plotting.heatmap(out / "rearranged.png", psi.grid, star.values, "rearranged stream function")
    return summary, checks


def cmd_evolve(cfg: RunConfig, out: Path, plots: bool):
    flow = cfg.flow()
    g = cfg.grid()
    ev = cfg["evolution"]
    mode = ev["track"]
    if mode == "orbit":
        return _evolve_orbit(cfg, flow, g, out, plots)
    u, omega, psi = compose_flexible(flow, g)
    st = initial_state(omega, (psi.values[0, 0], psi.values[0, -1]), ev.get("dt"), ev["cfl"])
    res = run(st, ev["t_end"], ev["every"], ev["cfl"])
    drift = res.drift()
    circ0 = res.circulation[0]
    circ_drift = abs(res.circulation[-1] - circ0) / max(abs(circ0), res.enstrophy[0])
    write_table(out / "series.csv", ["t", "circulation", "l2"],
                list(zip(res.times, res.circulation, res.enstrophy)))
    checks = Checks()
    checks.info("relative vorticity drift", drift)
    checks.info("circulation drift", circ_drift)
    summary = {"t_end": ev["t_end"], "steps_dt": st.dt, "drift": drift, "circulation_drift": circ_drift}
    if mode == "none":
        checks.add("vorticity drift", drift, 1e-3, drift <= 1e-3)
    else:
        if not flow.vortices:
            raise ConfigurationError("speed tracking needs a vortex")
        root = flow.vortices[0]
        _, bg, _ = compose_flexible(shear_only(flow), g)
        tr = track_core(res.times, res.frames, g, truncate(bg.values, g), root.center,
                        0.75 * root.radius)
        write_table(out / "trajectory.csv", ["t", "x", "y"], list(zip(tr.times, tr.x, tr.y)))
        w = flow.window_of(root)
        expected = flow.wave_speed(w) if w is not None else 0.0
        got = fit_speed(tr)
        err = abs(got - expected) / abs(expected) if expected else abs(got)
        checks.add("core speed relative error", err, 0.02, err <= 0.02)
        summary.update(speed=got, expected_speed=expected)
        if plots:
            from . import plotting
            plotting.series(out / "trajectory.png", tr.times, {"x": tr.x, "y": tr.y}, "core centroid")
    if plots:
        from . import plotting
        plotting.series(out / "series.png", res.times,
                        {"circulation": res.circulation, "l2": res.enstrophy}, "invariants")
        plotting.heatmap(out / "omega_final.png", g, res.final.omega.values, f"vorticity at t={res.times[-1]:g}")
    return summary, checks


def _evolve_orbit(cfg: RunConfig, flow: FlowSpec, g, out: Path, plots: bool):
    ev = cfg["evolution"]
    if not flow.vortices or not flow.vortices[0].children:
        raise ConfigurationError("orbit tracking needs a child vortex on the first vortex")
    root = flow.vortices[0]
    bare = type(root)(root.center, root.eps, root.amplitude, root.n, root.profile)
    control = FlowSpec(flow.shear, flow.windows, (bare,) + flow.vortices[1:])
    rep = orbit_experiment(flow, control, g, ev["t_end"], ev["every"], ev["cfl"])
    tr = rep.track
    write_table(out / "trajectory.csv", ["t", "x", "y"], list(zip(tr.times, tr.x, tr.y)))
    err = abs(rep.frequency - rep.expected) / rep.expected
    checks = Checks()
    checks.add("orbit frequency relative error", err, 0.05, bool(err <= 0.05))
    checks.add("orbits tracked", rep.orbits, 3.0, rep.orbits >= 3.0, rep.stopped or "")
    summary = {"t_end": ev["t_end"], "frequency": rep.frequency, "expected_frequency": rep.expected,
               "orbits": rep.orbits, "t_tracked": rep.t_tracked, "stopped": rep.stopped}
    if plots:
        from . import plotting
        plotting.series(out / "trajectory.png", tr.times, {"x": tr.x, "y": tr.y}, "child centroid")
    return summary, checks


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "sweep": cmd_sweep,
            "classify": cmd_classify, "energy": cmd_energy, "evolve": cmd_evolve}


def _render(command: str, summary: dict, checks: Checks) -> str:
    lines = [f"shearflex {command}"]
    for k in sorted(summary):
        lines.append(f"  {k}: {summary[k]}")
    for c in checks.items:
        v = c["value"]
        vs = f"{v:.6g}" if isinstance(v, float) else str(v)
        thr = "" if c["threshold"] is None else f" (threshold {c['threshold']})"
        note = f" [{c['note']}]" if c["note"] else ""
        lines.append(f"  {c['status'].upper():7s} {c['name']}: {vs}{thr}{note}")
    lines.append("result: " + ("PASS" if checks.ok else "FAIL"))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shearflex", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON run configuration")
        s.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        s.add_argument("--grid", help="grid size NXxNY (overrides grid)")
        s.add_argument("--format", choices=["bin", "csv"], help="field file format")
        s.add_argument("--plots", choices=["on", "off"], help="write PNG figures")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig({})
        over = {}
        if args.grid:
            nx, ny = parse_grid(args.grid)
            over["grid"] = {"nx": nx, "ny": ny}
        if args.format:
            over.setdefault("output", {})["format"] = args.format
        if args.plots:
            over.setdefault("output", {})["plots"] = args.plots == "on"
        if over:
            merged = dict(cfg.data)
            for k, v in over.items():
                merged[k] = {**merged.get(k, {}), **v}
            cfg = RunConfig(merged, cfg.base_dir)
        out = args.out or Path(cfg["output"]["dir"])
        out.mkdir(parents=True, exist_ok=True)
        started = time.time()
        summary, checks = COMMANDS[args.command](cfg, out, cfg["output"]["plots"])
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ShearflexError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    body = {"command": args.command, "config": cfg.data, "summary": summary,
            "checks": checks.items, "passed": checks.ok}
    (out / "report.json").write_text(json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n")
    text = _render(args.command, _jsonable(summary), checks)
    (out / "report.txt").write_text(text)
    meta = {"version": __version__, "started": started, "finished": time.time(),
            "argv": list(sys.argv if argv is None else argv)}
    (out / "metadata.json").write_text(json.dumps(_jsonable(meta), sort_keys=True, indent=2) + "\n")
    sys.stdout.write(text)
    return 0 if checks.ok else 1
