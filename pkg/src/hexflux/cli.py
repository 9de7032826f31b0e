"""Command-line front end: each subcommand writes CSV tables plus a JSON manifest.

Settings are resolved as command defaults < ``--config`` JSON < explicit flags.
All files of a run are staged in a temporary directory and moved into
``--out`` only after the run succeeded, so failed runs leave nothing behind.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigError, HexfluxError, InvalidFluxError
from .graph import (ATOL, RTOL, Discriminant, EdgePotential, IdentityDiscriminant, default_window,
                    hb_spectrum)
from .intervals import MERGE_TOL
from .lattice import TWO_PI, band_edges, band_structure, dirac_check, positive_sheets, reduce_flux

COMMANDS = ("bands", "butterfly", "dos", "landau", "magnetization", "hall", "fractal", "disorder", "graph")

_COMMON = {"p": 0, "q": 1, "qmax": None, "potential": "tb", "grid": 24, "sigma": None, "mu": None,
           "beta": "inf", "kappa": None, "seed": 0, "out": None, "figure": False, "window": None}

DEFAULTS = {
    "bands": {"p": 1, "q": 3},
    "butterfly": {"qmax": 30, "grid": 12},
    "dos": {"grid": 256, "sigma": 0.01, "mu_min": None, "mu_max": None, "nmu": 1051},
    "landau": {"p": 1, "q": 55, "potential": "zero", "nlev": 5},
    "magnetization": {"potential": "zero", "method": "sawtooth", "hmin": TWO_PI / 89, "hmax": TWO_PI / 13,
                      "nh": 200, "dh": 1e-6},
    "hall": {"qmax": 20, "grid": 12},
    "fractal": {"qs": "1,5,13,34,89", "qmax": 144},
    "disorder": {"p": 1, "q": 3, "L": 36, "kappa": 0.05, "nseeds": 8, "distribution": "uniform"},
    "graph": {"potential": "zero"},
}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def to_dict(self) -> dict:
        return {"command": self.command, **dict(sorted(self.values.items()))}

    @classmethod
    def resolve(cls, command: str, file_values: dict | None = None, flag_values: dict | None = None):
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        values = {**_COMMON, **DEFAULTS[command]}
        for source in (file_values or {}, flag_values or {}):
            for k, v in source.items():
                if k == "command":
                    if v != command:
                        raise ConfigError(f"config is for command {v!r}, not {command!r}")
                    continue
                if k not in values:
                    raise ConfigError(f"unknown setting {k!r} for {command}")
                if v is not None:
                    values[k] = v
        if values["out"] is None:
            values["out"] = f"out/{command}"
        return cls(command, values)


# -- helpers -----------------------------------------------------------------

def _beta(cfg) -> float:
    try:
        b = float(cfg.beta)
    except (TypeError, ValueError):
        raise ConfigError(f"beta must be a number or 'inf', got {cfg.beta!r}") from None
    if not b > 0:
        raise ConfigError("beta must be positive")
    return b


def _flux(cfg):
    try:
        return reduce_flux(int(cfg.p), int(cfg.q))
    except InvalidFluxError as err:
        raise ConfigError(str(err)) from err


def _discriminant(cfg):
    if cfg.potential in (None, "tb"):
        return IdentityDiscriminant(), None
    pot = EdgePotential.from_spec(cfg.potential)
    return Discriminant(pot), pot


def _window(cfg, pot):
    if cfg.window is None:
        return default_window(pot)
    try:
        lo, hi = (float(x) for x in str(cfg.window).split(","))
    except ValueError:
        raise ConfigError(f"window must be 'lo,hi', got {cfg.window!r}") from None
    if not hi > lo:
        raise ConfigError("window needs lo < hi")
    return lo, hi


class Outputs:
    """Collects tables, JSON blobs and figures for one run."""

    def __init__(self, stage: Path, figures: bool):
        self.stage = stage
        self.figures = figures
        self.files: list[str] = []
        self.extra: dict = {}

    def table(self, name: str, table: io.SweepTable):
        io.write_csv(self.stage / name, table)
        self.files.append(name)

    def json(self, name: str, obj):
        io.write_json(self.stage / name, obj)
        self.files.append(name)

    def figure(self, name: str, render):
        if self.figures:
            render(self.stage / name)
            self.files.append(name)


# -- commands ----------------------------------------------------------------

def cmd_bands(cfg, out: Outputs) -> dict:
    flux = _flux(cfg)
    n = int(cfg.grid)
    edges, warns = band_edges(flux, n)
    t = io.SweepTable(["kind", "band", "lo", "hi", "p", "q"])
    for j, (lo, hi) in enumerate(edges):
        t.append(("tb", j, lo, hi, flux.p, flux.q))
    d, pot = _discriminant(cfg)
    if pot is not None:
        window = _window(cfg, pot)
        hb = hb_spectrum(pot, flux, window, n)
        for j, pre in enumerate(hb.band_preimages):
            for lo, hi in pre:
                t.append(("graph", j, lo, hi, flux.p, flux.q))
        for i, x in enumerate(hb.dirichlet):
            t.append(("dirichlet", i, x, x, flux.p, flux.q))
        warns = warns + hb.warnings
    out.table("bands.csv", t)
    rep = dirac_check(flux)
    k1 = rep.k_star[0] + np.linspace(-math.pi, math.pi, 201) / flux.q
    sv = positive_sheets(flux, k1, np.full_like(k1, rep.k_star[1]))
    energies = np.concatenate([-sv[:, ::-1], sv], axis=1)
    disp = io.SweepTable(["t", "band", "energy"])
    for i, tv in enumerate(k1 - rep.k_star[0]):
        for j, e in enumerate(energies[i]):
            disp.append((tv, j, e))
    out.table("dispersion.csv", disp)
    out.json("dirac.json", dataclasses.asdict(rep))

    def render(path):
        from .plotting import plot_dispersion
        plot_dispersion(k1 - rep.k_star[0], energies, path, f"flux {flux}: cut through the Dirac point")
    out.figure("dispersion.png", render)
    return {"refine_tol": 1e-9, "merge_tol": MERGE_TOL, "dirac_tol": 1e-8, "ode_rtol": RTOL,
            "ode_atol": ATOL, "warnings": warns}


def cmd_butterfly(cfg, out: Outputs) -> dict:
    from .fractal import butterfly
    from .hall import STRICT_GAP, hall_map
    qmax, n = int(cfg.qmax), int(cfg.grid)
    bt = butterfly(qmax, n)
    out.table("butterfly.csv", bt)
    tol = {"refine_tol": 1e-9, "merge_tol": MERGE_TOL, "strict_gap": STRICT_GAP}
    if qmax <= 60:
        hm = hall_map(qmax, n=n)
        out.table("hall.csv", hm)

        def render_hall(path):
            from .plotting import plot_gap_labels
            rows = [(p / q, lo, hi, g) for p, q, lo, hi, _, _, g, _ in hm.rows]
            plot_gap_labels(rows, path)
        out.figure("hall.png", render_hall)
    else:
        tol["note"] = "hall map skipped: qmax > 60"

    def render(path):
        from .plotting import plot_intervals
        plot_intervals([(p / q, lo, hi) for p, q, lo, hi in bt.rows], path, title="spectrum vs flux")
    out.figure("butterfly.png", render)
    return tol


def cmd_dos(cfg, out: Outputs) -> dict:
    from .dos import dos_smoothed
    from .magnetics import EtaWindow
    from .semiclassics import landau_levels
    flux = _flux(cfg)
    sigma = float(cfg.sigma)
    d, pot = _discriminant(cfg)
    eta = EtaWindow.build(d)
    if pot is None:
        lo, hi = -1.05, 1.05
    else:
        lo, hi = eta.x_lo, eta.x_hi
    lo = lo if cfg.mu_min is None else float(cfg.mu_min)
    hi = hi if cfg.mu_max is None else float(cfg.mu_max)
    mu = np.linspace(lo, hi, int(cfg.nmu))
    b = band_structure(flux, int(cfg.grid))
    transform = None
    if pot is not None:
        def pullback(e):
            mask = np.abs(e) < eta.delta
            x = np.zeros_like(e)
            x[mask] = eta.inverse(e[mask])
            return x, mask
        transform = pullback
    profiles = [dos_smoothed(b, mu, sigma, transform)]
    if not flux.is_zero:
        ladder = landau_levels(d, flux.h, int(1 + math.pi / flux.h), z_dirac=eta.z_dirac,
                               inverse=eta.inverse)
        profiles.append(dos_smoothed(ladder, mu, sigma))
    t = io.SweepTable(["mu", "rho", "source", "sigma", "p", "q"])
    for prof in profiles:
        for r in prof.rows():
            t.append((r["mu"], r["rho"], r["source"], sigma, flux.p, flux.q))
    out.table("dos.csv", t)

    def render(path):
        from .plotting import plot_curves
        plot_curves(mu, {p.source: p.rho for p in profiles}, path, "mu", "rho", f"DOS, flux {flux}")
    out.figure("dos.png", render)
    return {"sigma": sigma, "eta_delta": eta.delta, "warnings": sum((p.warnings for p in profiles), [])}


def cmd_landau(cfg, out: Outputs) -> dict:
    from .semiclassics import landau_levels, perfect_cone_levels
    flux = _flux(cfg)
    if flux.is_zero:
        raise ConfigError("landau needs nonzero flux")
    d, pot = _discriminant(cfg)
    nlev = int(cfg.nlev)
    ladders = [landau_levels(d, flux.h, nlev), perfect_cone_levels(d, flux.h, nlev)]
    t = io.SweepTable(["n", "energy", "kind", "h"])
    for lad in ladders:
        for k in lad.indices:
            t.append((k, lad[k], lad.kind, flux.h))
    if pot is None and flux.p == 1:
        edges, _ = band_edges(flux, int(cfg.grid))
        pos = edges[flux.q:]
        t.append((0, 0.5 * (pos[0, 0] + pos[0, 1]), "band-centre", flux.h))
        for k in range(1, nlev + 1):
            if 2 * k < flux.q:
                c = 0.25 * (pos[2 * k - 1].sum() + pos[2 * k].sum())
                t.append((k, c, "band-centre", flux.h))
                t.append((-k, -c, "band-centre", flux.h))
    out.table("landau.csv", t)
    return {"omitted": ladders[0].omitted}


def cmd_magnetization(cfg, out: Outputs) -> dict:
    from .magnetics import magnetization_curve
    d, pot = _discriminant(cfg)
    mu = cfg.mu
    if mu is None:
        mu = math.pi ** 2 / 4 + 0.3 if pot is not None else 0.1
    mu = float(mu)
    beta = _beta(cfg)
    hs = np.linspace(float(cfg.hmin), float(cfg.hmax), int(cfg.nh))
    methods = ["sawtooth", "landau-sum"] if cfg.method == "all" else [cfg.method]
    t = io.SweepTable(["h", "M", "method", "mu", "beta"])
    curves, warns = {}, []
    for m in methods:
        c = magnetization_curve(mu, hs, m, d, beta, float(cfg.dh), n=int(cfg.grid))
        curves[m] = c.M
        warns += c.meta.get("warnings", [])
        for r in c.rows():
            t.append((r["h"], r["M"], r["method"], r["mu"], r["beta"]))
    out.table("magnetization.csv", t)

    def render(path):
        from .plotting import plot_curves
        plot_curves(1.0 / hs, curves, path, "1/h", "M", f"mu = {mu:.4f}")
    out.figure("magnetization.png", render)
    return {"dh": float(cfg.dh), "warnings": warns}


def cmd_hall(cfg, out: Outputs) -> dict:
    from .hall import STRICT_GAP, gap_label, hall_map, streda
    hm = hall_map(int(cfg.qmax), n=int(cfg.grid))
    out.table("hall.csv", hm)
    if cfg.mu is not None:
        flux = _flux(cfg)
        lab = gap_label(flux, float(cfg.mu))
        rep = {"flux": str(flux), "mu": float(cfg.mu), "gap": lab.gap, "j": lab.j,
               "gamma1": lab.gamma1, "gamma2": lab.gamma2, "trace": lab.trace}
        if not flux.is_zero:
            rep["two_pi_streda"] = TWO_PI * streda(float(cfg.mu), flux.h)
        out.json("label.json", rep)

    def render(path):
        from .plotting import plot_gap_labels
        plot_gap_labels([(p / q, lo, hi, g) for p, q, lo, hi, _, _, g, _ in hm.rows], path)
    out.figure("hall.png", render)
    return {"strict_gap": STRICT_GAP, "refine_tol": 1e-9}


def cmd_fractal(cfg, out: Outputs) -> dict:
    from .fractal import continuity_study, convergent_pairs, dimension_report, measure_scaling
    try:
        qs = [int(x) for x in str(cfg.qs).split(",")]
    except ValueError:
        raise ConfigError(f"qs must be a comma-separated list of integers, got {cfg.qs!r}") from None
    n = int(cfg.grid)
    ms = measure_scaling(qs, n=n)
    out.table("measure.csv", ms.table())
    pairs = convergent_pairs("golden", int(cfg.qmax))
    cs = continuity_study(pairs, n=n)
    out.table("continuity.csv", cs.table())
    dr = dimension_report([b for _, b in pairs], n=n)
    out.table("dimension.csv", dr.table())

    def render(path):
        from .plotting import plot_curves
        plot_curves(cs.column("dh"), {"d_H": cs.column("d_hausdorff"),
                                       "|dh|^(1/4)": cs.column("dh") ** 0.25}, path,
                    "|h - h'|", "distance", "Hausdorff distance along golden convergents")
    out.figure("continuity.png", render)
    return {"refine_tol": 1e-9, "merge_tol": MERGE_TOL, "box_eps": dr.meta["eps"]}


def cmd_disorder(cfg, out: Outputs) -> dict:
    from .disorder import RUN_COLUMNS, gap_persistence
    flux = _flux(cfg)
    seeds = list(range(int(cfg.seed), int(cfg.seed) + int(cfg.nseeds)))
    rep = gap_persistence(flux, float(cfg.kappa), seeds, int(cfg.L), cfg.distribution)
    out.table("disorder.csv", io.SweepTable(RUN_COLUMNS, rep.rows))
    out.json("gaps.json", {"flux": str(flux), "kappa": rep.kappa, "L": rep.L, "seeds": seeds,
                           "violations": rep.violations, "hausdorff": rep.hausdorff,
                           "bound": rep.kappa / 3.0, "gaps": rep.gaps})

    def render(path):
        from .plotting import plot_scatter
        e, r = np.array([(row[0], row[1]) for row in rep.rows]).T
        plot_scatter(e, r, path, "E", "IPR", f"flux {flux}, kappa {rep.kappa}", logy=True)
    out.figure("ipr.png", render)
    return {"bound": rep.kappa / 3.0}


def cmd_graph(cfg, out: Outputs) -> dict:
    flux = _flux(cfg)
    d, pot = _discriminant(cfg)
    if pot is None:
        raise ConfigError("graph needs an edge potential (zero, mathieu:A or a table)")
    window = _window(cfg, pot)
    hb = hb_spectrum(pot, flux, window, int(cfg.grid))
    t = io.SweepTable(["kind", "index", "lo", "hi"])
    for i, (lo, hi) in enumerate(hb.continuous):
        t.append(("continuous", i, lo, hi))
    for i, x in enumerate(hb.dirichlet):
        t.append(("dirichlet", i, x, x))
    out.table("graph.csv", t)
    lam = np.linspace(window[0], window[1], 801)
    val, der = d(lam)
    out.table("discriminant.csv", io.SweepTable(["lam", "Delta", "dDelta"], list(zip(lam, val, der))))

    def render(path):
        from .plotting import plot_curves
        plot_curves(lam, {"Delta": val, "+1": np.ones_like(lam), "-1": -np.ones_like(lam)}, path,
                    "lambda", "Delta", f"discriminant, {pot.kind}")
    out.figure("discriminant.png", render)
    return {"ode_rtol": RTOL, "ode_atol": ATOL, "warnings": hb.warnings}


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# -- driver ------------------------------------------------------------------

def run(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".stage-", dir=out_dir.parent))
    t0 = time.perf_counter()
    try:
        outs = Outputs(stage, bool(cfg.figure))
        tolerances = HANDLERS[cfg.command](cfg, outs)
        io.write_json(stage / "config.json", cfg.to_dict())
        io.write_json(stage / "manifest.json",
                      io.manifest(cfg.command, cfg.to_dict(), tolerances, outs.files + ["config.json"],
                                  time.perf_counter() - t0))
        out_dir.mkdir(parents=True, exist_ok=True)
        for f in sorted(stage.iterdir()):
            f.replace(out_dir / f.name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="flux numerator")
    common.add_argument("--q", type=int, help="flux denominator")
    common.add_argument("--qmax", type=int, help="largest denominator in sweeps")
    common.add_argument("--potential", help="tb, zero, mathieu[:amplitude]")
    common.add_argument("--grid", type=int, help="k-grid points per reduced-zone axis")
    common.add_argument("--sigma", type=float, help="Gaussian smoothing width")
    common.add_argument("--mu", type=float, help="chemical potential / Fermi energy")
    common.add_argument("--beta", help="inverse temperature (number or inf)")
    common.add_argument("--kappa", type=float, help="disorder strength")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file with settings (flags override it)")
    common.add_argument("--figure", action="store_true", default=None,
                        help="also render PNG figures next to the CSV files")
    common.add_argument("--window", help="graph energy window 'lo,hi'")

    parser = argparse.ArgumentParser(prog="hexflux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    extra = {
        "dos": [("--mu-min", float), ("--mu-max", float), ("--nmu", int)],
        "landau": [("--nlev", int)],
        "magnetization": [("--method", str), ("--hmin", float), ("--hmax", float), ("--nh", int),
                          ("--dh", float)],
        "fractal": [("--qs", str)],
        "disorder": [("--L", int), ("--nseeds", int), ("--distribution", str)],
    }
    helps = {
        "bands": "band edges, Dirac check and a dispersion cut",
        "butterfly": "spectrum and gap labels over all p/q with q <= qmax",
        "dos": "smoothed density of states",
        "landau": "Landau ladders (semiclassical, perfect cone, band centres)",
        "magnetization": "magnetization curve M(h)",
        "hall": "gap labels and Streda values",
        "fractal": "measure scaling, Hausdorff continuity, box dimension",
        "disorder": "finite disordered samples, gap persistence and IPR",
        "graph": "quantum-graph spectrum and discriminant",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        for flag, typ in extra.get(name, []):
            sp.add_argument(flag, type=typ, dest=flag.lstrip("-").replace("-", "_"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    try:
        file_values = {}
        if args.config:
            try:
                file_values = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as err:
                raise ConfigError(f"cannot read config {args.config}: {err}") from err
            if not isinstance(file_values, dict):
                raise ConfigError("config file must hold a JSON object")
        cfg = RunConfig.resolve(args.command, file_values, flags)
        return run(cfg)
    except HexfluxError as err:
        print(f"hexflux {args.command}: {type(err).__name__}: {err}", file=sys.stderr)
        return err.exit_code
    except (ValueError, KeyError) as err:
        print(f"hexflux {args.command}: invalid configuration: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
