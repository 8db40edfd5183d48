"""Batch front-end: per-shape pipelines producing CSV data and SVG figures.

Subcommands:
  spectrum   geometry -> eigensolver -> splittings    (spectrum.csv, splittings.csv)
  bouncemap  classical bounce-map sampling            (poincare.csv, poincare.svg)
  husimi     barrier Husimi summaries per pair        (husimi.csv)
  report     figures from existing CSV products       (three SVGs)
  oned       1D double-well levels and splittings     (oned.csv, oned_splittings.csv)

Configuration is a flat key=value file with '#' comments; one shape per
run.  --seed overrides the config seed.  Exit codes: 0 ok, 1 runtime
failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import billiards, csvio, husimi, oned, qsolver, spectra, svgplot
from .geometry import SHAPE_KINDS, GeometryError, ShapeSpec, build_double_well


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    shape: str = "rectangle"
    h: float = 0.02
    e_max: float = 300.0
    seed: int = 1
    n_traj: int = 400
    n_bounces: int = 400
    husimi_n_y0: int = 64
    husimi_n_py: int = 64
    husimi_sigma: float = 0.0          # 0 = per-state default width
    barrier_width: float = 0.1
    barrier_height: float = 1000.0
    well_area: float = 4.8
    oned_well_width: float = 2.0
    # per-shape parameter overrides; 0 = family default
    rectangle_ly: float = 0.0
    circle_cap_fraction: float = 0.0
    stadium_cap_width: float = 0.0
    sinai_lx: float = 0.0
    sinai_ly: float = 0.0
    butterfly_ly: float = 0.0
    butterfly_sagitta: float = 0.0
    concave_ly: float = 0.0
    concave_sagitta: float = 0.0

    def validate(self):
        if self.shape not in SHAPE_KINDS:
            raise ConfigError(f"unknown shape {self.shape!r}")
        for f in fields(self):
            if f.name == "shape":
                continue
            v = getattr(self, f.name)
            if v < 0:
                raise ConfigError(f"config key {f.name} must be positive, got {v}")
        for key in ("h", "e_max", "n_traj", "n_bounces", "husimi_n_y0",
                    "husimi_n_py", "barrier_width", "barrier_height",
                    "well_area", "oned_well_width"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"config key {key} must be > 0")
        return self

    def shape_spec(self):
        prefix = self.shape + "_"
        params = {}
        for f in fields(self):
            if f.name.startswith(prefix):
                v = getattr(self, f.name)
                if v > 0:
                    params[f.name[len(prefix):]] = v
        return ShapeSpec(kind=self.shape, barrier_width=self.barrier_width,
                         barrier_height=self.barrier_height,
                         well_area=self.well_area, params=params)


def parse_config(path):
    cfg = RunConfig()
    valid = {f.name: f for f in fields(RunConfig)}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in valid:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            f = valid[key]
            try:
                if f.type == "str" or f.name == "shape":
                    setattr(cfg, key, val)
                elif f.type == "int" or isinstance(getattr(cfg, key), int):
                    setattr(cfg, key, int(val))
                else:
                    setattr(cfg, key, float(val))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return cfg.validate()


# ----------------------------------------------------------------------
# pipelines
# ----------------------------------------------------------------------

def _solve(cfg):
    g = build_double_well(cfg.shape_spec())
    evens, odds = qsolver.solve_double_well(g, cfg.h, cfg.e_max)
    records = spectra.pair_states(evens, odds)
    if cfg.shape == "rectangle":
        modes = oned.separable_oracle_2d(
            g.resolved["lx"], g.resolved["ly"], cfg.barrier_width,
            cfg.barrier_height, cfg.e_max)
        spectra.attach_rectangle_labels(records, modes)
    return g, evens, odds, records


def _write_spectrum_products(out, evens, odds, records):
    merged = sorted(evens + odds, key=lambda s: (s.energy, s.parity))
    csvio.write_csv(
        os.path.join(out, "spectrum.csv"),
        ["id", "parity", "E", "residual"],
        [(i, s.parity, s.energy, s.residual) for i, s in enumerate(merged)])
    csvio.write_csv(
        os.path.join(out, "splittings.csv"),
        ["pair", "E_even", "E_odd", "E_mean", "delta_E", "confidence", "n_x", "n_y"],
        [(r.ordinal, r.e_even, r.e_odd, r.e_mean, r.delta_e, r.confidence,
          r.n_x, r.n_y) for r in records])


def cmd_spectrum(cfg, out):
    _, evens, odds, records = _solve(cfg)
    _write_spectrum_products(out, evens, odds, records)
    return 0


def cmd_bouncemap(cfg, out):
    g = build_double_well(cfg.shape_spec())
    well = billiards.WellBoundary.from_geometry(g, "left")
    pts = billiards.poincare_section(well, n_traj=cfg.n_traj,
                                     n_bounces=cfg.n_bounces, seed=cfg.seed)
    csvio.write_csv(os.path.join(out, "poincare.csv"),
                    ["traj", "bounce", "s", "c"],
                    [(int(t), int(b), s, c) for t, b, s, c in pts])
    svgplot.scatter_svg(os.path.join(out, "poincare.svg"),
                        [(pts[:, 2] / well.total_length, pts[:, 3])],
                        xlabel="s / L", ylabel="c = sin(theta)",
                        title=f"{cfg.shape} bounce map", radius=0.8)
    return 0


def cmd_husimi(cfg, out):
    g, evens, _, records = _solve(cfg)
    sigma = cfg.husimi_sigma if cfg.husimi_sigma > 0 else None
    sums = husimi.summarize_spectrum(g, evens, records, sigma=sigma,
                                     n_y0=cfg.husimi_n_y0, n_py=cfg.husimi_n_py)
    csvio.write_csv(os.path.join(out, "husimi.csv"),
                    ["pair", "E_mean", "amp", "p_norm", "weighted", "flags"],
                    [(s.ordinal, s.e_mean, s.amp, s.p_norm, s.weighted,
                      int(s.flagged)) for s in sums])
    return 0


def _require(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing input file: {path}")
    return path


def cmd_report(cfg, out):
    header, rows = csvio.read_csv(_require(os.path.join(out, "splittings.csv")))
    if not rows:
        raise RuntimeError("splittings.csv has no records")
    records = [spectra.SplittingRecord(
        ordinal=int(r[0]), e_even=float(r[1]), e_odd=float(r[2]),
        confidence=float(r[5])) for r in rows]
    e_mean = np.array([r.e_mean for r in records])
    delta = np.array([r.delta_e for r in records])
    positive = delta > 0
    svgplot.scatter_svg(
        os.path.join(out, "splittings_vs_energy.svg"),
        [(e_mean[positive], np.log10(delta[positive]))],
        xlabel="pair mean energy", ylabel="log10 splitting",
        title=f"{cfg.shape} tunneling rates")

    _, hrows = csvio.read_csv(_require(os.path.join(out, "husimi.csv")))
    weighted = {int(r[0]): float(r[4]) for r in hrows if r[5] == "0"}
    joined = [(weighted[r.ordinal], r.delta_e) for r in records
              if r.ordinal in weighted and r.delta_e > 0]
    svgplot.scatter_svg(
        os.path.join(out, "splittings_vs_weighted.svg"),
        [([w for w, _ in joined], [math.log10(d) for _, d in joined])],
        xlabel="weighted normal momentum <psi><p_x>", ylabel="log10 splitting",
        title=f"{cfg.shape} rates vs barrier momentum")

    points = spectra.regularization_index(records)
    svgplot.scatter_svg(
        os.path.join(out, "spread_index.svg"),
        [([p.center for p in points], [math.log10(p.ratio) for p in points])],
        xlabel="window center energy", ylabel="log10 max/min splitting ratio",
        title=f"{cfg.shape} spread index", radius=3.0)
    return 0


def cmd_oned(cfg, out):
    spec = oned.OneDWellSpec(well_width=cfg.oned_well_width,
                             barrier_width=cfg.barrier_width,
                             barrier_height=cfg.barrier_height)
    rows = []
    for parity in ("even", "odd"):
        for n, e in enumerate(oned.levels(spec, parity, cfg.e_max), start=1):
            rows.append((parity, n, e))
    csvio.write_csv(os.path.join(out, "oned.csv"), ["parity", "n", "E"], rows)
    csvio.write_csv(os.path.join(out, "oned_splittings.csv"),
                    ["n", "E_mean", "delta_E"],
                    [(n, em, de) for n, (em, de) in
                     enumerate(oned.splitting_1d(spec, cfg.e_max), start=1)])
    return 0


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "bouncemap": cmd_bouncemap,
    "husimi": cmd_husimi,
    "report": cmd_report,
    "oned": cmd_oned,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="billiardwells",
        description="Double-well billiard tunneling pipelines")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config) if args.config else RunConfig().validate()
        if args.seed is not None:
            cfg.seed = args.seed
    except (ConfigError, GeometryError, FileNotFoundError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        return _COMMANDS[args.command](cfg, args.out)
    except (ConfigError, GeometryError, qsolver.ConfigurationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
